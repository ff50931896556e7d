"""Declarative flow definitions.

A flow is data, not code: an ordered list of steps of known kinds with
parameter maps and named inputs referencing earlier step outputs
(``steps.<name>.<key>``) or run parameters (``params.<key>``).
Dataflow is validated at definition time, not run time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import ParseError, UnboundInput

# Output keys each step kind is guaranteed to produce; input references
# are validated against this table when the flow is defined.
KIND_OUTPUTS: dict[str, tuple[str, ...]] = {
    "ingest_file": ("path", "size", "url"),
    "compute_checksum": ("algorithm", "digest", "length"),
    "extract_metadata": ("metadata",),
    "build_bag": ("bag_path", "bag_digest", "payload_digest", "payload_octets",
                  "payload_oxum"),
    "make_holey": ("bag_path", "fetch_count"),
    "quality_check": ("passed",),
    "mint_id": ("id", "checksum"),
    "register_record": ("rid", "citation"),
}

# Step kinds with external effects; their outputs are replayed from the
# idempotency ledger instead of re-executing.
EFFECTFUL_KINDS = ("ingest_file", "build_bag", "make_holey", "mint_id", "register_record")


@dataclass(frozen=True)
class StepDef:
    name: str
    kind: str
    params: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)  # input name -> reference

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "params": self.params,
                "inputs": self.inputs}


@dataclass(frozen=True)
class FlowDef:
    name: str
    steps: tuple[StepDef, ...] = ()
    on_error: str = "halt"  # "halt" or "retry"
    retry_attempts: int = 0

    def step(self, name: str) -> StepDef:
        for step in self.steps:
            if step.name == name:
                return step
        raise KeyError(name)

    def to_dict(self) -> dict:
        on_error = (
            {"retry": {"attempts": self.retry_attempts}}
            if self.on_error == "retry" else "halt"
        )
        return {
            "name": self.name,
            "on_error": on_error,
            "steps": [s.to_dict() for s in self.steps],
        }


def _collect_refs(value) -> list[str]:
    """Find step/param references anywhere inside params (e.g. inside a
    quality_check predicate)."""
    refs = []
    if isinstance(value, str) and value.startswith(("steps.", "params.")):
        refs.append(value)
    elif isinstance(value, dict):
        for v in value.values():
            refs.extend(_collect_refs(v))
    elif isinstance(value, (list, tuple)):
        for v in value:
            refs.extend(_collect_refs(v))
    return refs


def define_flow(document: dict | str) -> FlowDef:
    """Validate a flow description document into a FlowDef.

    Raises ParseError for structural problems and UnboundInput when a
    step consumes an output no earlier step produces.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(document, dict):
        raise ParseError("flow document must be an object")
    name = document.get("name")
    if not name or not isinstance(name, str):
        raise ParseError("flow needs a name")

    on_error = document.get("on_error", "halt")
    retry_attempts = 0
    if isinstance(on_error, dict) and "retry" in on_error:
        retry_attempts = int(on_error["retry"].get("attempts", 1))
        if retry_attempts < 0:
            raise ParseError("retry attempts must be >= 0")
        on_error = "retry"
    elif on_error != "halt":
        raise ParseError(f"on_error must be 'halt' or {{'retry': ...}}, got {on_error!r}")

    steps: list[StepDef] = []
    produced: dict[str, tuple[str, ...]] = {}
    for index, raw in enumerate(document.get("steps", [])):
        if not isinstance(raw, dict):
            raise ParseError(f"step {index}: not an object")
        step_name = raw.get("name")
        kind = raw.get("kind")
        if not step_name:
            raise ParseError(f"step {index}: missing name")
        if step_name in produced:
            raise ParseError(f"step {step_name!r}: duplicate step name")
        if kind not in KIND_OUTPUTS:
            raise ParseError(f"step {step_name!r}: unknown kind {kind!r}")
        params = raw.get("params", {})
        inputs = raw.get("inputs", {})
        if not isinstance(params, dict) or not isinstance(inputs, dict):
            raise ParseError(f"step {step_name!r}: params and inputs must be objects")
        for ref in _collect_refs(inputs) + _collect_refs(params):
            _check_ref(step_name, ref, produced)
        steps.append(StepDef(step_name, kind, params, inputs))
        produced[step_name] = KIND_OUTPUTS[kind]

    return FlowDef(name=name, steps=tuple(steps), on_error=on_error,
                   retry_attempts=retry_attempts)


def _check_ref(step_name: str, ref, produced: dict[str, tuple[str, ...]]) -> None:
    if not isinstance(ref, str):
        return  # literal value
    if ref.startswith("params."):
        return  # bound from run parameters at start
    if not ref.startswith("steps."):
        return  # literal string
    parts = ref.split(".", 2)
    if len(parts) != 3:
        raise UnboundInput(f"{step_name}: malformed reference {ref!r}")
    _, source, key = parts
    if source not in produced:
        raise UnboundInput(f"{step_name}: {ref!r} references a later or unknown step")
    if key not in produced[source]:
        raise UnboundInput(f"{step_name}: step {source!r} does not produce {key!r}")
