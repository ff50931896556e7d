"""Resumable, audited flow execution with exactly-once effects.

Run state is persisted as newline-delimited events next to the catalog
log and replayed to reconstruct runs. Effectful steps write their
outputs to an idempotency ledger keyed by (flow, step, input content);
replays with the same key return the recorded outputs instead of
repeating the effect.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from ..canonical import append_jsonl, canonical_json, read_jsonl, rfc3339
from ..catalog import Catalog, Principal
from ..clock import SYSTEM_CLOCK, Clock
from ..errors import FairError, NotFound, NotResumable, TypeViolation
from ..idspace import Registry
from ..idspace.idstring import new_id
from .spec import EFFECTFUL_KINDS, FlowDef, StepDef, define_flow
from .steps import StepFailure, run_step

RUNNING = "running"
FAILED = "failed"
COMPLETED = "completed"

_RETRY_DELAYS = (1.0, 2.0, 4.0)

_AUDIT_ACTION = {
    "step_start": "start",
    "step_retry": "retry",
    "step_finish": "finish",
    "step_fail": "fail",
    "step_skip": "skip",
}


@dataclass(frozen=True)
class AuditEvent:
    timestamp: str
    step: str
    action: str  # start | finish | fail | retry | skip
    detail: str = ""

    def to_dict(self) -> dict:
        return {"timestamp": self.timestamp, "step": self.step,
                "action": self.action, "detail": self.detail}


@dataclass
class StepState:
    status: str = "pending"  # pending | done | failed
    outputs: dict = field(default_factory=dict)
    error: str = ""


@dataclass
class FlowRun:
    run_id: str
    flow: FlowDef
    params: dict
    status: str = RUNNING
    failed_step: str | None = None
    step_states: dict[str, StepState] = field(default_factory=dict)
    audit: list[AuditEvent] = field(default_factory=list)

    def outputs(self, step: str) -> dict:
        return self.step_states[step].outputs

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "flow": self.flow.name,
            "status": self.status,
            "failed_step": self.failed_step,
            "steps": {
                name: {"status": s.status, "outputs": s.outputs, "error": s.error}
                for name, s in self.step_states.items()
            },
        }


@dataclass
class ServiceBindings:
    """Live service handles a run executes against."""

    data_dir: Path
    registry: Registry | None = None
    catalog: Catalog | None = None
    actor: Principal = Principal.of("flow-runner", "admin")
    namespace: str = "MINID"
    clock: Clock = SYSTEM_CLOCK
    # test hook simulating failures/kills; raises inside a step, before
    # its effect happens
    fault_hook: Callable[[str, str], None] | None = None

    @property
    def storage_dir(self) -> Path:
        return Path(self.data_dir) / "storage"


def _resolve_ref(ref: Any, context: dict) -> Any:
    if not isinstance(ref, str):
        return ref
    if ref.startswith("params."):
        key = ref.split(".", 1)[1]
        if key not in context["params"]:
            raise StepFailure(f"run parameter {key!r} not supplied")
        return context["params"][key]
    if ref.startswith("steps."):
        _, step, key = ref.split(".", 2)
        return context["steps"][step][key]
    return ref


def _resolve_deep(value: Any, context: dict) -> Any:
    if isinstance(value, dict):
        return {k: _resolve_deep(v, context) for k, v in value.items()}
    if isinstance(value, list):
        return [_resolve_deep(v, context) for v in value]
    return _resolve_ref(value, context)


class FlowRunner:
    """Executes and resumes flows against one data directory."""

    def __init__(self, services: ServiceBindings):
        self.services = services
        flows_dir = Path(services.data_dir) / "flows"
        self.run_log = flows_dir / "runs.log"
        self.effects_log = flows_dir / "effects.log"
        self._effects: dict[str, dict] = {
            entry["key"]: entry["outputs"] for entry in read_jsonl(self.effects_log)
        }

    # -- event plumbing ---------------------------------------------------

    def _emit(self, run_id: str, event: str, **extra) -> None:
        append_jsonl(
            self.run_log,
            {"run_id": run_id, "ts": rfc3339(self.services.clock.now()),
             "event": event, **extra},
        )

    def _events(self, run_id: str) -> list[dict]:
        return [e for e in read_jsonl(self.run_log) if e.get("run_id") == run_id]

    def run_ids(self) -> list[str]:
        seen: list[str] = []
        for event in read_jsonl(self.run_log):
            run_id = event.get("run_id")
            if run_id and run_id not in seen:
                seen.append(run_id)
        return seen

    # -- public surface -----------------------------------------------------

    def run(self, flow: FlowDef, params: dict | None = None,
            run_id: str | None = None) -> FlowRun:
        self._check_bindings(flow)
        params = dict(params or {})
        run_id = run_id or str(new_id("RUN"))
        self._emit(run_id, "run_start", flow=flow.to_dict(), params=params)
        run = FlowRun(run_id=run_id, flow=flow, params=params)
        return self._execute(run, already_done={})

    def resume(self, run_id: str) -> FlowRun:
        run, done = self._load(run_id)
        if run.status == COMPLETED:
            raise NotResumable(f"run {run_id} already completed")
        self._check_bindings(run.flow)
        run.status = RUNNING
        run.failed_step = None
        return self._execute(run, already_done=done)

    def _check_bindings(self, flow: FlowDef) -> None:
        """Binding errors throw; step failures are only ever recorded."""
        kinds = {step.kind for step in flow.steps}
        if "mint_id" in kinds and self.services.registry is None:
            raise TypeViolation("flow mints identifiers but no registry is bound")
        if "register_record" in kinds and self.services.catalog is None:
            raise TypeViolation("flow registers records but no catalog is bound")

    def load(self, run_id: str) -> FlowRun:
        run, _ = self._load(run_id)
        return run

    def audit_log(self, run_id: str) -> list[AuditEvent]:
        return self.load(run_id).audit

    # -- execution ---------------------------------------------------------

    def _execute(self, run: FlowRun, already_done: dict[str, dict]) -> FlowRun:
        context = {"params": run.params, "steps": dict(already_done)}
        for name, outputs in already_done.items():
            run.step_states[name] = StepState(status="done", outputs=outputs)

        for step in run.flow.steps:
            if step.name in context["steps"]:
                self._emit(run.run_id, "step_skip", step=step.name,
                           detail="done in an earlier attempt")
                continue
            outcome = self._execute_step(run, step, context)
            if outcome is None:
                run.status = FAILED
                run.failed_step = step.name
                self._emit(run.run_id, "run_fail", step=step.name)
                return self._refresh(run)
            context["steps"][step.name] = outcome

        run.status = COMPLETED
        self._emit(run.run_id, "run_finish")
        return self._refresh(run)

    def _refresh(self, run: FlowRun) -> FlowRun:
        loaded, _ = self._load(run.run_id)
        return loaded

    def _execute_step(self, run: FlowRun, step: StepDef, context: dict) -> dict | None:
        self._emit(run.run_id, "step_start", step=step.name)
        attempts = run.flow.retry_attempts if run.flow.on_error == "retry" else 0
        attempt = 0
        while True:
            try:
                if self.services.fault_hook is not None:
                    self.services.fault_hook(run.run_id, step.name)
                inputs = _resolve_deep(step.inputs, context)
                params = _resolve_deep(step.params, context)
                outputs = self._run_idempotent(run.flow, step, inputs, params)
                self._emit(run.run_id, "step_finish", step=step.name, outputs=outputs)
                return outputs
            except FairError as exc:
                if attempt < attempts:
                    self._emit(run.run_id, "step_retry", step=step.name,
                               detail=f"attempt {attempt + 1}: {exc}")
                    self.services.clock.sleep(_RETRY_DELAYS[min(attempt, 2)])
                    attempt += 1
                    continue
                self._emit(run.run_id, "step_fail", step=step.name, detail=str(exc))
                return None

    def _run_idempotent(self, flow: FlowDef, step: StepDef, inputs: dict,
                        params: dict) -> dict:
        if step.kind not in EFFECTFUL_KINDS:
            return run_step(step.kind, inputs, params, self.services)
        key = self._idempotency_key(flow, step, inputs, params)
        cached = self._effects.get(key)
        if cached is not None:
            return dict(cached)
        outputs = run_step(step.kind, inputs, params, self.services)
        append_jsonl(self.effects_log,
                     {"key": key, "step": step.name, "kind": step.kind,
                      "outputs": outputs})
        self._effects[key] = outputs
        return outputs

    def _idempotency_key(self, flow: FlowDef, step: StepDef, inputs: dict,
                         params: dict) -> str:
        material: dict[str, Any] = {
            "flow": flow.name,
            "step": step.name,
            "inputs": {k: inputs[k] for k in sorted(inputs)},
            "params": {k: params[k] for k in sorted(params)},
        }
        if step.kind == "ingest_file":
            source = Path(str(inputs.get("source") or params.get("source", "")))
            if source.is_file():
                material["content"] = hashlib.sha256(source.read_bytes()).hexdigest()
        return hashlib.sha256(canonical_json(material).encode("utf-8")).hexdigest()

    # -- reconstruction ------------------------------------------------------

    def _load(self, run_id: str) -> tuple[FlowRun, dict[str, dict]]:
        events = self._events(run_id)
        if not events:
            raise NotFound(f"run {run_id}")
        run: FlowRun | None = None
        done: dict[str, dict] = {}
        for event in events:
            kind = event["event"]
            if kind == "run_start":
                if run is None:
                    run = FlowRun(run_id=run_id, flow=define_flow(event["flow"]),
                                  params=event.get("params", {}))
                    for step in run.flow.steps:
                        run.step_states[step.name] = StepState()
                else:
                    run.status = RUNNING
                    run.failed_step = None
                continue
            if run is None:
                raise NotFound(f"run {run_id} has no run_start event")
            if kind in _AUDIT_ACTION:
                run.audit.append(AuditEvent(event["ts"], event["step"],
                                            _AUDIT_ACTION[kind],
                                            event.get("detail", "")))
            if kind == "step_finish":
                outputs = event.get("outputs", {})
                run.step_states[event["step"]] = StepState("done", outputs)
                done[event["step"]] = outputs
            elif kind == "step_fail":
                run.step_states[event["step"]] = StepState(
                    "failed", error=event.get("detail", ""))
            elif kind == "run_finish":
                run.status = COMPLETED
                run.failed_step = None
            elif kind == "run_fail":
                run.status = FAILED
                run.failed_step = event.get("step")
        assert run is not None
        return run, done
