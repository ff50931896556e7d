"""Implementations of the flow step kinds.

Each step takes resolved inputs plus params and returns an output
dict matching KIND_OUTPUTS. Effectful steps must be safe to replay
from the idempotency ledger: given the same key they are not executed
again.
"""

from __future__ import annotations

import hashlib
import shutil
import urllib.parse
from pathlib import Path
from typing import Any, Callable

from ..bag import check, create_bag, make_holey, read_bag, write_bag
from ..bag.model import MetadataBlock
from ..errors import FairError, IoFailure, TypeViolation
from ..idspace.binding import bag_digest


class StepFailure(FairError):
    """A step failed; recorded in the run, never thrown to callers."""


# Pluggable metadata extractors; format-specific ones can be registered
# by the embedding application.
Extractor = Callable[[Path], dict]
EXTRACTORS: dict[str, Extractor] = {}


def register_extractor(name: str, extractor: Extractor) -> None:
    EXTRACTORS[name] = extractor


def _basic_extractor(path: Path) -> dict:
    data = path.read_bytes()
    return {
        "filename": path.name,
        "size_octets": len(data),
        "sha256": hashlib.sha256(data).hexdigest(),
    }


register_extractor("basic", _basic_extractor)


def run_step(kind: str, inputs: dict, params: dict, services) -> dict:
    handler = _HANDLERS.get(kind)
    if handler is None:
        raise StepFailure(f"unknown step kind {kind!r}")
    return handler(inputs, params, services)


def _ingest_file(inputs: dict, params: dict, services) -> dict:
    source = Path(inputs.get("source") or params.get("source", ""))
    if not source.is_file():
        raise StepFailure(f"source file not found: {source}")
    digest = hashlib.sha256(source.read_bytes()).hexdigest()
    dest_dir = services.storage_dir / digest[:16]
    dest = dest_dir / source.name
    if not dest.exists():
        dest_dir.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(source, dest)
    return {"path": str(dest), "size": dest.stat().st_size,
            "url": dest.resolve().as_uri()}


def _compute_checksum(inputs: dict, params: dict, services) -> dict:
    path = Path(inputs["path"])
    if not path.is_file():
        raise StepFailure(f"no file at {path}")
    data = path.read_bytes()
    algorithm = params.get("algorithm", "sha256")
    try:
        digest = hashlib.new(algorithm.replace("-", ""), data).hexdigest()
    except ValueError:
        raise StepFailure(f"unknown checksum algorithm {algorithm!r}")
    return {"algorithm": algorithm.replace("-", ""), "digest": digest, "length": len(data)}


def _extract_metadata(inputs: dict, params: dict, services) -> dict:
    path = Path(inputs["path"])
    extractor = EXTRACTORS.get(params.get("extractor", "basic"))
    if extractor is None:
        raise StepFailure(f"no metadata extractor {params.get('extractor')!r}")
    metadata = dict(extractor(path))
    metadata.update(params.get("extra", {}))
    return {"metadata": metadata}


def _build_bag(inputs: dict, params: dict, services) -> dict:
    source = Path(inputs["path"])
    metadata = inputs.get("metadata")
    key = hashlib.sha256(
        f"{source}:{sorted((metadata or {}).items())!r}".encode()
    ).hexdigest()[:16]
    staging = services.storage_dir / "bags" / key / "staging"
    bag_dir = services.storage_dir / "bags" / key / "bag"
    if not bag_dir.exists():
        staging.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(source, staging / source.name)
        block = MetadataBlock("key-value", {str(k): v for k, v in (metadata or {}).items()})
        bag = create_bag(staging, metadata=block,
                         info=[("External-Description", params.get("description", "flow bag"))])
        write_bag(bag, bag_dir)
    bag = read_bag(bag_dir)
    [(alg, entries)] = bag.manifests
    payload_digest = (
        entries[0].digest if len(entries) == 1
        else hashlib.sha256(
            "".join(f"{e.digest} {e.path}\n" for e in entries).encode()
        ).hexdigest()
    )
    return {
        "bag_path": str(bag_dir),
        "bag_digest": bag_digest(bag),
        "payload_digest": payload_digest,
        "payload_octets": sum(p.size for p in bag.payload),
        "payload_oxum": bag.payload_oxum(),
    }


def _make_holey(inputs: dict, params: dict, services) -> dict:
    bag_dir = Path(inputs["bag_path"])
    template = params.get("url_template", "file://{path}")
    bag = read_bag(bag_dir)

    def url_for(path: str) -> str:
        absolute = (bag_dir / Path(*path.split("/"))).resolve()
        return template.format(path=urllib.parse.quote(path), name=Path(path).name,
                               absolute=absolute.as_uri())

    holey = make_holey(bag, lambda p: True, url_for)
    dest = bag_dir.parent / (bag_dir.name + "-holey")
    if not dest.exists():
        try:
            write_bag(holey, dest)
        except IoFailure as exc:
            raise StepFailure(str(exc))
    return {"bag_path": str(dest), "fetch_count": len(holey.fetch)}


def _quality_check(inputs: dict, params: dict, services) -> dict:
    predicate = params.get("predicate")
    if not isinstance(predicate, dict) or "check" not in predicate:
        raise StepFailure("quality_check needs params.predicate.check")
    left = predicate.get("left", inputs.get("left"))
    right = predicate.get("right", inputs.get("right"))
    if not _evaluate(predicate["check"], left, right):
        raise StepFailure(
            f"quality check failed: {predicate['check']} left={left!r} right={right!r}"
        )
    return {"passed": True}


def _evaluate(check_name: str, left, right) -> bool:
    """Small predicate language over resolved step outputs: comparisons,
    presence, and digest equality. No general interpreter."""
    if check_name in ("equals", "digest_equals"):
        return left == right
    if check_name == "not_equals":
        return left != right
    if check_name == "exists":
        return left is not None
    if check_name == "nonempty":
        return bool(left)
    if check_name == "valid_bag":
        report = check(Path(str(left)))
        return report.is_valid
    raise StepFailure(f"unknown quality check {check_name!r}")


def _mint_id(inputs: dict, params: dict, services) -> dict:
    if services.registry is None:
        raise TypeViolation("mint_id needs an identifier registry binding")
    digest = inputs.get("digest")
    if not digest:
        raise StepFailure("mint_id needs a digest input")
    locations = inputs.get("locations") or params.get("locations")
    if isinstance(locations, str):
        locations = [locations]
    if not locations and inputs.get("location"):
        locations = [inputs["location"]]
    if not locations:
        raise StepFailure("mint_id needs at least one location")
    locations = [_as_url(loc) for loc in locations]
    record = services.registry.mint(
        creator=params.get("creator", services.actor.name),
        checksum=(params.get("algorithm", "sha256"), digest),
        locations=locations,
        title=inputs.get("title") or params.get("title"),
        namespace=params.get("namespace", services.namespace),
    )
    return {"id": str(record.id), "checksum": record.checksum[1]}


def _as_url(location: Any) -> str:
    text = str(location)
    if "://" in text or text.startswith(("minid:", "doi:")):
        return text
    return Path(text).resolve().as_uri()


def _register_record(inputs: dict, params: dict, services) -> dict:
    if services.catalog is None:
        raise TypeViolation("register_record needs a catalog binding")
    schema = params.get("schema", "main")
    table = params.get("table")
    if not table:
        raise StepFailure("register_record needs params.table")
    values = dict(inputs.get("values") or {})
    for name, value in inputs.items():
        if name not in ("values",):
            values.setdefault(name, value)
    try:
        version = services.catalog.insert(schema, table, values, services.actor)
    except FairError as exc:
        raise StepFailure(f"insert rejected: {exc}")
    _, _, citation = services.catalog.resolve_rid(version.rid)
    return {"rid": version.rid, "citation": citation}


_HANDLERS = {
    "ingest_file": _ingest_file,
    "compute_checksum": _compute_checksum,
    "extract_metadata": _extract_metadata,
    "build_bag": _build_bag,
    "make_holey": _make_holey,
    "quality_check": _quality_check,
    "mint_id": _mint_id,
    "register_record": _register_record,
}
