"""The catalog proper: an append-only operation log with snapshot reads.

The log (model changes + record writes) is the source of truth; every
mutation appends one operation and advances the catalog snapshot id,
which is simply the sequence number of the last applied operation.
Reads can be pinned to any historical snapshot.

Extension rows share their parent's RID (one-to-one augmentation), so
records are keyed internally by (schema, table, rid); bare-RID lookups
address the base record, which is always the first one minted.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from ..canonical import append_jsonl, parse_rfc3339, read_jsonl, rfc3339
from ..clock import SYSTEM_CLOCK, Clock
from ..errors import (
    CorruptLog,
    DanglingReference,
    DuplicateName,
    NotFound,
    TypeViolation,
    UnknownColumn,
    UnknownPath,
    UnknownTerm,
)
from ..idspace.idstring import new_id, parse_id
from .acl import MODEL_CHANGE, READ, WRITE, AclPolicy, Principal
from .model import CatalogModel, TableDef

DEFAULT_SCHEMA = "main"

RecordKey = tuple[str, str, str]  # (schema, table, rid)


@dataclass(frozen=True)
class RecordVersion:
    rid: str
    schema: str
    table: str
    values: dict
    rct: str
    rmt: str
    model_version: int
    deleted: bool = False
    seq: int = 0  # catalog snapshot at which this version was written

    def as_dict(self, table_def: TableDef | None = None) -> dict:
        """Presentation form: system columns plus values, with stored
        keys mapped through rename aliases and missing (later-added)
        columns shown as null."""
        out: dict[str, Any] = {"RID": self.rid, "RCT": self.rct, "RMT": self.rmt}
        if table_def is None:
            out.update(self.values)
            return out
        resolved = {}
        for key, value in self.values.items():
            try:
                resolved[table_def.resolve_column(key)] = value
            except UnknownColumn:
                resolved[key] = value
        for col in table_def.user_columns():
            out[col.name] = resolved.get(col.name)
        return out


@dataclass
class QueryResult:
    records: list[dict]
    facets: dict[str, dict[str, int]] = field(default_factory=dict)
    snapshot: int = 0


class Catalog:
    """Versioned ERM catalog over one operation log file."""

    def __init__(
        self,
        log_path: Path,
        acl: AclPolicy | None = None,
        namespace: str = "FAIR",
        clock: Clock = SYSTEM_CLOCK,
        base_url: str = "",
    ):
        self.log_path = Path(log_path)
        self.acl = acl or AclPolicy.default()
        self.namespace = namespace.upper()
        self.clock = clock
        self.base_url = base_url.rstrip("/")
        self._lock = threading.Lock()
        self._seq = 0
        # model history: (seq, model), ascending; index 0 is the empty model
        self._models: list[tuple[int, CatalogModel]] = [(0, CatalogModel())]
        self._versions: dict[RecordKey, list[RecordVersion]] = {}
        # rid -> (schema, table) keys in insert order; first is the base record
        self._rid_index: dict[str, list[tuple[str, str]]] = {}
        # (schema, table) -> rids in insert order
        self._table_rids: dict[tuple[str, str], list[str]] = {}
        for lineno, op in enumerate(read_jsonl(self.log_path), start=1):
            try:
                self._replay(op)
            except (KeyError, TypeError, ValueError) as exc:
                raise CorruptLog(f"bad operation in {self.log_path.name}: {exc!r}", lineno)

    # -- log plumbing ------------------------------------------------------

    def _record_op(self, op: str, actor: str, body: dict) -> int:
        self._seq += 1
        append_jsonl(
            self.log_path,
            {"seq": self._seq, "ts": rfc3339(self.clock.now()), "actor": actor,
             "op": op, "body": body},
        )
        return self._seq

    def _replay(self, entry: dict) -> None:
        self._seq = entry["seq"]
        body = entry["body"]
        if entry["op"] == "model_change":
            model = self.model.apply_change(body["change"])
            self._models.append((self._seq, model))
        elif entry["op"] == "insert":
            self._apply_insert(body, self._seq)
        elif entry["op"] in ("update", "delete"):
            self._apply_update(body, self._seq, deleted=entry["op"] == "delete")
        else:
            raise TypeViolation(f"unknown log op {entry['op']!r}")

    def _apply_insert(self, body: dict, seq: int) -> RecordVersion:
        version = RecordVersion(
            rid=body["rid"], schema=body["schema"], table=body["table"],
            values=body["values"], rct=body["rct"], rmt=body["rmt"],
            model_version=body["model_version"], seq=seq,
        )
        key = (version.schema, version.table, version.rid)
        self._versions[key] = [version]
        self._rid_index.setdefault(version.rid, []).append((version.schema, version.table))
        self._table_rids.setdefault((version.schema, version.table), []).append(version.rid)
        return version

    def _apply_update(self, body: dict, seq: int, deleted: bool) -> RecordVersion:
        key = (body["schema"], body["table"], body["rid"])
        prior = self._versions[key][-1]
        version = RecordVersion(
            rid=prior.rid, schema=prior.schema, table=prior.table,
            values={**prior.values, **body.get("values", {})},
            rct=prior.rct, rmt=body["rmt"],
            model_version=body["model_version"], deleted=deleted, seq=seq,
        )
        self._versions[key].append(version)
        return version

    # -- snapshots ---------------------------------------------------------

    @property
    def model(self) -> CatalogModel:
        return self._models[-1][1]

    def current_snapshot(self) -> int:
        return self._seq

    def model_at(self, snapshot: int | None = None) -> CatalogModel:
        if snapshot is None:
            return self.model
        chosen = self._models[0][1]
        for seq, model in self._models:
            if seq > snapshot:
                break
            chosen = model
        return chosen

    def _base_key(self, rid: str) -> RecordKey:
        entries = self._rid_index.get(rid)
        if not entries:
            raise NotFound(rid)
        schema, table = entries[0]
        return (schema, table, rid)

    def _head_of(self, key: RecordKey, snapshot: int | None) -> RecordVersion | None:
        versions = self._versions.get(key)
        if not versions:
            return None
        if snapshot is None:
            return versions[-1]
        head = None
        for version in versions:
            if version.seq > snapshot:
                break
            head = version
        return head

    def history(self, rid: str) -> list[RecordVersion]:
        return list(self._versions[self._base_key(str(parse_id(rid)))])

    # -- model surface -----------------------------------------------------

    def apply_model_change(self, change: dict, actor: Principal) -> CatalogModel:
        self.acl.require(actor, MODEL_CHANGE)
        with self._lock:
            model = self.model.apply_change(change)  # validates references
            seq = self._record_op("model_change", actor.name, {"change": change})
            self._models.append((seq, model))
            return model

    def normalize_term(self, vocabulary: str, raw: str, schema: str | None = None) -> str:
        table = self._vocabulary(vocabulary, schema)
        needle = raw.strip().casefold()
        for term in table.terms:
            if term.canonical.strip().casefold() == needle:
                return term.canonical
            if any(s.strip().casefold() == needle for s in term.synonyms):
                return term.canonical
        raise UnknownTerm(f"{raw!r} is not a term or synonym in vocabulary {vocabulary}")

    def _vocabulary(self, name: str, schema: str | None = None) -> TableDef:
        for schema_name, table in self.model.tables():
            if table.kind == "vocabulary" and table.name == name:
                if schema is None or schema_name == schema:
                    return table
        raise NotFound(f"vocabulary {name}")

    # -- record writes -----------------------------------------------------

    def insert(self, schema: str, table: str, values: dict, actor: Principal) -> RecordVersion:
        self.acl.require(actor, WRITE, schema, table)
        with self._lock:
            table_def = self._table_or_unknown(schema, table)
            normalized = self._validate_values(table_def, values, require_nonnull=True)
            if table_def.kind == "extension":
                rid = self._extension_rid(schema, table_def, values)
            else:
                rid = str(new_id(self.namespace))
            now = rfc3339(self.clock.now())
            body = {
                "rid": rid, "schema": schema, "table": table, "values": normalized,
                "rct": now, "rmt": now, "model_version": self.model.version,
            }
            seq = self._record_op("insert", actor.name, body)
            return self._apply_insert(body, seq)

    def _extension_rid(self, schema: str, table_def: TableDef, values: dict) -> str:
        rid = values.get("RID")
        if not rid:
            raise TypeViolation("extension rows carry their parent's RID")
        rid = str(parse_id(rid))
        parent = self._head_of((schema, table_def.extends, rid), None)
        if parent is None or parent.deleted:
            raise DanglingReference(f"no live {table_def.extends} record {rid}")
        if (schema, table_def.name, rid) in self._versions:
            raise DuplicateName(f"extension row for {rid} already exists")
        return rid

    def update(self, rid: str, changed_values: dict, actor: Principal) -> RecordVersion:
        return self._mutate(rid, changed_values, actor, deleted=False)

    def delete(self, rid: str, actor: Principal) -> RecordVersion:
        return self._mutate(rid, {}, actor, deleted=True)

    def _mutate(self, rid: str, changed_values: dict, actor: Principal,
                deleted: bool) -> RecordVersion:
        rid = str(parse_id(rid))
        key = self._base_key(rid)
        head = self._head_of(key, None)
        if head is None or head.deleted:
            raise NotFound(rid)
        self.acl.require(actor, WRITE, head.schema, head.table)
        with self._lock:
            table_def = self.model.table(head.schema, head.table)
            normalized = self._validate_values(table_def, changed_values,
                                               require_nonnull=False)
            body = {
                "rid": rid, "schema": head.schema, "table": head.table,
                "values": normalized, "rmt": rfc3339(self.clock.now()),
                "model_version": self.model.version,
            }
            seq = self._record_op("delete" if deleted else "update", actor.name, body)
            return self._apply_update(body, seq, deleted=deleted)

    def _table_or_unknown(self, schema: str, table: str) -> TableDef:
        try:
            return self.model.table(schema, table)
        except NotFound:
            raise UnknownPath(f"{schema}:{table}")

    def _validate_values(self, table_def: TableDef, values: dict,
                         require_nonnull: bool) -> dict:
        normalized: dict[str, Any] = {}
        for raw_key, value in values.items():
            key = table_def.resolve_column(raw_key)  # UnknownColumn if absent
            col = table_def.column(key)
            if col.system:
                if table_def.kind == "extension" and key == "RID":
                    continue  # parent RID, consumed by _extension_rid
                raise TypeViolation(f"{key} is system-managed")
            normalized[key] = self._coerce(col, value)
        if require_nonnull:
            for col in table_def.user_columns():
                if not col.nullable and normalized.get(col.name) is None:
                    raise TypeViolation(f"{col.name} is not nullable")
        return normalized

    def _coerce(self, col, value):
        if value is None:
            if not col.nullable:
                raise TypeViolation(f"{col.name} is not nullable")
            return None
        vt = col.value_type
        if vt == "text":
            if not isinstance(value, str):
                raise TypeViolation(col.name)
            return value
        if vt == "integer":
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeViolation(col.name)
            return value
        if vt == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeViolation(col.name)
            return float(value)
        if vt == "boolean":
            if not isinstance(value, bool):
                raise TypeViolation(col.name)
            return value
        if vt == "timestamp":
            try:
                parse_rfc3339(value)
            except (TypeError, ValueError):
                raise TypeViolation(f"{col.name}: not an RFC 3339 UTC timestamp")
            return value
        if vt == "identifier":
            return str(parse_id(value))
        if vt == "term":
            if not isinstance(value, str):
                raise TypeViolation(col.name)
            try:
                return self.normalize_term(col.vocabulary, value)
            except NotFound:
                raise DanglingReference(f"vocabulary {col.vocabulary}")
        raise TypeViolation(col.name)  # pragma: no cover

    # -- reads ---------------------------------------------------------------

    def get(self, rid: str, actor: Principal | None = None,
            snapshot: int | None = None) -> RecordVersion:
        rid = str(parse_id(rid))
        key = self._base_key(rid)
        if actor is not None:
            self.acl.require(actor, READ, key[0], key[1])
        head = self._head_of(key, snapshot)
        if head is None or head.deleted:
            raise NotFound(rid)
        return head

    def get_row(self, schema: str, table: str, rid: str,
                snapshot: int | None = None) -> RecordVersion:
        head = self._head_of((schema, table, str(parse_id(rid))), snapshot)
        if head is None or head.deleted:
            raise NotFound(f"{schema}:{table}:{rid}")
        return head

    def resolve_rid(self, rid: str) -> tuple[str, RecordVersion, str]:
        """(table, head version, stable citation URL) for landing pages."""
        head = self.get(rid)
        citation = f"{self.base_url}/v1/catalog/entity/{head.rid}"
        return head.table, head, citation

    def query(
        self,
        path: str,
        filters: Iterable[tuple[str, str, Any]] = (),
        facets: Iterable[Any] = (),
        snapshot: int | None = None,
        actor: Principal | None = None,
    ) -> QueryResult:
        """Query an entity path like ``main:Protocol`` or
        ``main:Zebrafish/Zebrafish_Genotype`` (foreign-key or extension
        hops). Filters and facet selections apply to the final table;
        facet counts are computed over the filtered set."""
        snap = self.current_snapshot() if snapshot is None else snapshot
        model = self.model_at(snap)
        segments = [s for s in path.split("/") if s]
        if not segments:
            raise UnknownPath(path)
        schema, table_def = self._resolve_segment(model, segments[0], None, None)
        if actor is not None:
            self.acl.require(actor, READ, schema, table_def.name)
        heads = self._live_heads(schema, table_def.name, snap)
        for segment in segments[1:]:
            prev_schema, prev_table = schema, table_def
            schema, table_def = self._resolve_segment(model, segment, prev_schema, prev_table)
            if actor is not None:
                self.acl.require(actor, READ, schema, table_def.name)
            heads = self._join(prev_schema, prev_table, heads, schema, table_def, snap)

        facet_specs = [f if isinstance(f, (list, tuple)) else (f, None, None) for f in facets]
        conditions = [tuple(f) for f in filters]
        conditions += [tuple(f) for f in facet_specs if f[1] is not None]
        # resolve filter columns eagerly so unknown names fail even on
        # empty tables
        conditions = [(table_def.resolve_column(c), op, v) for c, op, v in conditions]

        rows = []
        for head in heads:
            presented = head.as_dict(table_def)
            if all(self._matches(presented, cond) for cond in conditions):
                rows.append(presented)
        rows.sort(key=lambda r: r["RID"])

        facet_counts: dict[str, dict[str, int]] = {}
        for spec in facet_specs:
            column = table_def.resolve_column(spec[0])
            counts: dict[str, int] = {}
            for row in rows:
                key = "null" if row.get(column) is None else str(row.get(column))
                counts[key] = counts.get(key, 0) + 1
            facet_counts[column] = counts
        return QueryResult(records=rows, facets=facet_counts, snapshot=snap)

    def _resolve_segment(self, model: CatalogModel, segment: str,
                         prev_schema: str | None, prev_table: TableDef | None):
        if ":" in segment:
            schema, name = segment.split(":", 1)
        elif prev_schema is None:
            schema, name = DEFAULT_SCHEMA, segment
        else:
            schema, name = prev_schema, segment
        try:
            return schema, model.table(schema, name)
        except NotFound:
            raise UnknownPath(segment)

    def _live_heads(self, schema: str, table: str, snapshot: int) -> list[RecordVersion]:
        heads = []
        for rid in self._table_rids.get((schema, table), []):
            head = self._head_of((schema, table, rid), snapshot)
            if head is not None and not head.deleted:
                heads.append(head)
        return heads

    def _join(self, prev_schema, prev_table, prev_heads, schema, table_def, snapshot):
        link = self._link_between(prev_schema, prev_table, schema, table_def)
        heads = self._live_heads(schema, table_def.name, snapshot)
        if link == "extension":
            keys = {h.rid for h in prev_heads}
            return [h for h in heads if h.rid in keys]
        fk, direction = link
        if direction == "forward":  # final table holds the FK to the previous
            keys = {self._fk_key(h, fk.ref_columns, prev_table) for h in prev_heads}
            return [h for h in heads if self._fk_key(h, fk.columns, table_def) in keys]
        keys = {self._fk_key(h, fk.columns, prev_table) for h in prev_heads}
        return [h for h in heads if self._fk_key(h, fk.ref_columns, table_def) in keys]

    def _fk_key(self, head: RecordVersion, columns, table_def: TableDef):
        presented = head.as_dict(table_def)
        return tuple(presented.get(c) for c in columns)

    def _link_between(self, prev_schema, prev_table: TableDef, schema, table_def: TableDef):
        if table_def.kind == "extension" and table_def.extends == prev_table.name:
            return "extension"
        if prev_table.kind == "extension" and prev_table.extends == table_def.name:
            return "extension"
        for fk in table_def.foreign_keys:
            if fk.ref_schema == prev_schema and fk.ref_table == prev_table.name:
                return fk, "forward"
        for fk in prev_table.foreign_keys:
            if fk.ref_schema == schema and fk.ref_table == table_def.name:
                return fk, "backward"
        raise UnknownPath(f"no foreign-key or extension link from "
                          f"{prev_table.name} to {table_def.name}")

    def _matches(self, presented: dict, cond) -> bool:
        key, op, expected = cond
        actual = presented.get(key)
        if op in ("=", "eq"):
            return actual == expected
        if op in ("!=", "ne"):
            return actual != expected
        if op in ("<", "lt"):
            return actual is not None and actual < expected
        if op in ("<=", "le"):
            return actual is not None and actual <= expected
        if op in (">", "gt"):
            return actual is not None and actual > expected
        if op in (">=", "ge"):
            return actual is not None and actual >= expected
        if op == "contains":
            return isinstance(actual, str) and str(expected) in actual
        if op == "is_null":
            return (actual is None) == bool(expected)
        raise TypeViolation(f"unknown filter op {op!r}")
