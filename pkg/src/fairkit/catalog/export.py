"""Extract-translate-load between the catalog and bags.

``export_dataset`` carves a foreign-key closure of records out of the
catalog into a holey bag: the records travel as a table-schema metadata
block (descriptor plus one delimited file per table), asset bytes
travel by reference as fetch entries, and the whole bag is bound to a
freshly minted identifier. ``import_dataset`` is the inverse, up to
RID remapping.
"""

from __future__ import annotations

import csv
import io
import urllib.parse
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from ..bag import Bag, FetchEntry, ManifestEntry, MetadataBlock, read_bag, write_bag
from ..bag.build import refresh_tag_manifests
from ..canonical import rfc3339
from ..errors import TypeViolation, UnreachableAsset
from ..idspace import MinidRecord, Registry, bind_bag
from .acl import Principal
from .model import TableDef
from .store import Catalog, RecordVersion

_CSV_SYSTEM = ("RID", "RCT", "RMT")


@dataclass
class ExportResult:
    bag: Bag
    record: MinidRecord
    path: Path
    rids: tuple[str, ...]


def export_dataset(
    catalog: Catalog,
    registry: Registry,
    roots: Iterable[str],
    dest: Path,
    actor: Principal,
    depth: int | str = 1,
    creator: str | None = None,
    namespace: str = "MINID",
    title: str | None = None,
) -> ExportResult:
    """Export the records reachable from *roots* within *depth*
    foreign-key/extension hops (``"all"`` for the full closure) as a
    holey bag at *dest*, bound to a new identifier."""
    heads = _closure(catalog, roots, depth, actor)
    by_table: dict[tuple[str, str], list[RecordVersion]] = {}
    for head in heads:
        by_table.setdefault((head.schema, head.table), []).append(head)

    model = catalog.model
    descriptor_tables = []
    data_files: dict[str, str] = {}
    fetch_entries: list[FetchEntry] = []
    manifest_entries: list[ManifestEntry] = []
    vocab_names: set[tuple[str, str]] = set()

    for (schema, table), rows in sorted(by_table.items()):
        table_def = model.table(schema, table)
        descriptor_tables.append(_describe_table(schema, table_def))
        for col in table_def.user_columns():
            if col.value_type == "term":
                vocab_names.add((schema, col.vocabulary))
        data_files[table] = _render_csv(table_def, sorted(rows, key=lambda r: r.rid))
        if table_def.kind == "asset":
            for row in sorted(rows, key=lambda r: r.rid):
                fetch, manifest = _asset_entries(row, table_def)
                fetch_entries.append(fetch)
                manifest_entries.append(manifest)

    vocabularies = []
    for schema, name in sorted(vocab_names):
        vocab = model.table(schema, name)
        vocabularies.append(
            {"schema": schema, "name": name, "terms": [t.to_dict() for t in vocab.terms]}
        )

    descriptor = {
        "profile": "fairkit-table-schema",
        "exported": rfc3339(catalog.clock.now()),
        "tables": descriptor_tables,
        "vocabularies": vocabularies,
        "data": data_files,
    }
    block = MetadataBlock("table-schema", descriptor)

    bag = Bag(
        manifests=(("sha256", tuple(sorted(manifest_entries, key=lambda e: e.path))),),
        bag_info=(
            ("External-Description", title or "fairkit dataset export"),
            ("Bagging-Date", rfc3339(catalog.clock.now())[:10]),
        ),
        fetch=tuple(sorted(fetch_entries, key=lambda f: f.path)),
        metadata=(block,),
    )
    bag = bag.with_info("Payload-Oxum", bag.payload_oxum())
    bag = refresh_tag_manifests(bag)

    dest = Path(dest)
    write_bag(bag, dest)
    record = bind_bag(
        registry, bag, creator or actor.name,
        locations=[dest.resolve().as_uri()],
        namespace=namespace, title=title,
    )
    return ExportResult(bag=bag, record=record, path=dest,
                        rids=tuple(sorted(h.rid for h in heads)))


def _closure(catalog: Catalog, roots: Iterable[str], depth: int | str,
             actor: Principal) -> list[RecordVersion]:
    max_hops = 10_000 if depth == "all" else int(depth)
    frontier = [catalog.get(rid, actor) for rid in roots]
    seen: dict[tuple[str, str, str], RecordVersion] = {
        (h.schema, h.table, h.rid): h for h in frontier
    }
    for _ in range(max_hops):
        next_frontier = []
        for head in frontier:
            for neighbor in _neighbors(catalog, head):
                key = (neighbor.schema, neighbor.table, neighbor.rid)
                if key not in seen:
                    seen[key] = neighbor
                    next_frontier.append(neighbor)
        if not next_frontier:
            break
        frontier = next_frontier
    return list(seen.values())


def _neighbors(catalog: Catalog, head: RecordVersion) -> list[RecordVersion]:
    model = catalog.model
    table_def = model.table(head.schema, head.table)
    presented = head.as_dict(table_def)
    out: list[RecordVersion] = []

    # outbound foreign keys
    for fk in table_def.foreign_keys:
        values = tuple(presented.get(c) for c in fk.columns)
        if any(v is None for v in values):
            continue
        remote = model.table(fk.ref_schema, fk.ref_table)
        for candidate in catalog._live_heads(fk.ref_schema, remote.name,
                                             catalog.current_snapshot()):
            remote_key = tuple(candidate.as_dict(remote).get(c) for c in fk.ref_columns)
            if remote_key == values:
                out.append(candidate)

    # inbound foreign keys and extension rows
    for schema, other in model.tables():
        if other.kind == "extension" and other.extends == head.table and schema == head.schema:
            try:
                out.append(catalog.get_row(schema, other.name, head.rid))
            except Exception:
                pass
        for fk in other.foreign_keys:
            if (fk.ref_schema, fk.ref_table) != (head.schema, head.table):
                continue
            target = tuple(presented.get(c) for c in fk.ref_columns)
            for candidate in catalog._live_heads(schema, other.name,
                                                 catalog.current_snapshot()):
                local = tuple(candidate.as_dict(other).get(c) for c in fk.columns)
                if local == target:
                    out.append(candidate)
    if table_def.kind == "extension" and table_def.extends:
        try:
            out.append(catalog.get_row(head.schema, table_def.extends, head.rid))
        except Exception:
            pass
    return out


def _describe_table(schema: str, table_def: TableDef) -> dict:
    return {
        "schema": schema,
        "name": table_def.name,
        "kind": table_def.kind,
        "extends": table_def.extends,
        "columns": [c.to_dict() for c in table_def.user_columns()],
        "foreign_keys": [fk.to_dict() for fk in table_def.foreign_keys],
        "path": f"metadata/data/{table_def.name}.csv",
    }


def _render_csv(table_def: TableDef, rows: list[RecordVersion]) -> str:
    columns = [c.name for c in table_def.user_columns()]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(_CSV_SYSTEM) + columns)
    for row in rows:
        presented = row.as_dict(table_def)
        writer.writerow(
            [presented["RID"], presented["RCT"], presented["RMT"]]
            + [_cell(presented.get(c)) for c in columns]
        )
    return buf.getvalue()


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _parse_cell(raw: str, value_type: str):
    if raw == "":
        return None
    if value_type == "integer":
        return int(raw)
    if value_type == "float":
        return float(raw)
    if value_type == "boolean":
        return raw == "true"
    return raw


def _asset_entries(row: RecordVersion, table_def: TableDef) -> tuple[FetchEntry, ManifestEntry]:
    presented = row.as_dict(table_def)
    url, checksum, length = presented.get("url"), presented.get("checksum"), presented.get("length")
    if not url or not checksum or not isinstance(length, int):
        raise UnreachableAsset(f"{row.rid}: asset row lacks url/checksum/length")
    if len(checksum) != 64:
        raise UnreachableAsset(f"{row.rid}: checksum is not a sha256 digest")
    if url.startswith("file://"):
        local = Path(urllib.parse.unquote(urllib.parse.urlparse(url).path))
        if not local.is_file():
            raise UnreachableAsset(f"{row.rid}: {url} does not exist")
    name = Path(urllib.parse.urlparse(url).path).name or "asset"
    path = f"data/assets/{row.rid}/{name}"
    return (
        FetchEntry(url=url, length=length, path=path),
        ManifestEntry("sha256", checksum, path),
    )


def import_dataset(catalog: Catalog, location: Path | Bag, actor: Principal) -> dict[str, str]:
    """Load an exported dataset bag into *catalog*, recreating missing
    tables and vocabularies and remapping record IDs. Returns the
    old-RID -> new-RID mapping."""
    bag = location if isinstance(location, Bag) else read_bag(location)
    block = bag.metadata_block("table-schema")
    if block is None:
        raise TypeViolation("bag carries no table-schema metadata block")
    descriptor = block.body

    for vocab in descriptor.get("vocabularies", []):
        _ensure_vocabulary(catalog, vocab, actor)

    tables = descriptor.get("tables", [])
    base_tables = [t for t in tables if t["kind"] != "extension"]
    extension_tables = [t for t in tables if t["kind"] == "extension"]
    for desc in base_tables + extension_tables:
        _ensure_table(catalog, desc, actor)

    rid_map: dict[str, str] = {}
    deferred: list[tuple[str, dict, list[str]]] = []  # (new rid, values, id columns)
    for desc in base_tables:
        rows = _read_rows(descriptor, desc)
        id_columns = [c["name"] for c in desc["columns"] if c["value_type"] == "identifier"]
        for row in rows:
            old_rid = row.pop("RID")
            row.pop("RCT", None), row.pop("RMT", None)
            inserted = catalog.insert(desc["schema"], desc["name"], row, actor)
            rid_map[old_rid] = inserted.rid
            if id_columns:
                deferred.append((inserted.rid, row, id_columns))

    # second pass: remap identifier values that pointed at exported rids
    for new_rid, values, id_columns in deferred:
        changed = {}
        for column in id_columns:
            old = values.get(column)
            if old in rid_map:
                changed[column] = rid_map[old]
        if changed:
            catalog.update(new_rid, changed, actor)

    for desc in extension_tables:
        for row in _read_rows(descriptor, desc):
            old_rid = row.pop("RID")
            row.pop("RCT", None), row.pop("RMT", None)
            parent = rid_map.get(old_rid, old_rid)
            inserted = catalog.insert(desc["schema"], desc["name"],
                                      {**row, "RID": parent}, actor)
            rid_map.setdefault(old_rid, inserted.rid)
    return rid_map


def _read_rows(descriptor: dict, desc: dict) -> list[dict]:
    csv_text = descriptor.get("data", {}).get(desc["name"], "")
    if not csv_text:
        return []
    reader = csv.reader(io.StringIO(csv_text))
    header = next(reader)
    types = {c["name"]: c["value_type"] for c in desc["columns"]}
    rows = []
    for raw in reader:
        row = {}
        for column, cell in zip(header, raw):
            if column in ("RCT", "RMT"):
                continue
            if column == "RID":
                row["RID"] = cell
            else:
                row[column] = _parse_cell(cell, types.get(column, "text"))
        rows.append(row)
    return rows


def _ensure_vocabulary(catalog: Catalog, vocab: dict, actor: Principal) -> None:
    schema, name = vocab["schema"], vocab["name"]
    if not catalog.model.has_table(schema, name):
        catalog.apply_model_change(
            {"kind": "add_vocabulary", "schema": schema, "name": name}, actor
        )
    existing = catalog.model.table(schema, name)
    have = {t.canonical for t in existing.terms}
    for term in vocab.get("terms", []):
        if term["canonical"] not in have:
            catalog.apply_model_change(
                {"kind": "add_term", "schema": schema, "vocabulary": name,
                 "canonical": term["canonical"],
                 "description": term.get("description", "")}, actor,
            )
        current = {s for t in catalog.model.table(schema, name).terms
                   if t.canonical == term["canonical"] for s in t.synonyms}
        for synonym in term.get("synonyms", []):
            if synonym not in current:
                catalog.apply_model_change(
                    {"kind": "add_synonym", "schema": schema, "vocabulary": name,
                     "canonical": term["canonical"], "synonym": synonym}, actor,
                )


def _ensure_table(catalog: Catalog, desc: dict, actor: Principal) -> None:
    schema, name = desc["schema"], desc["name"]
    if catalog.model.has_table(schema, name):
        return
    columns = [c for c in desc["columns"]
               if c["name"] not in ("url", "checksum", "length") or desc["kind"] != "asset"]
    if desc["kind"] == "extension":
        catalog.apply_model_change(
            {"kind": "add_extension_table", "schema": schema, "name": name,
             "extends": desc["extends"], "columns": columns}, actor,
        )
        return
    catalog.apply_model_change(
        {"kind": "add_table", "schema": schema, "name": name,
         "table_kind": desc["kind"], "columns": columns}, actor,
    )
    for fk in desc.get("foreign_keys", []):
        if catalog.model.has_table(fk["ref_schema"], fk["ref_table"]):
            catalog.apply_model_change(
                {"kind": "add_foreign_key", "schema": schema, "table": name, **fk}, actor
            )
