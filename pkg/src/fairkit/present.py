"""Wire-shape presenters shared by the HTTP service and the CLI.

Keeping these in one place is what makes offline (library) and online
(HTTP) outputs byte-identical for the same state.
"""

from __future__ import annotations

from .catalog import Catalog, QueryResult, RecordVersion
from .idspace import MinidRecord


def id_record(record: MinidRecord) -> dict:
    return record.to_dict()


def catalog_record(catalog: Catalog, version: RecordVersion) -> dict:
    table_def = catalog.model_at(None).table(version.schema, version.table)
    out = {"schema": version.schema, "table": version.table}
    out.update(version.as_dict(table_def))
    return out


def query_result(result: QueryResult, limit: int | None = None,
                 cursor: str | None = None) -> dict:
    records = result.records
    if cursor:
        records = [r for r in records if r["RID"] > cursor]
    next_cursor = None
    if limit is not None and len(records) > limit:
        records = records[:limit]
        next_cursor = records[-1]["RID"]
    return {
        "records": records,
        "facets": result.facets,
        "snapshot": result.snapshot,
        "next_cursor": next_cursor,
    }


def resolution(catalog: Catalog, rid: str) -> dict:
    table, head, citation = catalog.resolve_rid(rid)
    return {
        "rid": head.rid,
        "table": table,
        "citation": citation,
        "record": catalog_record(catalog, head),
    }
