"""Evolvable entity-relationship model for the metadata catalog.

Model values are immutable; every change produces a new model with a
bumped version. Renames accumulate aliases instead of rewriting
anything, so queries written before a change keep resolving after it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..errors import DanglingReference, DuplicateName, NotFound, TypeViolation, UnknownColumn

VALUE_TYPES = ("text", "integer", "float", "timestamp", "boolean", "identifier", "term")
TABLE_KINDS = ("entity", "asset", "vocabulary", "extension")

SYSTEM_COLUMN_NAMES = ("RID", "RCT", "RMT")


@dataclass(frozen=True)
class ColumnDef:
    name: str
    value_type: str = "text"
    nullable: bool = True
    vocabulary: str | None = None  # term columns only
    system: bool = False

    def __post_init__(self):
        if self.value_type not in VALUE_TYPES:
            raise TypeViolation(f"{self.name}: unknown value type {self.value_type!r}")
        if self.value_type == "term" and not self.vocabulary:
            raise DanglingReference(f"{self.name}: term column needs a vocabulary")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value_type": self.value_type,
            "nullable": self.nullable,
            "vocabulary": self.vocabulary,
            "system": self.system,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ColumnDef":
        return cls(
            name=data["name"],
            value_type=data.get("value_type", "text"),
            nullable=data.get("nullable", True),
            vocabulary=data.get("vocabulary"),
            system=data.get("system", False),
        )


@dataclass(frozen=True)
class ForeignKey:
    columns: tuple[str, ...]
    ref_schema: str
    ref_table: str
    ref_columns: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "columns": list(self.columns),
            "ref_schema": self.ref_schema,
            "ref_table": self.ref_table,
            "ref_columns": list(self.ref_columns),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ForeignKey":
        return cls(
            tuple(data["columns"]), data["ref_schema"], data["ref_table"],
            tuple(data["ref_columns"]),
        )


@dataclass(frozen=True)
class VocabularyTerm:
    canonical: str
    synonyms: tuple[str, ...] = ()
    description: str = ""

    def to_dict(self) -> dict:
        return {
            "canonical": self.canonical,
            "synonyms": list(self.synonyms),
            "description": self.description,
        }


def _system_columns() -> tuple[ColumnDef, ...]:
    return (
        ColumnDef("RID", "identifier", nullable=False, system=True),
        ColumnDef("RCT", "timestamp", nullable=False, system=True),
        ColumnDef("RMT", "timestamp", nullable=False, system=True),
    )


def _asset_columns() -> tuple[ColumnDef, ...]:
    return (
        ColumnDef("url", "text", nullable=False),
        ColumnDef("checksum", "text", nullable=False),
        ColumnDef("length", "integer", nullable=False),
    )


@dataclass(frozen=True)
class TableDef:
    name: str
    kind: str = "entity"
    columns: tuple[ColumnDef, ...] = ()
    keys: tuple[tuple[str, ...], ...] = ()
    foreign_keys: tuple[ForeignKey, ...] = ()
    extends: str | None = None  # extension kind only
    terms: tuple[VocabularyTerm, ...] = ()  # vocabulary kind only
    # old column name -> current column name, accumulated by renames
    aliases: tuple[tuple[str, str], ...] = ()

    def column(self, name: str) -> ColumnDef:
        resolved = self.resolve_column(name)
        for col in self.columns:
            if col.name == resolved:
                return col
        raise UnknownColumn(f"{self.name}.{name}")

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def resolve_column(self, name: str) -> str:
        """Follow rename aliases to the current column name."""
        if self.has_column(name):
            return name
        target = dict(self.aliases).get(name)
        if target is not None:
            return target
        raise UnknownColumn(f"{self.name}.{name}")

    def user_columns(self) -> tuple[ColumnDef, ...]:
        return tuple(c for c in self.columns if not c.system)

    def term(self, canonical: str) -> VocabularyTerm:
        for t in self.terms:
            if t.canonical == canonical:
                return t
        raise NotFound(f"term {canonical!r} in vocabulary {self.name}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "columns": [c.to_dict() for c in self.columns],
            "keys": [list(k) for k in self.keys],
            "foreign_keys": [fk.to_dict() for fk in self.foreign_keys],
            "extends": self.extends,
            "terms": [t.to_dict() for t in self.terms],
            "aliases": [list(a) for a in self.aliases],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TableDef":
        return cls(
            name=data["name"],
            kind=data.get("kind", "entity"),
            columns=tuple(ColumnDef.from_dict(c) for c in data.get("columns", [])),
            keys=tuple(tuple(k) for k in data.get("keys", [])),
            foreign_keys=tuple(ForeignKey.from_dict(f) for f in data.get("foreign_keys", [])),
            extends=data.get("extends"),
            terms=tuple(
                VocabularyTerm(t["canonical"], tuple(t.get("synonyms", ())),
                               t.get("description", ""))
                for t in data.get("terms", [])
            ),
            aliases=tuple(tuple(a) for a in data.get("aliases", [])),
        )


@dataclass(frozen=True)
class CatalogModel:
    schemas: tuple[tuple[str, tuple[TableDef, ...]], ...] = ()
    version: int = 0

    def schema(self, name: str) -> dict[str, TableDef]:
        for schema_name, tables in self.schemas:
            if schema_name == name:
                return {t.name: t for t in tables}
        return {}

    def table(self, schema: str, name: str) -> TableDef:
        table = self.schema(schema).get(name)
        if table is None:
            raise NotFound(f"table {schema}:{name}")
        return table

    def has_table(self, schema: str, name: str) -> bool:
        return name in self.schema(schema)

    def tables(self) -> list[tuple[str, TableDef]]:
        return [(s, t) for s, tabs in self.schemas for t in tabs]

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "schemas": {
                schema: {t.name: t.to_dict() for t in tables}
                for schema, tables in self.schemas
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CatalogModel":
        schemas = tuple(
            (schema, tuple(TableDef.from_dict(t) for t in tables.values()))
            for schema, tables in data.get("schemas", {}).items()
        )
        return cls(schemas=schemas, version=data.get("version", 0))

    # -- evolution -------------------------------------------------------

    def _with_table(self, schema: str, table: TableDef) -> "CatalogModel":
        out = []
        placed = False
        for schema_name, tables in self.schemas:
            if schema_name != schema:
                out.append((schema_name, tables))
                continue
            placed = True
            if any(t.name == table.name for t in tables):
                tables = tuple(table if t.name == table.name else t for t in tables)
            else:
                tables = tables + (table,)
            out.append((schema_name, tables))
        if not placed:
            out.append((schema, (table,)))
        return replace(self, schemas=tuple(out))

    def apply_change(self, change: dict) -> "CatalogModel":
        """Apply one validated model change; bumps version by exactly one."""
        kind = change.get("kind")
        handler = _CHANGE_HANDLERS.get(kind)
        if handler is None:
            raise TypeViolation(f"unknown model change kind {kind!r}")
        changed = handler(self, change)
        return replace(changed, version=self.version + 1)


def _columns_from_change(items) -> tuple[ColumnDef, ...]:
    return tuple(ColumnDef.from_dict(c) for c in items or [])


def _check_vocabulary_refs(model: CatalogModel, schema: str, columns) -> None:
    for col in columns:
        if col.value_type != "term":
            continue
        vocab = _find_vocabulary(model, schema, col.vocabulary)
        if vocab is None:
            raise DanglingReference(f"column {col.name}: vocabulary {col.vocabulary!r} not found")


def _find_vocabulary(model: CatalogModel, schema: str, name: str) -> TableDef | None:
    table = model.schema(schema).get(name)
    if table is not None and table.kind == "vocabulary":
        return table
    for _, candidate in model.tables():
        if candidate.name == name and candidate.kind == "vocabulary":
            return candidate
    return None


def _add_table(model: CatalogModel, change: dict) -> CatalogModel:
    schema, name = change["schema"], change["name"]
    kind = change.get("table_kind", "entity")
    if kind not in ("entity", "asset"):
        raise TypeViolation(f"add_table cannot create kind {kind!r}")
    if model.has_table(schema, name):
        raise DuplicateName(f"{schema}:{name}")
    columns = _columns_from_change(change.get("columns"))
    _check_names_unique(columns)
    _check_vocabulary_refs(model, schema, columns)
    base = _system_columns() + (_asset_columns() if kind == "asset" else ())
    fks = tuple(ForeignKey.from_dict(f) for f in change.get("foreign_keys", []))
    table = TableDef(name=name, kind=kind, columns=base + columns,
                     keys=tuple(tuple(k) for k in change.get("keys", [])))
    model = model._with_table(schema, table)
    for fk in fks:
        model = _add_foreign_key(
            model,
            {"schema": schema, "table": name, **fk.to_dict(), "kind": "add_foreign_key"},
        )
    return model


def _check_names_unique(columns) -> None:
    seen = set(SYSTEM_COLUMN_NAMES)
    for col in columns:
        if col.name in seen:
            raise DuplicateName(f"column {col.name}")
        seen.add(col.name)


def _add_column(model: CatalogModel, change: dict) -> CatalogModel:
    schema, name = change["schema"], change["table"]
    table = model.table(schema, name)
    col = ColumnDef.from_dict(change["column"])
    if table.has_column(col.name) or col.name in dict(table.aliases):
        raise DuplicateName(f"{name}.{col.name}")
    _check_vocabulary_refs(model, schema, (col,))
    return model._with_table(schema, replace(table, columns=table.columns + (col,)))


def _add_vocabulary(model: CatalogModel, change: dict) -> CatalogModel:
    schema, name = change["schema"], change["name"]
    if model.has_table(schema, name):
        raise DuplicateName(f"{schema}:{name}")
    table = TableDef(
        name=name,
        kind="vocabulary",
        columns=_system_columns() + (
            ColumnDef("canonical", "text", nullable=False),
            ColumnDef("description", "text"),
        ),
    )
    return model._with_table(schema, table)


def _add_extension_table(model: CatalogModel, change: dict) -> CatalogModel:
    schema, name, extends = change["schema"], change["name"], change["extends"]
    if model.has_table(schema, name):
        raise DuplicateName(f"{schema}:{name}")
    if not model.has_table(schema, extends):
        raise DanglingReference(f"extension parent {schema}:{extends}")
    columns = _columns_from_change(change.get("columns"))
    _check_names_unique(columns)
    _check_vocabulary_refs(model, schema, columns)
    # shares the parent's RID as primary key: one-to-one augmentation
    table = TableDef(name=name, kind="extension", extends=extends,
                     columns=_system_columns() + columns, keys=(("RID",),))
    return model._with_table(schema, table)


def _add_foreign_key(model: CatalogModel, change: dict) -> CatalogModel:
    schema, name = change["schema"], change["table"]
    table = model.table(schema, name)
    fk = ForeignKey(
        tuple(change["columns"]), change["ref_schema"], change["ref_table"],
        tuple(change["ref_columns"]),
    )
    for col in fk.columns:
        if not table.has_column(col):
            raise DanglingReference(f"{name}.{col}")
    try:
        remote = model.table(fk.ref_schema, fk.ref_table)
    except NotFound:
        raise DanglingReference(f"{fk.ref_schema}:{fk.ref_table}")
    for col in fk.ref_columns:
        if not remote.has_column(col):
            raise DanglingReference(f"{fk.ref_table}.{col}")
    return model._with_table(schema, replace(table, foreign_keys=table.foreign_keys + (fk,)))


def _vocabulary_for_change(model: CatalogModel, change: dict) -> tuple[str, TableDef]:
    schema, name = change["schema"], change["vocabulary"]
    table = model.schema(schema).get(name)
    if table is None or table.kind != "vocabulary":
        raise DanglingReference(f"vocabulary {schema}:{name}")
    return schema, table


def _add_term(model: CatalogModel, change: dict) -> CatalogModel:
    schema, table = _vocabulary_for_change(model, change)
    canonical = change["canonical"]
    if any(t.canonical == canonical for t in table.terms):
        raise DuplicateName(f"term {canonical}")
    if any(canonical in t.synonyms for t in table.terms):
        raise DuplicateName(f"term {canonical} is already a synonym")
    term = VocabularyTerm(canonical, description=change.get("description", ""))
    return model._with_table(schema, replace(table, terms=table.terms + (term,)))


def _add_synonym(model: CatalogModel, change: dict) -> CatalogModel:
    schema, table = _vocabulary_for_change(model, change)
    canonical, synonym = change["canonical"], change["synonym"]
    if any(t.canonical == synonym for t in table.terms):
        raise DuplicateName(f"synonym {synonym} is already a canonical term")
    if any(synonym in t.synonyms for t in table.terms):
        raise DuplicateName(f"synonym {synonym} already maps to a term")
    terms = []
    found = False
    for t in table.terms:
        if t.canonical == canonical:
            terms.append(replace(t, synonyms=t.synonyms + (synonym,)))
            found = True
        else:
            terms.append(t)
    if not found:
        raise DanglingReference(f"term {canonical} in vocabulary {table.name}")
    return model._with_table(schema, replace(table, terms=tuple(terms)))


def _rename_column(model: CatalogModel, change: dict) -> CatalogModel:
    schema, name = change["schema"], change["table"]
    table = model.table(schema, name)
    old, new = change["old"], change["new"]
    if not table.has_column(old):
        raise DanglingReference(f"{name}.{old}")
    if table.column(old).system:
        raise TypeViolation(f"{old} is a system column")
    if table.has_column(new) or new in dict(table.aliases):
        raise DuplicateName(f"{name}.{new}")
    columns = tuple(replace(c, name=new) if c.name == old else c for c in table.columns)
    # old name becomes a permanent alias; earlier aliases follow through
    aliases = [(a, new if b == old else b) for a, b in table.aliases]
    aliases.append((old, new))
    return model._with_table(schema, replace(table, columns=columns, aliases=tuple(aliases)))


_CHANGE_HANDLERS = {
    "add_table": _add_table,
    "add_column": _add_column,
    "add_vocabulary": _add_vocabulary,
    "add_extension_table": _add_extension_table,
    "add_foreign_key": _add_foreign_key,
    "add_term": _add_term,
    "add_synonym": _add_synonym,
    "rename_column": _rename_column,
}

CHANGE_KINDS = tuple(_CHANGE_HANDLERS)
