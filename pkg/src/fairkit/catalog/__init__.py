"""Versioned, evolvable entity-relationship metadata catalog."""

from .acl import ANONYMOUS, MODEL_CHANGE, READ, WRITE, AclPolicy, Principal
from .export import ExportResult, export_dataset, import_dataset
from .model import (
    CHANGE_KINDS,
    CatalogModel,
    ColumnDef,
    ForeignKey,
    TableDef,
    VocabularyTerm,
)
from .store import DEFAULT_SCHEMA, Catalog, QueryResult, RecordVersion

__all__ = [
    "ANONYMOUS",
    "AclPolicy",
    "CHANGE_KINDS",
    "Catalog",
    "CatalogModel",
    "ColumnDef",
    "DEFAULT_SCHEMA",
    "ExportResult",
    "ForeignKey",
    "MODEL_CHANGE",
    "Principal",
    "QueryResult",
    "READ",
    "RecordVersion",
    "TableDef",
    "VocabularyTerm",
    "WRITE",
    "export_dataset",
    "import_dataset",
]
