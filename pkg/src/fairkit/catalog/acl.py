"""Role-based access control at catalog and per-table granularity.

Rights are strictly ordered: model_change implies write implies read,
so a check against a right also admits every stronger one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import Forbidden

RIGHT_ORDER = {"none": 0, "read": 1, "write": 2, "model_change": 3}

READ = "read"
WRITE = "write"
MODEL_CHANGE = "model_change"


@dataclass(frozen=True)
class Principal:
    name: str
    roles: frozenset[str] = frozenset()

    @classmethod
    def of(cls, name: str, *roles: str) -> "Principal":
        return cls(name, frozenset(roles))


ANONYMOUS = Principal.of("anonymous", "reader")


@dataclass
class AclPolicy:
    """role -> right at catalog scope, plus per-table overrides keyed
    by ``schema:table``. A principal's effective right is the maximum
    granted by any of its roles at either scope."""

    catalog: dict[str, str] = field(default_factory=dict)
    tables: dict[str, dict[str, str]] = field(default_factory=dict)

    @classmethod
    def default(cls) -> "AclPolicy":
        return cls(catalog={"admin": MODEL_CHANGE, "writer": WRITE, "reader": READ})

    @classmethod
    def from_dict(cls, data: dict) -> "AclPolicy":
        return cls(
            catalog=dict(data.get("catalog", {})),
            tables={k: dict(v) for k, v in data.get("tables", {}).items()},
        )

    def to_dict(self) -> dict:
        return {"catalog": dict(self.catalog), "tables": {k: dict(v) for k, v in self.tables.items()}}

    def effective(self, principal: Principal, schema: str | None = None,
                  table: str | None = None) -> int:
        level = 0
        for role in principal.roles:
            level = max(level, RIGHT_ORDER.get(self.catalog.get(role, "none"), 0))
            if schema and table:
                grants = self.tables.get(f"{schema}:{table}", {})
                level = max(level, RIGHT_ORDER.get(grants.get(role, "none"), 0))
        return level

    def require(self, principal: Principal, right: str, schema: str | None = None,
                table: str | None = None) -> None:
        if self.effective(principal, schema, table) < RIGHT_ORDER[right]:
            scope = f"{schema}:{table}" if schema and table else "catalog"
            raise Forbidden(f"{principal.name} lacks {right} on {scope}")
