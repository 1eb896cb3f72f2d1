"""Schema data model and the partition / extraction / merge operations.

Schemas are immutable values. ``merge_schemas`` is a join: idempotent,
commutative and associative up to column order, with the empty schema as
identity, so repeated exchange between agents can only grow what anyone
knows. Identifier comparison is case-insensitive throughout; the original
spelling is kept for display and serialization.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

from .errors import InvalidSelectionError, MergeConflictError, PartitionError


def norm(name: str) -> str:
    """Case-insensitive identifier key."""
    return name.casefold()


class ColumnType(enum.Enum):
    TEXT = "text"
    NUMBER = "number"
    TIME = "time"
    BOOLEAN = "boolean"
    OTHER = "other"

    @classmethod
    def coerce(cls, value: Union[str, "ColumnType", None]) -> "ColumnType":
        """Map loose benchmark type strings onto the enum."""
        if isinstance(value, cls):
            return value
        if not value:
            return cls.OTHER
        v = value.strip().lower()
        if v in ("text", "varchar", "char", "string"):
            return cls.TEXT
        if v in ("number", "int", "integer", "real", "float", "numeric", "decimal"):
            return cls.NUMBER
        if v in ("time", "date", "datetime", "timestamp", "year"):
            return cls.TIME
        if v in ("boolean", "bool"):
            return cls.BOOLEAN
        return cls.OTHER


@dataclass(frozen=True, eq=False)
class ColumnRef:
    """A (table, column) reference. Equality ignores case and column type."""

    table_name: str
    column_name: str
    column_type: ColumnType = ColumnType.OTHER

    def __post_init__(self):
        if not self.table_name or not self.column_name:
            raise ValueError("column reference needs non-empty table and column names")

    @property
    def key(self) -> tuple[str, str]:
        return (norm(self.table_name), norm(self.column_name))

    def __eq__(self, other) -> bool:
        return isinstance(other, ColumnRef) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"{self.table_name}.{self.column_name}"


@dataclass(frozen=True)
class TableDef:
    """A table: ordered columns plus the subset forming its primary key."""

    name: str
    columns: tuple[ColumnRef, ...]
    primary_key: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.name:
            raise ValueError("table name must be non-empty")
        seen = set()
        for col in self.columns:
            if norm(col.column_name) in seen:
                raise ValueError(f"duplicate column {col.column_name!r} in table {self.name!r}")
            seen.add(norm(col.column_name))
            if norm(col.table_name) != norm(self.name):
                raise ValueError(
                    f"column {col!r} belongs to {col.table_name!r}, not {self.name!r}"
                )
        for pk in self.primary_key:
            if norm(pk) not in seen:
                raise ValueError(f"primary key {pk!r} is not a column of {self.name!r}")

    @classmethod
    def of(
        cls,
        name: str,
        columns: Sequence[Union[str, tuple[str, Union[str, ColumnType]]]],
        primary_key: Sequence[str] = (),
    ) -> "TableDef":
        """Build from ``"col"`` or ``("col", type)`` entries."""
        refs = []
        for c in columns:
            if isinstance(c, str):
                refs.append(ColumnRef(name, c))
            else:
                refs.append(ColumnRef(name, c[0], ColumnType.coerce(c[1])))
        return cls(name, tuple(refs), tuple(primary_key))

    @cached_property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.column_name for c in self.columns)

    @cached_property
    def _by_name(self) -> dict[str, ColumnRef]:
        return {norm(c.column_name): c for c in self.columns}

    def column(self, name: str) -> ColumnRef | None:
        return self._by_name.get(norm(name))

    def has_column(self, name: str) -> bool:
        return norm(name) in self._by_name


@dataclass(frozen=True)
class ForeignKey:
    """Directed key relationship between two column references."""

    from_ref: ColumnRef
    to_ref: ColumnRef

    def resolves_in(self, schema: "Schema") -> bool:
        return schema.contains(self.from_ref) and schema.contains(self.to_ref)


@dataclass(frozen=True)
class Schema:
    """A database schema fragment; the value agents merge and exchange.

    The empty schema (no tables, no keys) is a legal value and acts as the
    merge identity regardless of db_id.
    """

    db_id: str
    tables: tuple[TableDef, ...] = ()
    foreign_keys: tuple[ForeignKey, ...] = ()

    def __post_init__(self):
        seen = set()
        for t in self.tables:
            if norm(t.name) in seen:
                raise ValueError(f"duplicate table name {t.name!r}")
            seen.add(norm(t.name))
        for fk in self.foreign_keys:
            if not fk.resolves_in(self):
                raise ValueError(f"foreign key {fk.from_ref!r} -> {fk.to_ref!r} does not resolve")

    @classmethod
    def empty(cls, db_id: str = "") -> "Schema":
        return cls(db_id)

    @property
    def is_empty(self) -> bool:
        return not self.tables and not self.foreign_keys

    @cached_property
    def _by_name(self) -> dict[str, TableDef]:
        return {norm(t.name): t for t in self.tables}

    @cached_property
    def table_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.tables)

    def table(self, name: str) -> TableDef | None:
        return self._by_name.get(norm(name))

    def has_table(self, name: str) -> bool:
        return norm(name) in self._by_name

    def contains(self, ref: Union[ColumnRef, str]) -> bool:
        """Case-insensitive membership test for a table name or column ref."""
        if isinstance(ref, str):
            return self.has_table(ref)
        t = self.table(ref.table_name)
        return t is not None and t.has_column(ref.column_name)

    def all_column_refs(self) -> tuple[ColumnRef, ...]:
        return tuple(c for t in self.tables for c in t.columns)

    def equivalent(self, other: "Schema") -> bool:
        """Structural equality up to column/table order and display case.

        Column types are display metadata and do not participate, mirroring
        how merge keeps the first-seen spelling of a name.
        """
        if self.is_empty and other.is_empty:
            return True
        if norm(self.db_id) != norm(other.db_id):
            return False
        if set(self._by_name) != set(other._by_name):
            return False
        for key, mine in self._by_name.items():
            theirs = other._by_name[key]
            if {norm(c.column_name) for c in mine.columns} != {
                norm(c.column_name) for c in theirs.columns
            }:
                return False
            if {norm(p) for p in mine.primary_key} != {norm(p) for p in theirs.primary_key}:
                return False
        return set(self.foreign_keys) == set(other.foreign_keys)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "db_id": self.db_id,
            "tables": [
                {
                    "name": t.name,
                    "columns": [
                        {"name": c.column_name, "type": c.column_type.value} for c in t.columns
                    ],
                    "primary_key": list(t.primary_key),
                }
                for t in self.tables
            ],
            "foreign_keys": [
                [
                    fk.from_ref.table_name,
                    fk.from_ref.column_name,
                    fk.to_ref.table_name,
                    fk.to_ref.column_name,
                ]
                for fk in self.foreign_keys
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Schema":
        tables = tuple(
            TableDef(
                name=t["name"],
                columns=tuple(
                    ColumnRef(t["name"], c["name"], ColumnType.coerce(c.get("type")))
                    for c in t["columns"]
                ),
                primary_key=tuple(t.get("primary_key", ())),
            )
            for t in data["tables"]
        )
        fks = tuple(
            ForeignKey(ColumnRef(ft, fc), ColumnRef(tt, tc))
            for ft, fc, tt, tc in data.get("foreign_keys", ())
        )
        return cls(db_id=data["db_id"], tables=tables, foreign_keys=fks)

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "Schema":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SchemaSelection:
    """Which tables/columns an agent judged relevant, before retention padding.

    ``entries`` maps table name to an ordered tuple of column names; an empty
    tuple selects the table itself and lets retention decide the columns.
    """

    entries: tuple[tuple[str, tuple[str, ...]], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[str, Iterable[str]]) -> "SchemaSelection":
        return cls(tuple((t, tuple(cols)) for t, cols in mapping.items()))

    @property
    def is_empty(self) -> bool:
        return not self.entries

    def as_dict(self) -> dict[str, tuple[str, ...]]:
        return {t: cols for t, cols in self.entries}

    def validate_against(self, schema: Schema) -> None:
        for tname, cols in self.entries:
            table = schema.table(tname)
            if table is None:
                raise InvalidSelectionError(f"selection names unknown table {tname!r}")
            for c in cols:
                if not table.has_column(c):
                    raise InvalidSelectionError(
                        f"selection names unknown column {tname}.{c}"
                    )

    def to_pairs(self) -> list:
        """Order-preserving serialization (selection order drives padding)."""
        return [[t, list(cols)] for t, cols in self.entries]

    @classmethod
    def from_pairs(cls, pairs) -> "SchemaSelection":
        if isinstance(pairs, Mapping):
            return cls.of(pairs)
        return cls(tuple((t, tuple(cols)) for t, cols in pairs))

    def to_dict(self) -> dict:
        return {t: list(cols) for t, cols in self.entries}


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def merge_schemas(a: Schema, b: Schema) -> Schema:
    """Join two schema fragments.

    Tables present on one side are kept as-is; tables present on both keep
    the union of their columns (a's order first, then b's novel columns).
    Foreign keys are unioned and kept only if both endpoints resolve in the
    result. The empty schema is the identity.
    """
    if a.is_empty:
        return b
    if b.is_empty:
        return a
    if norm(a.db_id) != norm(b.db_id):
        raise MergeConflictError(f"cannot merge schemas of {a.db_id!r} and {b.db_id!r}")

    tables: list[TableDef] = []
    for ta in a.tables:
        tb = b.table(ta.name)
        if tb is None:
            tables.append(ta)
            continue
        cols = list(ta.columns)
        have = {norm(c.column_name) for c in cols}
        for c in tb.columns:
            if norm(c.column_name) not in have:
                cols.append(ColumnRef(ta.name, c.column_name, c.column_type))
                have.add(norm(c.column_name))
        pk = list(ta.primary_key)
        pk_have = {norm(p) for p in pk}
        for p in tb.primary_key:
            if norm(p) not in pk_have:
                pk.append(p)
                pk_have.add(norm(p))
        tables.append(TableDef(ta.name, tuple(cols), tuple(pk)))
    a_names = {norm(t.name) for t in a.tables}
    tables.extend(tb for tb in b.tables if norm(tb.name) not in a_names)

    draft = Schema(a.db_id, tuple(tables))
    fks: list[ForeignKey] = []
    for fk in (*a.foreign_keys, *b.foreign_keys):
        if fk not in fks and fk.resolves_in(draft):
            fks.append(fk)
    return Schema(a.db_id, tuple(tables), tuple(fks))


def _padding_order(source: Schema, table: TableDef) -> list[str]:
    """Retention padding priority: primary keys, foreign-key endpoints, rest."""
    ordered: list[str] = []
    seen: set[str] = set()

    def add(name: str) -> None:
        if norm(name) not in seen:
            ordered.append(name)
            seen.add(norm(name))

    for pk in table.primary_key:
        add(pk)
    for fk in source.foreign_keys:
        for ref in (fk.from_ref, fk.to_ref):
            if norm(ref.table_name) == norm(table.name) and table.has_column(ref.column_name):
                add(table.column(ref.column_name).column_name)
    for col in table.columns:
        add(col.column_name)
    return ordered


def extract_subschema(source: Schema, selection: SchemaSelection, retention_floor: int = 0) -> Schema:
    """Project a selection out of `source`, padding each table up to the floor.

    Every selected table keeps exactly max(|selected columns|,
    min(retention_floor, table size)) columns. Padding pulls primary-key
    columns first, then foreign-key endpoints, then remaining columns in
    source order. Foreign keys survive when both endpoints do.
    """
    if retention_floor < 0:
        raise ValueError("retention_floor must be non-negative")
    selection.validate_against(source)

    selected = {norm(t): cols for t, cols in selection.entries}
    tables: list[TableDef] = []
    for table in source.tables:
        if norm(table.name) not in selected:
            continue
        chosen: list[ColumnRef] = []
        have: set[str] = set()
        for cname in selected[norm(table.name)]:
            ref = table.column(cname)
            if norm(ref.column_name) not in have:
                chosen.append(ref)
                have.add(norm(ref.column_name))
        target = max(len(chosen), min(retention_floor, len(table.columns)))
        if len(chosen) < target:
            for cname in _padding_order(source, table):
                if len(chosen) >= target:
                    break
                if norm(cname) not in have:
                    chosen.append(table.column(cname))
                    have.add(norm(cname))
        pk = tuple(p for p in table.primary_key if norm(p) in have)
        tables.append(TableDef(table.name, tuple(chosen), pk))

    draft = Schema(source.db_id, tuple(tables))
    fks = tuple(fk for fk in source.foreign_keys if fk.resolves_in(draft))
    return Schema(source.db_id, tuple(tables), fks)


def _restrict(source: Schema, table_names: Iterable[str]) -> Schema:
    keep = {norm(t) for t in table_names}
    tables = tuple(t for t in source.tables if norm(t.name) in keep)
    draft = Schema(source.db_id, tables)
    fks = tuple(fk for fk in source.foreign_keys if fk.resolves_in(draft))
    return Schema(source.db_id, tables, fks)


def partition_schema(
    source: Schema,
    parts: int,
    mode: str = "equal-split",
    seed: int = 0,
) -> list[Schema]:
    """Split a schema into private fragments for a roster of agents.

    ``half-to-one`` returns a single fragment holding floor(|T|/2) randomly
    chosen tables with all their columns; ``equal-split`` returns `parts`
    fragments with disjoint table sets covering the source, sizes differing
    by at most one. Foreign keys crossing a fragment boundary are dropped
    from both sides. Deterministic for a fixed seed.
    """
    if parts < 1:
        raise PartitionError("parts must be >= 1")
    if mode not in ("half-to-one", "equal-split"):
        raise PartitionError(f"unknown partition mode {mode!r}")

    names = list(source.table_names)
    rng = random.Random(seed)
    rng.shuffle(names)

    if mode == "half-to-one":
        return [_restrict(source, names[: len(names) // 2])]

    if parts > len(names):
        raise PartitionError(
            f"cannot split {len(names)} tables into {parts} non-empty parts"
        )
    if parts == 1:
        return [source]
    base, extra = divmod(len(names), parts)
    out: list[Schema] = []
    start = 0
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        out.append(_restrict(source, names[start : start + size]))
        start += size
    return out


def schema_match_score(schema: Schema, reference_refs: Iterable[ColumnRef]) -> float:
    """Fraction of distinct reference columns present in the schema.

    An empty reference set scores 1.0 by convention.
    """
    refs = list(dict.fromkeys(reference_refs))
    if not refs:
        return 1.0
    hits = sum(1 for r in refs if schema.contains(r))
    return hits / len(refs)


def schema_contains(schema: Schema, ref: Union[ColumnRef, str]) -> bool:
    """Case-insensitive membership test (table name or column ref)."""
    return schema.contains(ref)
