"""Cooperative text-to-SQL over segmented schemas.

Agents each hold a private schema fragment, grow a shared global schema by
exchanging question-relevant pieces, take turns generating SQL, and
cross-check each other's output until a positive verdict ends the episode.
A benchmark harness evaluates the loop on Spider/BIRD-format datasets.
"""

from .schema import (
    ColumnRef,
    ColumnType,
    ForeignKey,
    Schema,
    SchemaSelection,
    TableDef,
    extract_subschema,
    merge_schemas,
    partition_schema,
    schema_contains,
    schema_match_score,
)

__version__ = "0.1.0"

__all__ = [
    "ColumnRef",
    "ColumnType",
    "ForeignKey",
    "Schema",
    "SchemaSelection",
    "TableDef",
    "extract_subschema",
    "merge_schemas",
    "partition_schema",
    "schema_contains",
    "schema_match_score",
    "__version__",
]
