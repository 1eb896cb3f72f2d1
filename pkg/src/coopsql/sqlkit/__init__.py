"""SQL parsing, identifier analysis, difficulty profiling and canonical form."""

from .analysis import (
    AGGREGATE_FUNCTIONS,
    BLOCKING_FINDINGS,
    DIFFICULTY_RUBRIC,
    Finding,
    ReferencedIdentifiers,
    StructuralProfile,
    canonicalize,
    classify_difficulty,
    exact_match,
    referenced_identifiers,
    semantic_check,
    structural_profile,
)
from .nodes import SelectStmt, render
from .parser import parse_sql

SqlAst = SelectStmt

__all__ = [
    "AGGREGATE_FUNCTIONS",
    "BLOCKING_FINDINGS",
    "DIFFICULTY_RUBRIC",
    "Finding",
    "ReferencedIdentifiers",
    "SqlAst",
    "SelectStmt",
    "StructuralProfile",
    "canonicalize",
    "classify_difficulty",
    "exact_match",
    "parse_sql",
    "referenced_identifiers",
    "render",
    "semantic_check",
    "structural_profile",
]
