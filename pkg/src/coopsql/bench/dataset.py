"""Dataset ingestion for Spider/BIRD-format distributions and the toy corpus."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass

from ..agents import Question
from ..errors import DatasetError
from ..schema import ColumnRef, ColumnType, ForeignKey, Schema, TableDef

logger = logging.getLogger(__name__)

PROVENANCES = ("spider-dev", "spider-test", "bird-dev", "toy")

_LAYOUTS = {
    # provenance: (tables file candidates, questions file candidates, db dir candidates, gold field)
    "spider-dev": (("tables.json",), ("dev.json",), ("database",), "query"),
    "spider-test": (("tables.json",), ("test.json",), ("test_database", "database"), "query"),
    "bird-dev": (("dev_tables.json", "tables.json"), ("dev.json",), ("dev_databases", "database"), "SQL"),
    "toy": (("tables.json",), ("questions.json",), ("database",), "query"),
}


@dataclass(frozen=True)
class DatasetBundle:
    schemas: dict  # db_id -> Schema
    questions: tuple[Question, ...]
    db_paths: dict  # db_id -> sqlite file path
    provenance: str

    def schema_for(self, db_id: str) -> Schema:
        return self.schemas[db_id]

    def db_path_for(self, db_id: str) -> str:
        return self.db_paths[db_id]


def _pick(root: str, candidates: tuple[str, ...], what: str) -> str:
    for name in candidates:
        path = os.path.join(root, name)
        if os.path.exists(path):
            return path
    raise DatasetError(f"no {what} found under {root!r} (tried {', '.join(candidates)})")


def schema_from_tables_entry(entry: dict, index: int = 0) -> Schema:
    """Build a Schema from one record of a benchmark `tables` description file.

    Column-index foreign keys are mapped to column references; a dangling
    index drops the key with a warning rather than failing ingestion.
    """
    try:
        db_id = entry["db_id"]
        table_names = entry.get("table_names_original") or entry["table_names"]
        column_names = entry.get("column_names_original") or entry["column_names"]
        column_types = entry.get("column_types") or []
    except KeyError as exc:
        raise DatasetError(f"tables record {index} is missing field {exc}") from exc

    # column index -> (table index, name); index 0 is the '*' placeholder
    per_table: dict[int, list[ColumnRef]] = {i: [] for i in range(len(table_names))}
    flat: list[tuple[int, str] | None] = []
    for ci, pair in enumerate(column_names):
        ti, name = pair
        if ti < 0:
            flat.append(None)
            continue
        if ti >= len(table_names):
            raise DatasetError(f"tables record {index}: column {ci} names table {ti} out of range")
        ctype = ColumnType.coerce(column_types[ci] if ci < len(column_types) else None)
        per_table[ti].append(ColumnRef(table_names[ti], name, ctype))
        flat.append((ti, name))

    pk_cols: dict[int, list[str]] = {i: [] for i in range(len(table_names))}
    for raw in entry.get("primary_keys", ()):
        parts = raw if isinstance(raw, list) else [raw]
        for ci in parts:
            if not isinstance(ci, int) or ci < 0 or ci >= len(flat) or flat[ci] is None:
                logger.warning("db %s: dangling primary key index %r dropped", db_id, ci)
                continue
            ti, name = flat[ci]
            pk_cols[ti].append(name)

    tables = tuple(
        TableDef(table_names[ti], tuple(per_table[ti]), tuple(pk_cols[ti]))
        for ti in range(len(table_names))
    )
    draft = Schema(db_id, tables)

    fks: list[ForeignKey] = []
    for pair in entry.get("foreign_keys", ()):
        try:
            ci, cj = pair
        except (TypeError, ValueError):
            logger.warning("db %s: malformed foreign key entry %r dropped", db_id, pair)
            continue
        ok = (
            isinstance(ci, int) and isinstance(cj, int)
            and 0 <= ci < len(flat) and 0 <= cj < len(flat)
            and flat[ci] is not None and flat[cj] is not None
        )
        if not ok:
            logger.warning("db %s: dangling foreign key index pair %r dropped", db_id, pair)
            continue
        fi, fname = flat[ci]
        ti_, tname = flat[cj]
        fks.append(ForeignKey(ColumnRef(table_names[fi], fname), ColumnRef(table_names[ti_], tname)))
    fks = [fk for fk in fks if fk.resolves_in(draft)]
    return Schema(db_id, tables, tuple(fks))


def load_dataset(root: str, provenance: str) -> DatasetBundle:
    """Load a benchmark distribution into a bundle of schemas and questions."""
    if provenance not in PROVENANCES:
        raise DatasetError(f"unknown provenance {provenance!r} (expected one of {PROVENANCES})")
    tables_candidates, question_candidates, db_dir_candidates, gold_field = _LAYOUTS[provenance]

    tables_path = _pick(root, tables_candidates, "tables description file")
    questions_path = _pick(root, question_candidates, "questions file")
    db_dir = _pick(root, db_dir_candidates, "database directory")

    try:
        with open(tables_path, encoding="utf-8") as fh:
            tables_data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"malformed tables file {tables_path!r}: {exc}") from exc

    schemas: dict[str, Schema] = {}
    for i, entry in enumerate(tables_data):
        schema = schema_from_tables_entry(entry, i)
        schemas[schema.db_id] = schema

    try:
        with open(questions_path, encoding="utf-8") as fh:
            questions_data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"malformed questions file {questions_path!r}: {exc}") from exc

    questions: list[Question] = []
    db_paths: dict[str, str] = {}
    for i, entry in enumerate(questions_data):
        try:
            text = entry["question"]
            db_id = entry["db_id"]
        except (KeyError, TypeError) as exc:
            raise DatasetError(f"questions record {i} in {questions_path!r}: missing {exc}") from exc
        gold = entry.get(gold_field) or entry.get("query") or entry.get("SQL")
        qid = str(entry.get("question_id", f"q{i:04d}"))
        if db_id not in schemas:
            raise DatasetError(f"questions record {i}: unknown db_id {db_id!r}")
        if db_id not in db_paths:
            db_file = os.path.join(db_dir, db_id, f"{db_id}.sqlite")
            if not os.path.exists(db_file):
                raise DatasetError(f"database file for {db_id!r} not found at {db_file!r}")
            db_paths[db_id] = db_file
        questions.append(
            Question(
                question_id=qid,
                text=text,
                db_id=db_id,
                evidence=entry.get("evidence") or None,
                gold_sql=gold,
                difficulty_label=entry.get("difficulty") or None,
            )
        )

    return DatasetBundle(
        schemas=schemas,
        questions=tuple(questions),
        db_paths=db_paths,
        provenance=provenance,
    )
