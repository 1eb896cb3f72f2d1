"""Prompt assembly: deterministic text per task kind, schema and shot count."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from ..errors import InsufficientExamplesError
from ..schema import Schema
from .types import Question

TASK_KINDS = ("extract", "generate-direct", "generate-decompose", "check")

_HEADERS = {
    "extract": (
        "You hold part of a database schema. Identify every table and column "
        "needed to answer the question. Reply with a single JSON object mapping "
        "each relevant table name to a list of its relevant column names. "
        "Use only names that appear in the schema below."
    ),
    "generate-direct": (
        "Write one SQLite query answering the question, using only the schema "
        "below. Reply with the SQL inside a ```sql code block and nothing else."
    ),
    "generate-decompose": (
        "Break the question into simpler sub-questions, answer each in order, "
        "and combine them into one final SQLite query over the schema below. "
        "Reply with the final SQL inside a ```sql code block as the last thing "
        "in your message."
    ),
    "check": (
        "Decide whether the SQL query below correctly answers the question "
        "given the schema. Start your reply with exactly 'yes' or 'no', then "
        "briefly justify."
    ),
}


@dataclass(frozen=True)
class ShotExample:
    schema_text: str
    question: str
    sql: str


def render_schema(schema: Schema) -> str:
    """CREATE TABLE-style schema listing with key annotations; byte-stable."""
    lines: list[str] = []
    for table in schema.tables:
        lines.append(f"CREATE TABLE {table.name} (")
        body = [f"  {c.column_name} {c.column_type.value}" for c in table.columns]
        if table.primary_key:
            body.append(f"  PRIMARY KEY ({', '.join(table.primary_key)})")
        for fk in schema.foreign_keys:
            if fk.from_ref.table_name.casefold() == table.name.casefold():
                body.append(
                    f"  FOREIGN KEY ({fk.from_ref.column_name}) REFERENCES "
                    f"{fk.to_ref.table_name}({fk.to_ref.column_name})"
                )
        lines.append(",\n".join(body))
        lines.append(");")
    return "\n".join(lines)


def load_fewshot_bank(path: str | None = None) -> tuple[ShotExample, ...]:
    """Worked examples shipped with the package, or from an explicit file."""
    if path is None:
        text = resources.files("coopsql").joinpath("data/fewshot_bank.json").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    data = json.loads(text)
    return tuple(
        ShotExample(e["schema_text"], e["question"], e["sql"]) for e in data["examples"]
    )


def assemble_prompt(
    task_kind: str,
    question: Question,
    schema: Schema,
    shots: int = 0,
    bank: tuple[ShotExample, ...] | None = None,
    candidate_sql: str | None = None,
) -> str:
    """Build the full prompt for one backend call. Byte-stable for fixed inputs."""
    if task_kind not in TASK_KINDS:
        raise ValueError(f"unknown task kind {task_kind!r}")
    if shots:
        if bank is None:
            bank = load_fewshot_bank()
        if shots > len(bank):
            raise InsufficientExamplesError(
                f"{shots} shots requested but the bank holds {len(bank)} examples"
            )

    parts = [_HEADERS[task_kind], ""]
    if shots:
        for i, shot in enumerate(bank[:shots], start=1):
            parts.append(f"Example {i}:")
            parts.append(shot.schema_text)
            parts.append(f"Question: {shot.question}")
            parts.append(f"SQL: {shot.sql}")
            parts.append("")
    parts.append("Schema:")
    parts.append(render_schema(schema))
    parts.append("")
    if question.evidence:
        parts.append(f"Evidence: {question.evidence}")
    parts.append(f"Question: {question.text}")
    if task_kind == "check" and candidate_sql is not None:
        parts.append(f"SQL to check: {candidate_sql}")
    return "\n".join(parts)
