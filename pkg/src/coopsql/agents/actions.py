"""The four agent functions: schema merge, extraction, generation, checking.

These wrap the raw backend surface with the guarantees the episode loop
relies on: backend outputs are sanitized against the agent's known schema,
and a candidate that fails the mechanical screen (parse + identifier
resolution) is rejected no matter what the backend thinks of it.
"""

from __future__ import annotations

import logging

from ..errors import SqlSyntaxError
from ..schema import Schema, SchemaSelection, merge_schemas
from ..sqlkit import BLOCKING_FINDINGS, Finding, parse_sql, semantic_check
from .types import AgentProfile, CheckVerdict, Question, SqlCandidate

logger = logging.getLogger(__name__)


def known_schema(agent: AgentProfile, global_schema: Schema) -> Schema:
    """Merge the agent's private schema with the shared global schema."""
    return merge_schemas(agent.private_schema, global_schema)


def act_extract(
    agent: AgentProfile,
    question: Question,
    known: Schema,
    *,
    round: int = 1,
    shots: int = 0,
) -> SchemaSelection:
    """Ask the backend which part of `known` the question needs.

    Hallucinated identifiers in the backend response are dropped with a
    warning instead of failing the episode.
    """
    raw = agent.backend.extract(
        question, known, agent_id=agent.agent_id, round=round, shots=shots
    )
    entries: dict[str, tuple[str, ...]] = {}
    for table_name, columns in raw.items():
        table = known.table(table_name)
        if table is None:
            logger.warning(
                "agent %s selected unknown table %r for question %s; dropped",
                agent.agent_id, table_name, question.question_id,
            )
            continue
        kept = []
        for col in columns:
            if table.has_column(col):
                kept.append(table.column(col).column_name)
            else:
                logger.warning(
                    "agent %s selected unknown column %r.%r for question %s; dropped",
                    agent.agent_id, table_name, col, question.question_id,
                )
        entries[table.name] = tuple(dict.fromkeys(kept))
    return SchemaSelection.of(entries)


def act_generate(
    agent: AgentProfile,
    question: Question,
    extracted: Schema,
    strategy: str = "direct",
    shots: int = 0,
    *,
    round: int = 1,
) -> SqlCandidate:
    """Generate a SQL candidate over the extracted schema."""
    if extracted.is_empty:
        raise ValueError("cannot generate SQL over an empty schema")
    text = agent.backend.generate(
        question, extracted, agent_id=agent.agent_id, round=round,
        strategy=strategy, shots=shots,
    )
    return SqlCandidate(text=text, produced_by=agent.agent_id, round=round,
                        strategy=strategy, shots=shots)


def act_check(
    agent: AgentProfile,
    question: Question,
    candidate: SqlCandidate,
    known: Schema,
    *,
    round: int = 1,
    shots: int = 0,
) -> CheckVerdict:
    """Check a candidate: mechanical screen first, then the backend's opinion.

    A parse failure or an identifier that does not resolve against `known`
    forces a negative verdict regardless of the backend.
    """
    try:
        ast = parse_sql(candidate.text)
    except SqlSyntaxError as exc:
        return CheckVerdict(
            positive=False,
            reasons=(Finding("parse_failure", candidate.text, str(exc)),),
            checked_by=agent.agent_id,
            round=round,
        )
    findings = semantic_check(ast, known)
    blocking = tuple(f for f in findings if f.kind in BLOCKING_FINDINGS)
    if blocking:
        return CheckVerdict(positive=False, reasons=blocking,
                            checked_by=agent.agent_id, round=round)

    positive, note = agent.backend.check(
        question, candidate.text, known, agent_id=agent.agent_id,
        round=round, shots=shots,
    )
    reasons = ()
    if not positive:
        reasons = (Finding("semantic_doubt", candidate.text, note or "backend rejected the SQL"),)
    return CheckVerdict(positive=positive, reasons=reasons,
                        checked_by=agent.agent_id, round=round)


def choose_strategy(policy: str, question: Question, schema: Schema) -> str:
    """Pick a generation strategy for this round.

    ``direct`` and ``decompose`` are fixed choices; ``auto`` decomposes when
    the question is long or mentions three or more schema tables, which at
    inference time stands in for gold-SQL structural difficulty.
    """
    if policy in ("direct", "decompose"):
        return policy
    if policy != "auto":
        raise ValueError(f"unknown strategy policy {policy!r}")
    from .backends import _identifier_matches, text_tokens

    qtokens = text_tokens(question.text)
    matched = sum(1 for t in schema.tables if _identifier_matches(t.name, qtokens))
    if matched >= 3 or len(question.text.split()) >= 25:
        return "decompose"
    return "direct"
