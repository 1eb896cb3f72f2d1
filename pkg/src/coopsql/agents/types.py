"""Core value types for agents, questions, candidates and verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

from ..schema import Schema
from ..sqlkit import BLOCKING_FINDINGS, Finding

if TYPE_CHECKING:
    from .backends import AgentBackend

STRATEGIES = ("direct", "decompose")


@dataclass(frozen=True)
class Question:
    """One natural-language question against one database.

    ``gold_sql`` is harness/oracle material; remote backends never see it.
    """

    question_id: str
    text: str
    db_id: str
    evidence: Optional[str] = None
    gold_sql: Optional[str] = None
    difficulty_label: Optional[str] = None

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValueError("question text must be non-empty")
        if not self.db_id:
            raise ValueError("question needs a db_id")


@dataclass(frozen=True)
class SqlCandidate:
    """SQL produced by one agent in one round."""

    text: str
    produced_by: str
    round: int
    strategy: str = "direct"
    shots: int = 0

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValueError("candidate SQL must be non-empty")
        if self.round < 1:
            raise ValueError("round must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "produced_by": self.produced_by,
            "round": self.round,
            "strategy": self.strategy,
            "shots": self.shots,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SqlCandidate":
        return cls(data["text"], data["produced_by"], data["round"],
                   data.get("strategy", "direct"), data.get("shots", 0))


@dataclass(frozen=True)
class CheckVerdict:
    """Outcome of one agent checking another agent's candidate."""

    positive: bool
    reasons: tuple[Finding, ...]
    checked_by: str
    round: int

    def __post_init__(self):
        if self.positive and any(f.kind in BLOCKING_FINDINGS for f in self.reasons):
            raise ValueError("a positive verdict cannot carry blocking findings")

    def to_dict(self) -> dict:
        return {
            "positive": self.positive,
            "reasons": [f.to_dict() for f in self.reasons],
            "checked_by": self.checked_by,
            "round": self.round,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CheckVerdict":
        return cls(
            data["positive"],
            tuple(Finding.from_dict(f) for f in data.get("reasons", ())),
            data["checked_by"],
            data["round"],
        )


@dataclass(frozen=True)
class AgentProfile:
    """An agent: identity, private schema fragment, and its reasoner backend."""

    agent_id: str
    private_schema: Schema
    backend: "AgentBackend" = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if not self.agent_id:
            raise ValueError("agent_id must be non-empty")
