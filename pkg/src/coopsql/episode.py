"""The cooperative episode loop: exchange, check, generate, terminate.

Each round the working agent (round-robin) merges its private schema with
the shared global schema, extracts the question-relevant part back into the
global schema, checks the previous round's candidate against its own view,
and generates a fresh candidate. A positive check ends the episode; the
budget bounds it otherwise. The global schema only ever grows.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .agents import (
    AgentProfile,
    CheckVerdict,
    Question,
    SqlCandidate,
    act_check,
    act_extract,
    act_generate,
    choose_strategy,
    known_schema,
)
from .errors import BackendError, ConfigError
from .schema import Schema, SchemaSelection, extract_subschema, merge_schemas, norm
from .sqlkit import Finding

CONDITIONS = ("OnePart", "OneAll", "TwoPart", "TwoAll", "custom")
TERMINATIONS = ("accepted", "budget-exhausted", "no-candidate")


@dataclass(frozen=True)
class AblationToggles:
    """Which cooperation mechanisms are active (all on by default)."""

    retention: bool = True
    exchange: bool = True
    checking: bool = True

    def to_dict(self) -> dict:
        return {"retention": self.retention, "exchange": self.exchange, "checking": self.checking}


@dataclass(frozen=True)
class EpisodeConfig:
    max_rounds: int = 4
    retention_floor: int = 2
    strategy_policy: str = "direct"  # direct | decompose | auto
    shots: int = 0
    condition: str = "custom"
    toggles: AblationToggles = field(default_factory=AblationToggles)
    seed: int = 0
    generation_attempts: int = 1

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ConfigError("max_rounds must be >= 1")
        if self.retention_floor < 0:
            raise ConfigError("retention_floor must be >= 0")
        if self.condition not in CONDITIONS:
            raise ConfigError(f"unknown condition {self.condition!r}")
        if self.generation_attempts < 1:
            raise ConfigError("generation_attempts must be >= 1")

    def to_dict(self) -> dict:
        return {
            "max_rounds": self.max_rounds,
            "retention_floor": self.retention_floor,
            "strategy_policy": self.strategy_policy,
            "shots": self.shots,
            "condition": self.condition,
            "toggles": self.toggles.to_dict(),
            "seed": self.seed,
            "generation_attempts": self.generation_attempts,
        }


def default_max_rounds(n_agents: int) -> int:
    """Budget letting every agent work twice."""
    return 2 * n_agents


def select_working_agent(round: int, n: int) -> int:
    """Round-robin worker for a 1-based round index."""
    if round < 1 or n < 1:
        raise ValueError("round and roster size must be >= 1")
    return (round - 1) % n


def select_checking_agent(round: int, n: int) -> int:
    """The next round's worker checks this round's SQL."""
    return select_working_agent(round + 1, n)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    agent_id: str
    global_before: Schema
    global_after: Schema
    extraction: SchemaSelection | None = None
    check_of_previous: CheckVerdict | None = None
    candidate: SqlCandidate | None = None
    action_costs: dict = field(default_factory=dict)  # performed action kind -> charged cost
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "agent_id": self.agent_id,
            "global_before": self.global_before.to_dict(),
            "global_after": self.global_after.to_dict(),
            "extraction": self.extraction.to_pairs() if self.extraction else None,
            "check_of_previous": self.check_of_previous.to_dict() if self.check_of_previous else None,
            "candidate": self.candidate.to_dict() if self.candidate else None,
            "action_costs": dict(self.action_costs),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RoundRecord":
        return cls(
            round=data["round"],
            agent_id=data["agent_id"],
            global_before=Schema.from_dict(data["global_before"]),
            global_after=Schema.from_dict(data["global_after"]),
            extraction=SchemaSelection.from_pairs(data["extraction"]) if data.get("extraction") else None,
            check_of_previous=CheckVerdict.from_dict(data["check_of_previous"])
            if data.get("check_of_previous") else None,
            candidate=SqlCandidate.from_dict(data["candidate"]) if data.get("candidate") else None,
            action_costs=dict(data.get("action_costs", {})),
            error=data.get("error"),
        )


@dataclass(frozen=True)
class EpisodeTrace:
    question_id: str
    rounds: tuple[RoundRecord, ...]
    final_sql: SqlCandidate | None
    termination: str
    accepted_by: str | None = None

    def __post_init__(self):
        if self.termination not in TERMINATIONS:
            raise ValueError(f"unknown termination {self.termination!r}")
        if self.termination == "accepted" and self.rounds:
            last_check = self.rounds[-1].check_of_previous
            if last_check is not None and not last_check.positive:
                raise ValueError("accepted trace must end on a positive verdict")

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "rounds": [r.to_dict() for r in self.rounds],
            "final_sql": self.final_sql.to_dict() if self.final_sql else None,
            "termination": self.termination,
            "accepted_by": self.accepted_by,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EpisodeTrace":
        return cls(
            question_id=data["question_id"],
            rounds=tuple(RoundRecord.from_dict(r) for r in data["rounds"]),
            final_sql=SqlCandidate.from_dict(data["final_sql"]) if data.get("final_sql") else None,
            termination=data["termination"],
            accepted_by=data.get("accepted_by"),
        )

    def write(self, directory: str) -> str:
        """Persist as one JSON file per question; returns the path."""
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, f"{self.question_id}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
        return path


def run_episode(
    question: Question,
    roster: list[AgentProfile] | tuple[AgentProfile, ...],
    config: EpisodeConfig,
) -> EpisodeTrace:
    """Run one cooperative episode for one question."""
    if not roster:
        raise ConfigError("roster must contain at least one agent")
    for agent in roster:
        if not agent.private_schema.is_empty and norm(agent.private_schema.db_id) != norm(question.db_id):
            raise ConfigError(
                f"agent {agent.agent_id!r} holds schema for {agent.private_schema.db_id!r}, "
                f"question targets {question.db_id!r}"
            )

    n = len(roster)
    floor = config.retention_floor if config.toggles.retention else 0
    global_schema = Schema.empty(question.db_id)
    records: list[RoundRecord] = []
    prev_candidate: SqlCandidate | None = None
    last_candidate: SqlCandidate | None = None

    for rnd in range(1, config.max_rounds + 1):
        agent = roster[select_working_agent(rnd, n)]
        global_before = global_schema
        known = known_schema(agent, global_schema)
        extraction: SchemaSelection | None = None
        costs: dict[str, float] = {}
        error: str | None = None

        # stage 1: schema exchange
        if config.toggles.exchange:
            try:
                extraction = act_extract(agent, question, known, round=rnd, shots=config.shots)
                costs["extract"] = 0.0
                contribution = extract_subschema(known, extraction, floor)
                global_schema = merge_schemas(global_schema, contribution)
            except BackendError as exc:
                records.append(RoundRecord(rnd, agent.agent_id, global_before, global_schema,
                                           error=f"extraction failed: {exc}", action_costs=costs))
                prev_candidate = None
                continue

        # stage 3 of the previous round's candidate: checking
        check: CheckVerdict | None = None
        if prev_candidate is not None and config.toggles.checking:
            try:
                check = act_check(agent, question, prev_candidate, known,
                                  round=rnd, shots=config.shots)
            except BackendError as exc:
                # a flaky checker must never terminate the episode
                check = CheckVerdict(
                    positive=False,
                    reasons=(Finding("semantic_doubt", prev_candidate.text,
                                     f"check failed: {exc}"),),
                    checked_by=agent.agent_id,
                    round=rnd,
                )
            costs["check"] = 0.0
            if check.positive:
                records.append(RoundRecord(rnd, agent.agent_id, global_before, global_schema,
                                           extraction=extraction, check_of_previous=check,
                                           action_costs=costs))
                return EpisodeTrace(question.question_id, tuple(records), prev_candidate,
                                    "accepted", accepted_by=agent.agent_id)

        # stage 2: generation over the extracted schema
        if config.toggles.exchange and extraction is not None:
            generation_schema = extract_subschema(known, extraction, floor)
        else:
            generation_schema = known
        candidate: SqlCandidate | None = None
        if not generation_schema.is_empty:
            strategy = choose_strategy(config.strategy_policy, question, generation_schema)
            for attempt in range(config.generation_attempts):
                try:
                    candidate = act_generate(agent, question, generation_schema,
                                             strategy, config.shots, round=rnd)
                    costs["generate"] = 0.0
                    break
                except BackendError as exc:
                    error = f"generation failed: {exc}"

        records.append(RoundRecord(rnd, agent.agent_id, global_before, global_schema,
                                   extraction=extraction, check_of_previous=check,
                                   candidate=candidate, action_costs=costs, error=error))
        if candidate is not None:
            last_candidate = candidate
            if not config.toggles.checking:
                return EpisodeTrace(question.question_id, tuple(records), candidate, "accepted")
        prev_candidate = candidate

    termination = "budget-exhausted" if last_candidate is not None else "no-candidate"
    return EpisodeTrace(question.question_id, tuple(records), last_candidate, termination)
