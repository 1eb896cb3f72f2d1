"""Reward instrumentation over finished episode traces.

Two reward streams are computed per trace and combined linearly. The schema
stream pays the improvement of the global schema's match against the gold
references minus the cost of each extraction. The SQL stream pays the
improvement of the checker's verdict from one candidate to the next minus
the combined cost of the actions that produced and judged each candidate
(the verdict on a round's candidate is the one delivered in the following
round; a candidate never checked counts as 0). Rewards are bookkeeping over
the trace: the episode loop never optimizes them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .episode import EpisodeTrace
from .schema import ColumnRef, schema_match_score


@dataclass(frozen=True)
class RewardConfig:
    extract_cost: float = 0.0
    generate_cost: float = 0.0
    check_cost: float = 0.0
    lambda_e: float = 1.0
    lambda_s: float = 1.0

    def __post_init__(self):
        if min(self.extract_cost, self.generate_cost, self.check_cost) < 0:
            raise ValueError("action costs must be non-negative")

    def to_dict(self) -> dict:
        return {
            "extract_cost": self.extract_cost,
            "generate_cost": self.generate_cost,
            "check_cost": self.check_cost,
            "lambda_e": self.lambda_e,
            "lambda_s": self.lambda_s,
        }


@dataclass(frozen=True)
class RewardReport:
    r_e: float
    r_s: float
    r: float
    je_deltas: tuple[float, ...]  # one per round
    js_values: tuple[float, ...]  # one per generated candidate, in round order

    def to_dict(self) -> dict:
        return {
            "r_e": self.r_e,
            "r_s": self.r_s,
            "r": self.r,
            "je_deltas": list(self.je_deltas),
            "js_values": list(self.js_values),
        }


def compute_rewards(
    trace: EpisodeTrace,
    gold_refs: Iterable[ColumnRef],
    config: RewardConfig | None = None,
) -> RewardReport:
    """Score a finished trace against the gold column references."""
    config = config or RewardConfig()
    refs = tuple(gold_refs)

    je_deltas: list[float] = []
    r_e = 0.0
    for record in trace.rounds:
        delta = schema_match_score(record.global_after, refs) - schema_match_score(
            record.global_before, refs
        )
        je_deltas.append(delta)
        if "extract" in record.action_costs:
            r_e -= config.extract_cost
        r_e += delta

    # verdict on the candidate of round i is delivered by the round i+1 record
    verdict_by_candidate_round: dict[int, bool] = {}
    for record in trace.rounds:
        if record.check_of_previous is not None:
            verdict_by_candidate_round[record.round - 1] = record.check_of_previous.positive

    js_values: list[float] = []
    r_s = 0.0
    prev_js = 0.0
    for record in trace.rounds:
        if record.candidate is None:
            continue
        js = 1.0 if verdict_by_candidate_round.get(record.round, False) else 0.0
        js_values.append(js)
        cost = config.generate_cost
        if "extract" in record.action_costs:
            cost += config.extract_cost
        if record.round in verdict_by_candidate_round:
            cost += config.check_cost
        r_s += -cost + (js - prev_js)
        prev_js = js

    r = config.lambda_e * r_e + config.lambda_s * r_s
    return RewardReport(r_e=r_e, r_s=r_s, r=r, je_deltas=tuple(je_deltas),
                        js_values=tuple(js_values))
