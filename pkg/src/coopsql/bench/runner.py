"""Benchmark runner: episodes per question, EX/EM/VES aggregation, reports."""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from ..agents import AgentBackend, AgentProfile
from ..episode import EpisodeConfig, EpisodeTrace, run_episode
from ..errors import SqlSyntaxError, UndefinedScoreError
from ..rewards import RewardConfig, compute_rewards
from ..schema import Schema
from ..sqlkit import DIFFICULTY_RUBRIC, classify_difficulty, exact_match, parse_sql, referenced_identifiers
from .dataset import DatasetBundle
from .execution import execute_sql, gold_is_ordered, measure_runtime, results_match, ves

logger = logging.getLogger(__name__)

_BUCKET_ORDER = ("easy", "medium", "hard", "extra", "simple", "moderate", "challenging")


@dataclass(frozen=True)
class EvalRecord:
    question_id: str
    db_id: str
    predicted: str | None
    gold: str
    exec_match: bool
    exact_match: bool
    valid: bool
    gold_runtime: float
    pred_runtime: float
    difficulty: str
    rounds_used: int
    termination: str
    error: str | None = None
    condition: str | None = None
    agent_count: int | None = None

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "db_id": self.db_id,
            "predicted": self.predicted,
            "gold": self.gold,
            "exec_match": self.exec_match,
            "exact_match": self.exact_match,
            "valid": self.valid,
            "gold_runtime": self.gold_runtime,
            "pred_runtime": self.pred_runtime,
            "difficulty": self.difficulty,
            "rounds_used": self.rounds_used,
            "termination": self.termination,
            "error": self.error,
            "condition": self.condition,
            "agent_count": self.agent_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalRecord":
        return cls(**{k: data.get(k) for k in (
            "question_id", "db_id", "predicted", "gold", "exec_match", "exact_match",
            "valid", "gold_runtime", "pred_runtime", "difficulty", "rounds_used",
            "termination", "error", "condition", "agent_count",
        )})


@dataclass(frozen=True)
class BenchmarkReport:
    condition: str
    agent_count: int
    shots: int
    seed: int
    overall: dict
    buckets: dict
    episode_stats: dict
    config_echo: dict = field(default_factory=dict)
    difficulty_rubric: str = DIFFICULTY_RUBRIC

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "agent_count": self.agent_count,
            "shots": self.shots,
            "seed": self.seed,
            "overall": self.overall,
            "buckets": self.buckets,
            "episode_stats": self.episode_stats,
            "config_echo": self.config_echo,
            "difficulty_rubric": self.difficulty_rubric,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def compute_report(
    records: list[EvalRecord],
    *,
    condition: str,
    agent_count: int,
    shots: int,
    seed: int,
    config_echo: dict | None = None,
) -> BenchmarkReport:
    """Aggregate records into a report; always recomputed, never trusted."""
    n = len(records)
    overall = {
        "count": n,
        "empty": n == 0,
        "ex": _mean([r.exec_match for r in records]),
        "em": _mean([r.exact_match for r in records]),
        "valid": _mean([r.valid for r in records]),
        "ves": None,
    }
    if n:
        try:
            overall["ves"] = ves(records)
        except UndefinedScoreError:  # pragma: no cover - n > 0 here
            overall["ves"] = None

    buckets: dict[str, dict] = {}
    names = sorted({r.difficulty for r in records},
                   key=lambda d: (_BUCKET_ORDER.index(d) if d in _BUCKET_ORDER else 99, d))
    for name in names:
        group = [r for r in records if r.difficulty == name]
        buckets[name] = {
            "count": len(group),
            "ex": _mean([r.exec_match for r in group]),
            "em": _mean([r.exact_match for r in group]),
        }

    terminations: dict[str, int] = {}
    for r in records:
        terminations[r.termination] = terminations.get(r.termination, 0) + 1
    episode_stats = {
        "mean_rounds": _mean([r.rounds_used for r in records]),
        "terminations": dict(sorted(terminations.items())),
    }
    return BenchmarkReport(
        condition=condition,
        agent_count=agent_count,
        shots=shots,
        seed=seed,
        overall=overall,
        buckets=buckets,
        episode_stats=episode_stats,
        config_echo=config_echo or {},
    )


def _mean(values: list) -> float | None:
    if not values:
        return None
    return sum(float(v) for v in values) / len(values)


def evaluate_question(
    question,
    roster: list[AgentProfile],
    bundle: DatasetBundle,
    episode_config: EpisodeConfig,
    *,
    timeout: float = 30.0,
    trace_dir: str | None = None,
    reward_config: RewardConfig | None = None,
) -> EvalRecord:
    """Run one episode and score its final SQL against gold."""
    trace = run_episode(question, roster, episode_config)
    if trace_dir:
        trace.write(trace_dir)
        _write_rewards(trace, question, bundle, reward_config, trace_dir)

    predicted = trace.final_sql.text if trace.final_sql is not None else None
    gold = question.gold_sql or ""
    exec_ok = False
    em = False
    valid = False
    gold_rt = 0.0
    pred_rt = 0.0
    if predicted and gold:
        gold_result = execute_sql(bundle.db_path_for(question.db_id), gold, timeout)
        pred_result = execute_sql(bundle.db_path_for(question.db_id), predicted, timeout)
        valid = pred_result.success
        if gold_result.success and pred_result.success:
            exec_ok = results_match(pred_result, gold_result, gold_is_ordered(gold))
        if exec_ok:
            db = bundle.db_path_for(question.db_id)
            gold_rt = measure_runtime(db, gold, timeout)
            pred_rt = measure_runtime(db, predicted, timeout)
        try:
            em = exact_match(parse_sql(predicted), parse_sql(gold))
        except SqlSyntaxError:
            em = False

    return EvalRecord(
        question_id=question.question_id,
        db_id=question.db_id,
        predicted=predicted,
        gold=gold,
        exec_match=exec_ok,
        exact_match=em,
        valid=valid,
        gold_runtime=gold_rt,
        pred_runtime=pred_rt,
        difficulty=_difficulty(question),
        rounds_used=len(trace.rounds),
        termination=trace.termination,
    )


def _difficulty(question) -> str:
    if question.difficulty_label:
        return question.difficulty_label
    if question.gold_sql:
        try:
            return classify_difficulty(parse_sql(question.gold_sql))
        except SqlSyntaxError:
            return "unknown"
    return "unknown"


def _write_rewards(trace: EpisodeTrace, question, bundle: DatasetBundle,
                   reward_config: RewardConfig | None, trace_dir: str) -> None:
    schema = bundle.schema_for(question.db_id)
    gold_refs = ()
    if question.gold_sql:
        try:
            gold_refs = referenced_identifiers(parse_sql(question.gold_sql), schema).columns
        except SqlSyntaxError:
            gold_refs = ()
    report = compute_rewards(trace, gold_refs, reward_config)
    path = os.path.join(trace_dir, f"{question.question_id}.rewards.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)


def run_benchmark(
    bundle: DatasetBundle,
    blueprint: dict[str, tuple[Schema, ...]],
    episode_config: EpisodeConfig,
    backend: AgentBackend,
    *,
    reward_config: RewardConfig | None = None,
    jobs: int = 4,
    timeout: float = 30.0,
    trace_dir: str | None = None,
    question_ids: set[str] | None = None,
) -> tuple[BenchmarkReport, list[EvalRecord]]:
    """Evaluate every question concurrently; failures never abort the run."""
    questions = [q for q in bundle.questions
                 if question_ids is None or q.question_id in question_ids]

    def worker(question) -> EvalRecord:
        parts = blueprint.get(question.db_id, ())
        try:
            if not parts:
                raise KeyError(f"no roster blueprint for db {question.db_id!r}")
            roster = [
                AgentProfile(f"agent-{i}", part, backend) for i, part in enumerate(parts)
            ]
            record = evaluate_question(
                question, roster, bundle, episode_config,
                timeout=timeout, trace_dir=trace_dir, reward_config=reward_config,
            )
        except Exception as exc:  # per-question failures become failed records
            logger.warning("question %s failed: %s", question.question_id, exc)
            record = EvalRecord(
                question_id=question.question_id,
                db_id=question.db_id,
                predicted=None,
                gold=question.gold_sql or "",
                exec_match=False,
                exact_match=False,
                valid=False,
                gold_runtime=0.0,
                pred_runtime=0.0,
                difficulty=_difficulty(question),
                rounds_used=0,
                termination="no-candidate",
                error=str(exc),
            )
        return replace(record, condition=episode_config.condition, agent_count=len(parts))

    if trace_dir:
        os.makedirs(trace_dir, exist_ok=True)
    if jobs > 1 and len(questions) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(worker, questions))
    else:
        records = [worker(q) for q in questions]

    n_agents = max((len(parts) for parts in blueprint.values()), default=0)
    report = compute_report(
        records,
        condition=episode_config.condition,
        agent_count=n_agents,
        shots=episode_config.shots,
        seed=episode_config.seed,
        config_echo=episode_config.to_dict(),
    )
    return report, records


def write_records(records: list[EvalRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")


def load_records(path: str) -> list[EvalRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(EvalRecord.from_dict(json.loads(line)))
    return records
