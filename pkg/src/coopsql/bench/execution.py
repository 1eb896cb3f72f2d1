"""Read-only SQL execution against benchmark SQLite files, EX and VES scoring.

Runtimes are measured as SQLite virtual-machine progress ticks converted to
pseudo-seconds. Unlike wall-clock timing, the tick count is identical run to
run for the same query and database, which keeps reports byte-reproducible;
it remains a faithful proxy for how much work a query does.
"""

from __future__ import annotations

import math
import sqlite3
import time
from collections import Counter
from dataclasses import dataclass
from statistics import median
from typing import Iterable

from ..errors import SqlSyntaxError, UndefinedScoreError
from ..sqlkit import parse_sql

_PROGRESS_EVERY = 100  # VM instructions per progress callback
_SECONDS_PER_INSTRUCTION = 1e-7


@dataclass(frozen=True)
class ExecutionResult:
    success: bool
    rows: tuple | None = None
    error: str | None = None
    timed_out: bool = False
    runtime: float = 0.0  # pseudo-seconds, deterministic

    @property
    def failed(self) -> bool:
        return not self.success


def execute_sql(db_path: str, sql: str, timeout: float = 30.0) -> ExecutionResult:
    """Execute one query read-only; rows come back as a tuple of row tuples."""
    ticks = 0
    deadline = time.monotonic() + timeout

    def on_progress() -> int:
        nonlocal ticks
        ticks += 1
        return 1 if time.monotonic() > deadline else 0

    try:
        conn = sqlite3.connect(f"file:{db_path}?mode=ro", uri=True, timeout=timeout)
    except sqlite3.Error as exc:
        return ExecutionResult(success=False, error=f"cannot open database: {exc}")
    try:
        conn.set_progress_handler(on_progress, _PROGRESS_EVERY)
        cursor = conn.execute(sql)
        rows = tuple(tuple(row) for row in cursor.fetchall())
    except sqlite3.Error as exc:
        timed_out = time.monotonic() > deadline
        return ExecutionResult(
            success=False,
            error="execution timed out" if timed_out else str(exc),
            timed_out=timed_out,
            runtime=_runtime_from_ticks(ticks),
        )
    finally:
        conn.close()
    return ExecutionResult(success=True, rows=rows, runtime=_runtime_from_ticks(ticks))


def _runtime_from_ticks(ticks: int) -> float:
    return max(ticks, 1) * _PROGRESS_EVERY * _SECONDS_PER_INSTRUCTION


def gold_is_ordered(gold_sql: str) -> bool:
    """Does the gold query pin row order? Falls back to a textual scan."""
    try:
        return bool(parse_sql(gold_sql).order_by)
    except SqlSyntaxError:
        return "order by" in gold_sql.lower()


def results_match(pred: ExecutionResult, gold: ExecutionResult, ordered: bool) -> bool:
    """Row-multiset equality, or row-list equality when order is pinned."""
    if pred.failed or gold.failed:
        return False
    if ordered:
        return pred.rows == gold.rows
    return Counter(pred.rows) == Counter(gold.rows)


def exec_accuracy(pred_sql: str, gold_sql: str, db_path: str, timeout: float = 30.0) -> bool:
    """True iff both queries execute and their result sets match."""
    gold_result = execute_sql(db_path, gold_sql, timeout)
    if gold_result.failed:
        return False
    pred_result = execute_sql(db_path, pred_sql, timeout)
    return results_match(pred_result, gold_result, gold_is_ordered(gold_sql))


def measure_runtime(db_path: str, sql: str, timeout: float = 30.0) -> float:
    """Median of three measured executions after one warm-up."""
    execute_sql(db_path, sql, timeout)
    samples = [execute_sql(db_path, sql, timeout).runtime for _ in range(3)]
    return median(samples)


def ves(records: Iterable) -> float:
    """Valid efficiency score over evaluation records.

    100/N * sum over records of [exec_match] * sqrt(gold_runtime/pred_runtime),
    with the runtime ratio clipped to [0.25, 4] before the square root.
    """
    items = list(records)
    if not items:
        raise UndefinedScoreError("VES is undefined for zero records")
    total = 0.0
    for rec in items:
        if not rec.exec_match:
            continue
        pred_rt = rec.pred_runtime if rec.pred_runtime > 0 else 1e-9
        ratio = min(max(rec.gold_runtime / pred_rt, 0.25), 4.0)
        total += math.sqrt(ratio)
    return 100.0 * total / len(items)
