"""Benchmark harness: dataset ingestion, conditions, execution, reporting."""

from .conditions import make_condition
from .dataset import DatasetBundle, load_dataset, schema_from_tables_entry
from .execution import (
    ExecutionResult,
    exec_accuracy,
    execute_sql,
    gold_is_ordered,
    measure_runtime,
    results_match,
    ves,
)
from .runner import (
    BenchmarkReport,
    EvalRecord,
    compute_report,
    evaluate_question,
    load_records,
    run_benchmark,
    write_records,
)
from .toycorpus import TOY_DBS, build_toy_corpus

__all__ = [
    "BenchmarkReport",
    "DatasetBundle",
    "EvalRecord",
    "ExecutionResult",
    "TOY_DBS",
    "build_toy_corpus",
    "compute_report",
    "evaluate_question",
    "exec_accuracy",
    "execute_sql",
    "gold_is_ordered",
    "load_dataset",
    "load_records",
    "make_condition",
    "measure_runtime",
    "results_match",
    "run_benchmark",
    "schema_from_tables_entry",
    "ves",
    "write_records",
]
