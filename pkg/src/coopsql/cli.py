"""Command-line entry point: partition preview, benchmark runs, report tables.

Exit codes: 0 success, 1 configuration error, 2 dataset error. Credentials
are only ever read from the environment, never from configuration files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

from .agents import Cassette, OracleBackend, RemoteBackend, RemoteConfig, ReplayBackend
from .bench import (
    build_toy_corpus,
    compute_report,
    load_dataset,
    load_records,
    make_condition,
    run_benchmark,
    write_records,
)
from .episode import AblationToggles, EpisodeConfig, default_max_rounds
from .errors import ConfigError, CoopSqlError, DatasetError, PartitionError
from .rewards import RewardConfig

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATASET = 2

_CONFIG_FIELDS = (
    "dataset", "provenance", "condition", "agents", "shots", "strategy", "delta",
    "max_rounds", "backend", "endpoint", "model", "cassette", "record", "seed",
    "out", "jobs", "question_id", "no_retention", "no_exchange", "no_checking",
    "extraction_recall", "timeout", "trace_dir", "api_key_env",
)


@dataclass
class RunConfig:
    """Validated run configuration; echoed verbatim into every report."""

    dataset: str = ""
    provenance: str = "toy"
    condition: str = "TwoPart"
    agents: int = 2
    shots: int = 0
    strategy: str = "direct"
    delta: int = 2
    max_rounds: int | None = None
    backend: str = "oracle"
    endpoint: str | None = None
    model: str | None = None
    cassette: str | None = None
    record: bool = False
    seed: int = 0
    out: str = "runs/latest"
    jobs: int = 4
    question_id: str | None = None
    no_retention: bool = False
    no_exchange: bool = False
    no_checking: bool = False
    extraction_recall: float = 1.0
    timeout: float = 30.0
    trace_dir: str | None = None
    api_key_env: str = "OPENAI_API_KEY"

    def validate(self) -> None:
        if not self.dataset:
            raise ConfigError("--dataset is required")
        if self.backend not in ("oracle", "remote", "replay"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.backend == "remote" and not (self.endpoint and self.model):
            raise ConfigError("remote backend needs --endpoint and --model")
        if self.backend == "remote" and not os.environ.get(self.api_key_env):
            raise ConfigError(f"remote backend needs the {self.api_key_env} environment variable")
        if self.backend == "replay" and not self.cassette:
            raise ConfigError("replay backend needs --cassette")
        if self.record and not self.cassette:
            raise ConfigError("--record needs --cassette")
        if self.agents < 1:
            raise ConfigError("--agents must be >= 1")
        if self.shots < 0 or self.delta < 0 or self.jobs < 1:
            raise ConfigError("--shots/--delta must be >= 0 and --jobs >= 1")
        if not 0.0 <= self.extraction_recall <= 1.0:
            raise ConfigError("--extraction-recall must be within [0, 1]")

    def episode_config(self) -> EpisodeConfig:
        rounds = self.max_rounds if self.max_rounds is not None else default_max_rounds(self.agents)
        return EpisodeConfig(
            max_rounds=rounds,
            retention_floor=self.delta,
            strategy_policy=self.strategy,
            shots=self.shots,
            condition=self.condition,
            toggles=AblationToggles(
                retention=not self.no_retention,
                exchange=not self.no_exchange,
                checking=not self.no_checking,
            ),
            seed=self.seed,
        )

    def build_backend(self):
        if self.backend == "oracle":
            return OracleBackend(seed=self.seed, extraction_recall=self.extraction_recall)
        if self.backend == "replay":
            return ReplayBackend(self.cassette)
        cassette = Cassette(self.cassette) if (self.record and self.cassette) else None
        return RemoteBackend(
            RemoteConfig(
                endpoint=self.endpoint,
                model=self.model,
                api_key_env=self.api_key_env,
                timeout=self.timeout,
            ),
            cassette=cassette,
        )

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in _CONFIG_FIELDS}


def _load_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit command-line flags."""
    config = RunConfig()
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config!r}: {exc}") from exc
        for key, value in data.items():
            if key not in _CONFIG_FIELDS:
                raise ConfigError(f"unknown config key {key!r}")
            setattr(config, key, value)
    for key in _CONFIG_FIELDS:
        value = getattr(args, key, None)
        if value is not None:
            setattr(config, key, value)
    return config


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--dataset", help="dataset root directory")
    parser.add_argument("--provenance", choices=("spider-dev", "spider-test", "bird-dev", "toy"))
    parser.add_argument("--condition", choices=("OnePart", "OneAll", "TwoPart", "TwoAll", "custom"))
    parser.add_argument("--agents", type=int)
    parser.add_argument("--seed", type=int)


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--shots", type=int)
    parser.add_argument("--strategy", choices=("direct", "decompose", "auto"))
    parser.add_argument("--delta", type=int, help="retention floor (minimum columns kept per table)")
    parser.add_argument("--max-rounds", type=int, dest="max_rounds")
    parser.add_argument("--backend", choices=("oracle", "remote", "replay"))
    parser.add_argument("--endpoint")
    parser.add_argument("--model")
    parser.add_argument("--cassette")
    parser.add_argument("--record", action="store_const", const=True, default=None)
    parser.add_argument("--out")
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--question-id", dest="question_id")
    parser.add_argument("--timeout", type=float)
    parser.add_argument("--trace-dir", dest="trace_dir")
    parser.add_argument("--extraction-recall", type=float, dest="extraction_recall")
    parser.add_argument("--no-retention", action="store_const", const=True,
                        default=None, dest="no_retention")
    parser.add_argument("--no-exchange", action="store_const", const=True,
                        default=None, dest="no_exchange")
    parser.add_argument("--no-checking", action="store_const", const=True,
                        default=None, dest="no_checking")


def cmd_partition(args: argparse.Namespace) -> int:
    config = _load_config(args)
    config.validate()
    bundle = load_dataset(config.dataset, config.provenance)
    blueprint = make_condition(bundle, config.condition, config.agents, config.seed)
    for db_id in sorted(blueprint):
        print(f"db: {db_id}")
        for i, part in enumerate(blueprint[db_id]):
            tables = ", ".join(part.table_names) if part.table_names else "(empty)"
            print(f"  agent-{i}: {tables}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    config.validate()
    bundle = load_dataset(config.dataset, config.provenance)
    blueprint = make_condition(bundle, config.condition, config.agents, config.seed)
    backend = config.build_backend()
    episode_config = config.episode_config()

    question_ids = {config.question_id} if config.question_id else None
    report, records = run_benchmark(
        bundle, blueprint, episode_config, backend,
        reward_config=RewardConfig(),
        jobs=config.jobs,
        timeout=config.timeout,
        trace_dir=config.trace_dir,
        question_ids=question_ids,
    )

    os.makedirs(config.out, exist_ok=True)
    report_path = os.path.join(config.out, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    write_records(records, os.path.join(config.out, "records.jsonl"))
    with open(os.path.join(config.out, "config.json"), "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)

    ves_text = f"{report.overall['ves']:.2f}" if report.overall["ves"] is not None else "n/a"
    ex = report.overall["ex"]
    print(f"questions: {report.overall['count']}")
    print(f"overall EX: {ex * 100:.2f}%" if ex is not None else "overall EX: n/a")
    print(f"overall VES: {ves_text}")
    print(f"report: {report_path}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    try:
        records = load_records(args.records)
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError(f"cannot read records {args.records!r}: {exc}") from exc

    group_key = {
        "difficulty": lambda r: r.difficulty,
        "condition": lambda r: r.condition or "unknown",
        "agent": lambda r: str(r.agent_count if r.agent_count is not None else "unknown"),
    }[args.group_by]

    groups: dict[str, list] = {}
    for rec in records:
        groups.setdefault(group_key(rec), []).append(rec)

    rows = []
    for name in sorted(groups):
        subset = groups[name]
        ex = sum(r.exec_match for r in subset) / len(subset)
        em = sum(r.exact_match for r in subset) / len(subset)
        rows.append((name, len(subset), ex * 100, em * 100))
    if records:
        ex = sum(r.exec_match for r in records) / len(records)
        em = sum(r.exact_match for r in records) / len(records)
        rows.append(("overall", len(records), ex * 100, em * 100))

    if args.csv:
        print("group,count,ex,em")
        for name, count, ex, em in rows:
            print(f"{name},{count},{ex:.2f},{em:.2f}")
    else:
        print(f"{'group':<16}{'count':>8}{'EX':>10}{'EM':>10}")
        for name, count, ex, em in rows:
            print(f"{name:<16}{count:>8}{ex:>9.2f}%{em:>9.2f}%")
    return EXIT_OK


def cmd_toy(args: argparse.Namespace) -> int:
    root = build_toy_corpus(args.out)
    print(f"toy corpus written to {root}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coopsql",
        description="Cooperative text-to-SQL over segmented schemas: run and score multi-agent episodes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_partition = sub.add_parser("partition", help="preview table assignments per agent")
    _add_common_flags(p_partition)
    p_partition.set_defaults(func=cmd_partition)

    p_run = sub.add_parser("run", help="run a benchmark and write report files")
    _add_common_flags(p_run)
    _add_run_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_report = sub.add_parser("report", help="re-aggregate a records file into a table")
    p_report.add_argument("records", help="records.jsonl produced by `coopsql run`")
    p_report.add_argument("--group-by", choices=("difficulty", "condition", "agent"),
                          default="difficulty", dest="group_by")
    p_report.add_argument("--csv", action="store_true")
    p_report.set_defaults(func=cmd_report)

    p_toy = sub.add_parser("toy", help="materialize the in-repo toy corpus")
    p_toy.add_argument("--out", default="toy-corpus")
    p_toy.set_defaults(func=cmd_toy)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PartitionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except CoopSqlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
