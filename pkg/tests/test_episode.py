import json

import pytest

from coopsql.agents import AgentProfile, OracleBackend, Question
from coopsql.agents.backends import AgentBackend
from coopsql.episode import (
    AblationToggles,
    EpisodeConfig,
    EpisodeTrace,
    default_max_rounds,
    run_episode,
    select_checking_agent,
    select_working_agent,
)
from coopsql.errors import CheckFailedError, ConfigError, GenerationFailedError
from coopsql.schema import (
    ColumnRef,
    ForeignKey,
    Schema,
    TableDef,
    partition_schema,
    schema_contains,
)


def company() -> Schema:
    emp = TableDef.of("emp", [("id", "number"), ("name", "text"), ("age", "number"),
                              ("dept_id", "number")], primary_key=["id"])
    dept = TableDef.of("dept", [("id", "number"), ("name", "text"), ("city", "text")],
                       primary_key=["id"])
    return Schema("co", (emp, dept),
                  (ForeignKey(ColumnRef("emp", "dept_id"), ColumnRef("dept", "id")),))


def cross_question() -> Question:
    return Question(
        "q1", "Which staff members are based in the Metropolis office?", "co",
        gold_sql="SELECT emp.name FROM emp JOIN dept ON emp.dept_id = dept.id "
                 "WHERE dept.city = 'Metropolis'",
    )


class AlwaysNegative(OracleBackend):
    def check(self, question, candidate_sql, known, *, agent_id, round, shots=0):
        return False, "never satisfied"


class FlakyChecker(OracleBackend):
    def check(self, question, candidate_sql, known, *, agent_id, round, shots=0):
        raise CheckFailedError("transport exploded")


class BrokenGenerator(AgentBackend):
    def extract(self, question, known, *, agent_id, round, shots=0):
        return {known.tables[0].name: [known.tables[0].column_names[0]]}

    def generate(self, question, schema, *, agent_id, round, strategy="direct", shots=0):
        raise GenerationFailedError("model unavailable")

    def check(self, question, candidate_sql, known, *, agent_id, round, shots=0):
        return False, ""


class TestSchedulers:
    @pytest.mark.parametrize("round,n,expected", [(1, 2, 0), (2, 2, 1), (5, 3, 1)])
    def test_working_agent(self, round, n, expected):
        assert select_working_agent(round, n) == expected

    @pytest.mark.parametrize("round,n,expected", [(1, 2, 1), (2, 2, 0), (1, 1, 0), (7, 1, 0)])
    def test_checking_agent(self, round, n, expected):
        assert select_checking_agent(round, n) == expected

    def test_checking_is_next_round_worker(self):
        for n in (1, 2, 3, 5):
            for rnd in range(1, 12):
                assert select_checking_agent(rnd, n) == select_working_agent(rnd + 1, n)

    def test_fairness_over_whole_cycles(self):
        for n in (1, 2, 3, 4):
            k = 3
            counts = [0] * n
            for rnd in range(1, k * n + 1):
                counts[select_working_agent(rnd, n)] += 1
            assert counts == [k] * n


class TestRunEpisode:
    def test_oneall_accepts_after_two_rounds(self):
        roster = [AgentProfile("a0", company(), OracleBackend())]
        trace = run_episode(cross_question(), roster,
                            EpisodeConfig(max_rounds=default_max_rounds(1), condition="OneAll"))
        assert trace.termination == "accepted"
        assert len(trace.rounds) == 2
        assert trace.rounds[0].candidate is not None
        assert trace.rounds[1].check_of_previous.positive
        assert trace.final_sql == trace.rounds[0].candidate
        assert trace.accepted_by == "a0"

    def test_twopart_reconstructs_cross_partition_join(self):
        parts = partition_schema(company(), 2, "equal-split", seed=0)
        oracle = OracleBackend()
        roster = [AgentProfile("a0", parts[0], oracle), AgentProfile("a1", parts[1], oracle)]
        trace = run_episode(cross_question(), roster,
                            EpisodeConfig(max_rounds=4, condition="TwoPart"))
        assert trace.termination == "accepted"
        assert trace.final_sql.text == cross_question().gold_sql

    def test_always_negative_exhausts_budget_exactly(self):
        roster = [AgentProfile("a0", company(), AlwaysNegative())]
        for budget in (1, 2, 5):
            trace = run_episode(cross_question(), roster, EpisodeConfig(max_rounds=budget))
            assert len(trace.rounds) == budget
            assert trace.termination == "budget-exhausted"
            assert trace.final_sql is not None

    def test_flaky_checker_counts_as_negative_and_continues(self):
        roster = [AgentProfile("a0", company(), FlakyChecker())]
        trace = run_episode(cross_question(), roster, EpisodeConfig(max_rounds=3))
        assert trace.termination == "budget-exhausted"
        assert len(trace.rounds) == 3
        checks = [r.check_of_previous for r in trace.rounds if r.check_of_previous]
        assert checks and all(not c.positive for c in checks)

    def test_generation_failure_yields_no_candidate(self):
        roster = [AgentProfile("a0", company(), BrokenGenerator())]
        trace = run_episode(cross_question(), roster, EpisodeConfig(max_rounds=2))
        assert trace.termination == "no-candidate"
        assert trace.final_sql is None
        assert all(r.error for r in trace.rounds)

    def test_monotone_global_schema(self):
        parts = partition_schema(company(), 2, "equal-split", seed=0)
        oracle = OracleBackend()
        roster = [AgentProfile("a0", parts[0], oracle), AgentProfile("a1", parts[1], oracle)]
        trace = run_episode(cross_question(), roster,
                            EpisodeConfig(max_rounds=4, toggles=AblationToggles(checking=False)))
        previous = None
        for record in trace.rounds:
            for table in record.global_before.tables:
                assert schema_contains(record.global_after, table.name)
                for col in table.columns:
                    assert schema_contains(record.global_after, col)
            if previous is not None:
                assert record.global_before == previous
            previous = record.global_after

    def test_check_attribution(self):
        parts = partition_schema(company(), 2, "equal-split", seed=0)
        backend = AlwaysNegative()
        roster = [AgentProfile("agent-0", parts[0], backend),
                  AgentProfile("agent-1", parts[1], backend)]
        trace = run_episode(cross_question(), roster, EpisodeConfig(max_rounds=6))
        n = len(roster)
        for record in trace.rounds:
            if record.check_of_previous is None:
                continue
            candidate_round = record.round - 1
            expected = roster[select_checking_agent(candidate_round, n)].agent_id
            assert record.check_of_previous.checked_by == expected

    def test_round_one_has_no_check(self):
        roster = [AgentProfile("a0", company(), OracleBackend())]
        trace = run_episode(cross_question(), roster, EpisodeConfig(max_rounds=2))
        assert trace.rounds[0].check_of_previous is None

    def test_deterministic_traces(self):
        parts = partition_schema(company(), 2, "equal-split", seed=0)
        oracle = OracleBackend(seed=1)
        roster = [AgentProfile("a0", parts[0], oracle), AgentProfile("a1", parts[1], oracle)]
        config = EpisodeConfig(max_rounds=4, seed=1)
        t1 = run_episode(cross_question(), roster, config)
        t2 = run_episode(cross_question(), roster, config)
        assert t1 == t2

    def test_empty_roster_rejected(self):
        with pytest.raises(ConfigError):
            run_episode(cross_question(), [], EpisodeConfig())

    def test_db_mismatch_rejected(self):
        other = Schema("elsewhere", (TableDef.of("x", ["y"]),))
        roster = [AgentProfile("a0", other, OracleBackend())]
        with pytest.raises(ConfigError):
            run_episode(cross_question(), roster, EpisodeConfig())


class TestAblations:
    def test_without_checking_accepts_first_candidate(self):
        roster = [AgentProfile("a0", company(), OracleBackend())]
        trace = run_episode(cross_question(), roster,
                            EpisodeConfig(max_rounds=4, toggles=AblationToggles(checking=False)))
        assert trace.termination == "accepted"
        assert len(trace.rounds) == 1
        assert trace.final_sql == trace.rounds[0].candidate
        assert trace.accepted_by is None

    def test_without_exchange_freezes_global(self):
        parts = partition_schema(company(), 2, "equal-split", seed=0)
        oracle = OracleBackend()
        roster = [AgentProfile("a0", parts[0], oracle), AgentProfile("a1", parts[1], oracle)]
        trace = run_episode(cross_question(), roster,
                            EpisodeConfig(max_rounds=4, toggles=AblationToggles(exchange=False)))
        for record in trace.rounds:
            assert record.global_after.is_empty
            assert record.extraction is None

    def test_without_retention_keeps_selection_exactly(self):
        roster = [AgentProfile("a0", company(), OracleBackend())]
        q = Question("q2", "what are the employee names", "co",
                     gold_sql="SELECT name FROM emp")
        config = EpisodeConfig(max_rounds=2, retention_floor=2,
                               toggles=AblationToggles(retention=False))
        trace = run_episode(q, roster, config)
        first = trace.rounds[0]
        selected = dict(first.extraction.entries)
        for table in first.global_after.tables:
            assert len(table.columns) == len(selected[table.name])


class TestTraceSerialization:
    def test_round_trip_and_file_output(self, tmp_path):
        roster = [AgentProfile("a0", company(), OracleBackend())]
        trace = run_episode(cross_question(), roster, EpisodeConfig(max_rounds=2))
        again = EpisodeTrace.from_dict(json.loads(json.dumps(trace.to_dict())))
        assert again == trace
        path = trace.write(str(tmp_path))
        with open(path, encoding="utf-8") as fh:
            on_disk = json.load(fh)
        assert EpisodeTrace.from_dict(on_disk) == trace

    def test_accepted_requires_positive_last_verdict(self):
        roster = [AgentProfile("a0", company(), OracleBackend())]
        trace = run_episode(cross_question(), roster, EpisodeConfig(max_rounds=2))
        data = trace.to_dict()
        data["rounds"][-1]["check_of_previous"]["positive"] = False
        data["rounds"][-1]["check_of_previous"]["reasons"] = [
            {"kind": "semantic_doubt", "subject": "x", "detail": ""}
        ]
        with pytest.raises(ValueError):
            EpisodeTrace.from_dict(data)
