"""Remote backend wire protocol, cassette recording, deterministic replay."""

import json
import re

import httpx
import pytest

from coopsql.agents import (
    Cassette,
    OracleBackend,
    Question,
    RemoteBackend,
    RemoteConfig,
    ReplayBackend,
    prompt_hash,
)
from coopsql.agents.backends import (
    parse_selection_response,
    parse_sql_response,
    parse_verdict_response,
)
from coopsql.errors import (
    CheckFailedError,
    ExtractionFailedError,
    GenerationFailedError,
    ReplayMissError,
    UnparseableCompletionError,
)
from coopsql.schema import Schema, TableDef

ENDPOINT = "https://llm.example/v1/chat/completions"


def schema() -> Schema:
    return Schema("co", (TableDef.of("emp", ["id", "name"], primary_key=["id"]),))


def scripted_transport(requests_log: list | None = None) -> httpx.MockTransport:
    """A deterministic stand-in model behind the chat-completions wire format."""

    def handler(request: httpx.Request) -> httpx.Response:
        payload = json.loads(request.content)
        if requests_log is not None:
            requests_log.append(payload)
        prompt = payload["messages"][0]["content"]
        first_table = re.search(r"CREATE TABLE (\w+)", prompt)
        table = first_table.group(1) if first_table else "t"
        if prompt.startswith("You hold part of a database schema"):
            content = json.dumps({table: ["id"]})
        elif prompt.startswith("Decide whether the SQL"):
            content = "yes, looks consistent with the schema"
        else:
            content = f"Here you go:\n```sql\nSELECT count(*) FROM {table}\n```"
        return httpx.Response(200, json={
            "choices": [{"message": {"role": "assistant", "content": content}}]
        })

    return httpx.MockTransport(handler)


class TestResponseParsing:
    def test_selection_json_extracted(self):
        raw = 'Sure! Here is the selection:\n{"emp": ["id", "name"]}\nHope that helps.'
        assert parse_selection_response(raw) == {"emp": ["id", "name"]}

    def test_selection_scalar_column_promoted_to_list(self):
        assert parse_selection_response('{"emp": "id"}') == {"emp": ["id"]}

    def test_selection_failure_keeps_raw(self):
        with pytest.raises(ExtractionFailedError) as err:
            parse_selection_response("no json here")
        assert err.value.raw == "no json here"

    def test_sql_fenced_block(self):
        raw = "explanation\n```sql\nSELECT 1\n```\ntrailing"
        assert parse_sql_response(raw) == "SELECT 1"

    def test_sql_bare_select(self):
        assert parse_sql_response("SELECT a FROM t; extra") == "SELECT a FROM t"

    def test_sql_missing(self):
        with pytest.raises(UnparseableCompletionError):
            parse_sql_response("I cannot answer that")

    def test_verdict_yes_no(self):
        assert parse_verdict_response("yes, fine")[0] is True
        assert parse_verdict_response("No: missing join")[0] is False

    def test_verdict_garbage(self):
        with pytest.raises(CheckFailedError):
            parse_verdict_response("maybe?")


class TestRemoteBackend:
    def test_full_surface_over_wire(self, monkeypatch):
        monkeypatch.setenv("OPENAI_API_KEY", "test-key")
        log: list = []
        backend = RemoteBackend(
            RemoteConfig(endpoint=ENDPOINT, model="m-1", temperature=0.25),
            transport=scripted_transport(log),
        )
        q = Question("q1", "how many employees?", "co")
        selection = backend.extract(q, schema(), agent_id="a0", round=1)
        assert selection == {"emp": ["id"]}
        sql = backend.generate(q, schema(), agent_id="a0", round=1)
        assert sql == "SELECT count(*) FROM emp"
        positive, _ = backend.check(q, sql, schema(), agent_id="a0", round=2)
        assert positive
        assert log[0]["model"] == "m-1"
        assert log[0]["temperature"] == 0.25

    def test_server_error_exhausts_retries(self, monkeypatch):
        monkeypatch.setenv("OPENAI_API_KEY", "k")
        transport = httpx.MockTransport(lambda req: httpx.Response(500, json={}))
        backend = RemoteBackend(
            RemoteConfig(endpoint=ENDPOINT, model="m", max_retries=1),
            transport=transport,
        )
        q = Question("q1", "hello there", "co")
        with pytest.raises(ExtractionFailedError):
            backend.extract(q, schema(), agent_id="a0", round=1)
        with pytest.raises(GenerationFailedError):
            backend.generate(q, schema(), agent_id="a0", round=1)

    def test_records_cassette(self, tmp_path, monkeypatch):
        monkeypatch.setenv("OPENAI_API_KEY", "k")
        cassette_path = str(tmp_path / "run.jsonl")
        backend = RemoteBackend(
            RemoteConfig(endpoint=ENDPOINT, model="m"),
            cassette=Cassette(cassette_path),
            transport=scripted_transport(),
        )
        q = Question("q1", "how many employees?", "co")
        backend.extract(q, schema(), agent_id="a0", round=1)
        backend.generate(q, schema(), agent_id="a0", round=1)
        index = Cassette(cassette_path).load_index()
        assert len(index) == 2
        kinds = {key[3] for key in index}
        assert kinds == {"extract", "generate-direct"}
        for key, record in index.items():
            assert record["response"]
            assert key[4] == prompt_hash(record["request"]["prompt"])


class TestReplayBackend:
    def test_replay_reproduces_recorded_outputs(self, tmp_path, monkeypatch):
        monkeypatch.setenv("OPENAI_API_KEY", "k")
        cassette_path = str(tmp_path / "run.jsonl")
        remote = RemoteBackend(
            RemoteConfig(endpoint=ENDPOINT, model="m"),
            cassette=Cassette(cassette_path),
            transport=scripted_transport(),
        )
        q = Question("q1", "how many employees?", "co")
        recorded_sel = remote.extract(q, schema(), agent_id="a0", round=1)
        recorded_sql = remote.generate(q, schema(), agent_id="a0", round=1)

        replay = ReplayBackend(cassette_path)
        assert replay.extract(q, schema(), agent_id="a0", round=1) == recorded_sel
        assert replay.generate(q, schema(), agent_id="a0", round=1) == recorded_sql
        # bit-deterministic across instances
        replay2 = ReplayBackend(cassette_path)
        assert replay2.generate(q, schema(), agent_id="a0", round=1) == recorded_sql

    def test_missing_entry_raises(self, tmp_path):
        path = str(tmp_path / "empty.jsonl")
        Cassette(path).append(("other", "a0", 1, "extract", "x" * 16), {}, "{}")
        replay = ReplayBackend(path)
        q = Question("q1", "how many employees?", "co")
        with pytest.raises(ReplayMissError):
            replay.generate(q, schema(), agent_id="a0", round=1)


class TestOracleDeterminism:
    def test_same_inputs_same_outputs(self):
        q = Question("q1", "count the employees", "co", gold_sql="SELECT count(*) FROM emp")
        a = OracleBackend(seed=3)
        b = OracleBackend(seed=3)
        args = dict(agent_id="a0", round=2)
        assert a.extract(q, schema(), **args) == b.extract(q, schema(), **args)
        assert a.generate(q, schema(), **args) == b.generate(q, schema(), **args)
        assert a.check(q, "SELECT count(*) FROM emp", schema(), **args) == \
            b.check(q, "SELECT count(*) FROM emp", schema(), **args)
