"""Interchangeable reasoner backends: deterministic oracle, remote chat API, replay.

All three expose the same raw surface (extract / generate / check); the
sanitization and mechanical screening around them live in ``actions``.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import re
import threading
import time
from dataclasses import dataclass
from typing import Optional

import httpx

from ..errors import (
    CheckFailedError,
    ExtractionFailedError,
    GenerationFailedError,
    ReplayMissError,
    SqlSyntaxError,
    UnparseableCompletionError,
)
from ..schema import Schema, norm
from ..sqlkit import BLOCKING_FINDINGS, canonicalize, parse_sql, referenced_identifiers, semantic_check
from .prompts import ShotExample, assemble_prompt, load_fewshot_bank
from .types import Question


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


class AgentBackend:
    """Raw reasoner surface backing an agent's four functions."""

    kind = "abstract"

    def extract(self, question: Question, known: Schema, *, agent_id: str,
                round: int, shots: int = 0) -> dict[str, list[str]]:
        """Raw relevance judgment: table name -> column names (unvalidated)."""
        raise NotImplementedError

    def generate(self, question: Question, schema: Schema, *, agent_id: str,
                 round: int, strategy: str = "direct", shots: int = 0) -> str:
        """Raw SQL text for the question over the given schema."""
        raise NotImplementedError

    def check(self, question: Question, candidate_sql: str, known: Schema, *,
              agent_id: str, round: int, shots: int = 0) -> tuple[bool, str]:
        """Semantic opinion on a candidate: (acceptable, note)."""
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Oracle
# ---------------------------------------------------------------------------

_CAMEL = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")
_NON_ALNUM = re.compile(r"[^a-z0-9]+")


def _singular(token: str) -> str:
    if len(token) > 3 and token.endswith("ies"):
        return token[:-3] + "y"
    if len(token) > 2 and token.endswith("s") and not token.endswith("ss"):
        return token[:-1]
    return token


def name_tokens(identifier: str) -> list[str]:
    """Split an identifier on underscores and camel case, singularized."""
    spaced = _CAMEL.sub(" ", identifier)
    return [_singular(t) for t in _NON_ALNUM.split(spaced.lower()) if t]


def text_tokens(text: str) -> set[str]:
    return {_singular(t) for t in _NON_ALNUM.split(text.lower()) if t}


def tokens_match(name_token: str, question_token: str) -> bool:
    """Equal after singularization, or a >=3-char prefix of one another."""
    if name_token == question_token:
        return True
    if len(name_token) >= 3 and question_token.startswith(name_token):
        return True
    if len(question_token) >= 3 and name_token.startswith(question_token):
        return True
    return False


def _identifier_matches(identifier: str, qtokens: set[str]) -> bool:
    return any(tokens_match(nt, qt) for nt in name_tokens(identifier) for qt in qtokens)


class OracleBackend(AgentBackend):
    """Gold-aware deterministic simulant of a capable model.

    Extraction selects tables/columns whose name tokens overlap the question,
    unioned with the gold references present in the known schema. Generation
    emits the gold SQL verbatim iff the offered schema resolves every gold
    reference; otherwise it returns a syntactically valid query over the
    available tables that deliberately yields no rows, so an attempt from an
    incomplete schema can never be scored correct by accident. Checking
    accepts exactly the candidates canonically equal to gold.

    ``extraction_recall`` < 1 makes the gold-reference component lossy: each
    call keeps only floor(recall * k) of the k gold references present in the
    known schema, chosen by a draw seeded from (seed, question, agent, round).
    """

    kind = "oracle"

    def __init__(self, seed: int = 0, extraction_recall: float = 1.0):
        if not 0.0 <= extraction_recall <= 1.0:
            raise ValueError("extraction_recall must be within [0, 1]")
        self.seed = seed
        self.extraction_recall = extraction_recall

    def _gold_ast(self, question: Question):
        if not question.gold_sql:
            return None
        try:
            return parse_sql(question.gold_sql)
        except SqlSyntaxError:
            return None

    def extract(self, question, known, *, agent_id, round, shots=0):
        qtokens = text_tokens(question.text + " " + (question.evidence or ""))
        selection: dict[str, dict[str, str]] = {}

        def select(table_name: str, column_name: str | None = None) -> None:
            table = known.table(table_name)
            if table is None:
                return
            cols = selection.setdefault(table.name, {})
            if column_name is not None and table.has_column(column_name):
                col = table.column(column_name)
                cols.setdefault(norm(col.column_name), col.column_name)

        for table in known.tables:
            if _identifier_matches(table.name, qtokens):
                select(table.name)
                for pk in table.primary_key:
                    select(table.name, pk)
            for col in table.columns:
                if _identifier_matches(col.column_name, qtokens):
                    select(table.name, col.column_name)

        gold_ast = self._gold_ast(question)
        if gold_ast is not None:
            refs = referenced_identifiers(gold_ast, known)
            items: list[tuple[str, Optional[str]]] = []
            for t in refs.tables:
                if known.has_table(t):
                    items.append((t, None))
            for ref in refs.columns:
                if known.contains(ref):
                    items.append((ref.table_name, ref.column_name))
            if self.extraction_recall < 1.0 and items:
                keep = int(len(items) * self.extraction_recall)
                rng = random.Random(_draw_seed(self.seed, question.question_id, agent_id, round))
                rng.shuffle(items)
                items = items[:keep]
            for t, c in items:
                select(t, c)
                if c is None:
                    table = known.table(t)
                    for pk in table.primary_key:
                        select(t, pk)

        return {t: list(cols.values()) for t, cols in selection.items()}

    def generate(self, question, schema, *, agent_id, round, strategy="direct", shots=0):
        gold_ast = self._gold_ast(question)
        if gold_ast is not None:
            findings = semantic_check(gold_ast, schema)
            if not any(f.kind in BLOCKING_FINDINGS for f in findings):
                return question.gold_sql
        return self._fallback_sql(question, schema)

    def _fallback_sql(self, question: Question, schema: Schema) -> str:
        qtokens = text_tokens(question.text)
        best = schema.tables[0]
        best_score = -1
        for table in schema.tables:
            score = sum(
                1 for nt in name_tokens(table.name) for qt in qtokens if tokens_match(nt, qt)
            )
            if score > best_score:
                best, best_score = table, score
        cols = [c.column_name for c in best.columns[:3]]
        return f"SELECT {', '.join(cols)} FROM {best.name} WHERE 1 = 0"

    def check(self, question, candidate_sql, known, *, agent_id, round, shots=0):
        gold_ast = self._gold_ast(question)
        if gold_ast is None:
            return True, "no reference available; mechanical screen passed"
        try:
            cand_ast = parse_sql(candidate_sql)
        except SqlSyntaxError as exc:
            return False, f"does not parse: {exc}"
        if canonicalize(cand_ast) == canonicalize(gold_ast):
            return True, ""
        return False, "differs from the reference answer"


def _draw_seed(seed: int, question_id: str, agent_id: str, round: int) -> int:
    key = f"{seed}|{question_id}|{agent_id}|{round}".encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


# ---------------------------------------------------------------------------
# Cassette
# ---------------------------------------------------------------------------


CassetteKey = tuple[str, str, int, str, str]


class Cassette:
    """Append-only JSON-lines record of backend exchanges for exact replay.

    Keyed by (question_id, agent_id, round, task_kind, prompt_hash). Reads may
    happen concurrently; appends are serialized.
    """

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()

    def append(self, key: CassetteKey, request: dict, response: str) -> None:
        record = {
            "question_id": key[0],
            "agent_id": key[1],
            "round": key[2],
            "task_kind": key[3],
            "prompt_hash": key[4],
            "request": request,
            "response": response,
        }
        line = json.dumps(record, sort_keys=True)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def load_index(self) -> dict[CassetteKey, dict]:
        index: dict[CassetteKey, dict] = {}
        if not os.path.exists(self.path):
            return index
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                key = (rec["question_id"], rec["agent_id"], rec["round"],
                       rec["task_kind"], rec["prompt_hash"])
                index[key] = rec
        return index


# ---------------------------------------------------------------------------
# Completion parsing shared by remote and replay
# ---------------------------------------------------------------------------


def parse_selection_response(text: str) -> dict[str, list[str]]:
    """Pull the first JSON object out of a completion."""
    start = text.find("{")
    while start != -1:
        depth = 0
        for i in range(start, len(text)):
            if text[i] == "{":
                depth += 1
            elif text[i] == "}":
                depth -= 1
                if depth == 0:
                    try:
                        data = json.loads(text[start : i + 1])
                    except json.JSONDecodeError:
                        break
                    if isinstance(data, dict):
                        out = {}
                        for table, cols in data.items():
                            if isinstance(cols, str):
                                cols = [cols]
                            if isinstance(cols, list):
                                out[str(table)] = [str(c) for c in cols]
                        return out
                    break
        start = text.find("{", start + 1)
    raise ExtractionFailedError("no JSON selection found in completion", raw=text)


_SQL_FENCE = re.compile(r"```(?:sql)?\s*(.*?)```", re.IGNORECASE | re.DOTALL)
_SELECT_START = re.compile(r"\bselect\b", re.IGNORECASE)


def parse_sql_response(text: str) -> str:
    for match in _SQL_FENCE.finditer(text):
        body = match.group(1).strip().rstrip(";").strip()
        if body:
            return body
    m = _SELECT_START.search(text)
    if m:
        body = text[m.start():].strip()
        body = body.split("```")[0].strip()
        if ";" in body:
            body = body.split(";")[0]
        return body.strip()
    raise UnparseableCompletionError("no SQL found in completion", raw=text)


def parse_verdict_response(text: str) -> tuple[bool, str]:
    stripped = text.strip().lower()
    first = re.split(r"[\s:,.!]+", stripped, maxsplit=1)
    word = first[0] if first else ""
    note = first[1].strip() if len(first) > 1 else ""
    if word in ("yes", "correct", "accept"):
        return True, note
    if word in ("no", "incorrect", "reject"):
        return False, note
    raise CheckFailedError("completion does not start with a yes/no verdict", raw=text)


# ---------------------------------------------------------------------------
# Remote (OpenAI-compatible chat completions)
# ---------------------------------------------------------------------------


@dataclass
class RemoteConfig:
    endpoint: str
    model: str
    temperature: float = 0.0
    api_key_env: str = "OPENAI_API_KEY"
    timeout: float = 60.0
    max_retries: int = 2
    min_request_interval: float = 0.0  # seconds between requests (rate limit)


class RemoteBackend(AgentBackend):
    """Chat-completions client with optional cassette recording.

    The API key is read from the environment, never from configuration files.
    A custom ``transport`` may be injected for testing.
    """

    kind = "remote"

    def __init__(
        self,
        config: RemoteConfig,
        cassette: Cassette | None = None,
        bank: tuple[ShotExample, ...] | None = None,
        transport: httpx.BaseTransport | None = None,
    ):
        self.config = config
        self.cassette = cassette
        self.bank = bank if bank is not None else load_fewshot_bank()
        self._client = httpx.Client(transport=transport, timeout=config.timeout)
        self._lock = threading.Lock()
        self._last_request = 0.0

    def close(self) -> None:
        self._client.close()

    def _complete(self, prompt: str) -> str:
        api_key = os.environ.get(self.config.api_key_env, "")
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            self._respect_rate_limit()
            try:
                response = self._client.post(self.config.endpoint, json=payload, headers=headers)
                if response.status_code >= 500:
                    last_error = RuntimeError(f"server error {response.status_code}")
                    continue
                response.raise_for_status()
                data = response.json()
                return data["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                last_error = exc
        raise CheckFailedError(f"chat completion failed: {last_error}", raw=str(last_error))

    def _respect_rate_limit(self) -> None:
        if self.config.min_request_interval <= 0:
            return
        with self._lock:
            wait = self._last_request + self.config.min_request_interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()

    def _call(self, task_kind: str, question: Question, schema: Schema, *,
              agent_id: str, round: int, shots: int, candidate_sql: str | None = None) -> str:
        prompt = assemble_prompt(task_kind, question, schema, shots, self.bank, candidate_sql)
        response = self._complete(prompt)
        if self.cassette is not None:
            key = (question.question_id, agent_id, round, task_kind, prompt_hash(prompt))
            self.cassette.append(key, {"model": self.config.model, "prompt": prompt}, response)
        return response

    def extract(self, question, known, *, agent_id, round, shots=0):
        try:
            response = self._call("extract", question, known,
                                  agent_id=agent_id, round=round, shots=shots)
        except CheckFailedError as exc:
            raise ExtractionFailedError(str(exc), raw=exc.raw) from exc
        return parse_selection_response(response)

    def generate(self, question, schema, *, agent_id, round, strategy="direct", shots=0):
        task = "generate-decompose" if strategy == "decompose" else "generate-direct"
        try:
            response = self._call(task, question, schema,
                                  agent_id=agent_id, round=round, shots=shots)
        except CheckFailedError as exc:
            raise GenerationFailedError(str(exc), raw=exc.raw) from exc
        return parse_sql_response(response)

    def check(self, question, candidate_sql, known, *, agent_id, round, shots=0):
        response = self._call("check", question, known, agent_id=agent_id,
                              round=round, shots=shots, candidate_sql=candidate_sql)
        return parse_verdict_response(response)


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


class ReplayBackend(AgentBackend):
    """Replays a recorded cassette bit-deterministically; no network."""

    kind = "replay"

    def __init__(self, cassette_path: str, bank: tuple[ShotExample, ...] | None = None):
        self.cassette = Cassette(cassette_path)
        self.bank = bank if bank is not None else load_fewshot_bank()
        self._index = self.cassette.load_index()

    def _lookup(self, task_kind: str, question: Question, schema: Schema, *,
                agent_id: str, round: int, shots: int, candidate_sql: str | None = None) -> str:
        prompt = assemble_prompt(task_kind, question, schema, shots, self.bank, candidate_sql)
        key = (question.question_id, agent_id, round, task_kind, prompt_hash(prompt))
        record = self._index.get(key)
        if record is None:
            raise ReplayMissError(
                f"cassette has no entry for question={question.question_id!r} "
                f"agent={agent_id!r} round={round} task={task_kind!r}"
            )
        return record["response"]

    def extract(self, question, known, *, agent_id, round, shots=0):
        response = self._lookup("extract", question, known,
                                agent_id=agent_id, round=round, shots=shots)
        return parse_selection_response(response)

    def generate(self, question, schema, *, agent_id, round, strategy="direct", shots=0):
        task = "generate-decompose" if strategy == "decompose" else "generate-direct"
        response = self._lookup(task, question, schema,
                                agent_id=agent_id, round=round, shots=shots)
        return parse_sql_response(response)

    def check(self, question, candidate_sql, known, *, agent_id, round, shots=0):
        response = self._lookup("check", question, known, agent_id=agent_id,
                                round=round, shots=shots, candidate_sql=candidate_sql)
        return parse_verdict_response(response)
