"""Agent identities, their four functions, and interchangeable backends."""

from .actions import act_check, act_extract, act_generate, choose_strategy, known_schema
from .backends import (
    AgentBackend,
    Cassette,
    OracleBackend,
    RemoteBackend,
    RemoteConfig,
    ReplayBackend,
    prompt_hash,
)
from .prompts import ShotExample, assemble_prompt, load_fewshot_bank, render_schema
from .types import AgentProfile, CheckVerdict, Question, SqlCandidate

__all__ = [
    "AgentBackend",
    "AgentProfile",
    "Cassette",
    "CheckVerdict",
    "OracleBackend",
    "Question",
    "RemoteBackend",
    "RemoteConfig",
    "ReplayBackend",
    "ShotExample",
    "SqlCandidate",
    "act_check",
    "act_extract",
    "act_generate",
    "assemble_prompt",
    "choose_strategy",
    "known_schema",
    "load_fewshot_bank",
    "prompt_hash",
    "render_schema",
]
