"""Roster blueprints: who holds which schema fragment under each condition."""

from __future__ import annotations

from ..errors import ConfigError
from ..schema import Schema, partition_schema
from .dataset import DatasetBundle

CONDITION_AGENTS = {"OnePart": 1, "OneAll": 1, "TwoPart": 2, "TwoAll": 2}


def make_condition(
    bundle: DatasetBundle,
    condition: str,
    n_agents: int,
    seed: int = 0,
) -> dict[str, tuple[Schema, ...]]:
    """Private-schema assignment per db_id for the requested condition.

    OnePart: one agent with a random half of the tables. OneAll: one agent
    with everything. TwoPart: an equal two-way split. TwoAll: two agents,
    both complete. custom: an equal n-way split.
    """
    forced = CONDITION_AGENTS.get(condition)
    if forced is not None and n_agents != forced:
        raise ConfigError(f"condition {condition} requires exactly {forced} agent(s), got {n_agents}")
    if condition == "custom" and n_agents < 1:
        raise ConfigError("custom condition needs n_agents >= 1")
    if condition not in CONDITION_AGENTS and condition != "custom":
        raise ConfigError(f"unknown condition {condition!r}")

    blueprint: dict[str, tuple[Schema, ...]] = {}
    for db_id, schema in bundle.schemas.items():
        if condition == "OnePart":
            parts = tuple(partition_schema(schema, 1, "half-to-one", seed))
        elif condition == "OneAll":
            parts = (schema,)
        elif condition == "TwoPart":
            parts = tuple(partition_schema(schema, 2, "equal-split", seed))
        elif condition == "TwoAll":
            parts = (schema, schema)
        else:
            parts = tuple(partition_schema(schema, n_agents, "equal-split", seed))
        blueprint[db_id] = parts
    return blueprint
