"""Round-trip and canonical-form properties over randomized queries."""

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from coopsql.sqlkit import canonicalize, parse_sql, render

from genutil import random_query_text

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@given(seeds)
@settings(max_examples=300)
def test_parse_render_parse_fixed_point(seed):
    sql = random_query_text(random.Random(seed))
    ast = parse_sql(sql)
    rendered = render(ast)
    assert parse_sql(rendered) == ast


@given(seeds)
@settings(max_examples=300)
def test_canonicalize_idempotent(seed):
    sql = random_query_text(random.Random(seed))
    once = canonicalize(parse_sql(sql))
    again = canonicalize(parse_sql(once))
    assert once == again


@given(seeds)
@settings(max_examples=100)
def test_canonical_text_reparses(seed):
    sql = random_query_text(random.Random(seed))
    canonical = canonicalize(parse_sql(sql))
    parse_sql(canonical)
