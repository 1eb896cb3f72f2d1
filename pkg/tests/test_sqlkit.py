import pytest

from coopsql.errors import SqlSyntaxError
from coopsql.schema import Schema, TableDef
from coopsql.sqlkit import (
    canonicalize,
    classify_difficulty,
    exact_match,
    parse_sql,
    referenced_identifiers,
    render,
    semantic_check,
    structural_profile,
)


def toy_schema() -> Schema:
    return Schema("d", (
        TableDef.of("emp", ["id", "name", "age", "d"], primary_key=["id"]),
        TableDef.of("dept", ["id", "name", "city"], primary_key=["id"]),
    ))


class TestParser:
    def test_simple_select(self):
        ast = parse_sql("SELECT id FROM emp")
        assert len(ast.core.projections) == 1
        assert ast.core.from_clause.base.name == "emp"

    def test_syntax_error_with_position(self):
        with pytest.raises(SqlSyntaxError) as err:
            parse_sql("SELEC id FROM emp")
        assert err.value.token_index == 1
        assert err.value.position == 0

    def test_multi_statement_rejected(self):
        with pytest.raises(SqlSyntaxError, match="multiple statements"):
            parse_sql("SELECT a FROM t; DROP TABLE t")

    def test_trailing_semicolon_is_fine(self):
        assert parse_sql("SELECT a FROM t;") == parse_sql("SELECT a FROM t")

    def test_empty_input(self):
        with pytest.raises(SqlSyntaxError):
            parse_sql("   ")

    def test_non_select_rejected(self):
        with pytest.raises(SqlSyntaxError):
            parse_sql("INSERT INTO t VALUES (1)")

    @pytest.mark.parametrize("sql", [
        "SELECT * FROM emp",
        "SELECT emp.* FROM emp",
        "SELECT DISTINCT name FROM emp",
        "SELECT count(*) FROM emp",
        "SELECT count(DISTINCT name) FROM emp",
        "SELECT a FROM t WHERE b BETWEEN 1 AND 5",
        "SELECT a FROM t WHERE b NOT IN (1, 2)",
        "SELECT a FROM t WHERE b IS NOT NULL",
        "SELECT a FROM t WHERE NOT b = 2",
        "SELECT a FROM t WHERE b LIKE '%x%' AND c NOT LIKE 'y%'",
        "SELECT a FROM t WHERE EXISTS (SELECT 1 FROM u)",
        "SELECT a FROM t WHERE NOT EXISTS (SELECT 1 FROM u)",
        "SELECT a FROM t WHERE b IN (SELECT c FROM u)",
        "SELECT a, b FROM t GROUP BY a, b HAVING count(*) > 1",
        "SELECT a FROM t ORDER BY a DESC, b LIMIT 3",
        "SELECT a FROM t1 JOIN t2 ON t1.x = t2.y LEFT JOIN t3 ON t2.z = t3.w",
        "SELECT a FROM t1, t2 WHERE t1.x = t2.y",
        "SELECT a FROM (SELECT a FROM t) AS sub",
        "SELECT CASE WHEN a > 1 THEN 'hi' ELSE 'lo' END FROM t",
        "SELECT CASE a WHEN 1 THEN 'one' END FROM t",
        "SELECT CAST(a AS REAL) FROM t",
        "SELECT -a + 2 * b FROM t",
        "SELECT a || '-' || b FROM t",
        "SELECT a FROM t UNION ALL SELECT b FROM u",
        "SELECT a FROM t INTERSECT SELECT a FROM u",
        "SELECT a FROM t EXCEPT SELECT a FROM u ORDER BY a LIMIT 2",
        "SELECT `weird name`.`col name` FROM `weird name`",
        'SELECT "Mixed Case" FROM "Table Name"',
        "SELECT strftime('%Y', due) FROM loan",
        "SELECT iif(a > 1, 'x', 'y') FROM t",
    ])
    def test_round_trip_fixed_point(self, sql):
        ast = parse_sql(sql)
        rendered = render(ast)
        assert parse_sql(rendered) == ast
        # rendering is deterministic
        assert render(parse_sql(rendered)) == rendered


class TestReferencedIdentifiers:
    def test_alias_resolution(self):
        refs = referenced_identifiers(parse_sql("SELECT e.name FROM emp AS e"))
        assert refs.tables == ("emp",)
        assert [str(c) for c in refs.columns] == ["emp.name"]

    def test_ambiguous_bare_column_with_schema(self):
        ast = parse_sql("SELECT name FROM emp JOIN dept ON emp.d = dept.id")
        refs = referenced_identifiers(ast, toy_schema())
        assert refs.ambiguous == ("name",)
        assert set(map(str, refs.columns)) == {"emp.d", "dept.id"}

    def test_bare_column_resolved_by_unique_owner(self):
        ast = parse_sql("SELECT age FROM emp JOIN dept ON emp.d = dept.id")
        refs = referenced_identifiers(ast, toy_schema())
        assert "emp.age" in set(map(str, refs.columns))
        assert refs.ambiguous == ()

    def test_select_constant_has_no_references(self):
        refs = referenced_identifiers(parse_sql("SELECT 1"))
        assert refs.tables == () and refs.columns == ()

    def test_subquery_references_collected(self):
        ast = parse_sql("SELECT a FROM t WHERE b IN (SELECT u.c FROM u)")
        refs = referenced_identifiers(ast)
        assert set(refs.tables) == {"t", "u"}

    def test_derived_table_columns_are_not_schema_references(self):
        ast = parse_sql("SELECT sub.x FROM (SELECT a AS x FROM t) AS sub")
        refs = referenced_identifiers(ast)
        assert set(refs.tables) == {"t"}
        assert all(c.table_name == "t" for c in refs.columns)


class TestSemanticCheck:
    def test_clean_query(self):
        ast = parse_sql("SELECT emp.name FROM emp JOIN dept ON emp.d = dept.id")
        assert semantic_check(ast, toy_schema()) == ()

    def test_unknown_table(self):
        findings = semantic_check(parse_sql("SELECT x FROM ghost"), toy_schema())
        assert [f.kind for f in findings] == ["missing_table"]
        assert findings[0].subject == "ghost"

    def test_unknown_column_names_table_and_column(self):
        findings = semantic_check(parse_sql("SELECT emp.ghost FROM emp"), toy_schema())
        assert [f.kind for f in findings] == ["missing_column"]
        assert findings[0].subject == "emp.ghost"

    def test_resolution_monotone_under_growth_for_missing_findings(self):
        schema = toy_schema()
        ast = parse_sql("SELECT emp.name, dept.city FROM emp JOIN dept ON emp.d = dept.id")
        assert semantic_check(ast, schema) == ()
        bigger = Schema("d", schema.tables + (TableDef.of("extra", ["z"]),))
        assert semantic_check(ast, bigger) == ()


class TestDifficulty:
    @pytest.mark.parametrize("sql,bucket", [
        ("SELECT id FROM emp", "easy"),
        ("SELECT count(*) FROM emp WHERE age > 3", "easy"),
        ("SELECT count(*), avg(age) FROM emp", "medium"),
        ("SELECT count(*) FROM emp JOIN dept ON emp.d = dept.id", "medium"),
        ("SELECT a.x FROM a JOIN b ON a.i = b.i JOIN c ON b.j = c.j", "hard"),
        ("SELECT id FROM emp WHERE d IN (SELECT id FROM dept)", "hard"),
        ("SELECT a.x FROM a JOIN b ON a.i = b.i WHERE a.y IN (SELECT y FROM c)", "extra"),
        ("SELECT id FROM emp UNION SELECT id FROM dept", "extra"),
    ])
    def test_buckets(self, sql, bucket):
        assert classify_difficulty(parse_sql(sql)) == bucket

    def test_profile_counts(self):
        profile = structural_profile(parse_sql(
            "SELECT count(*), max(age) FROM emp JOIN dept ON emp.d = dept.id "
            "WHERE age IN (SELECT id FROM dept)"
        ))
        assert profile.join_table_count == 2
        assert profile.nesting_depth == 1
        assert profile.aggregate_count == 2
        assert profile.selected_column_count == 2
        assert not profile.has_set_operation


class TestCanonicalize:
    def test_whitespace_and_case(self):
        a = canonicalize(parse_sql("SELECT  Id FROM Emp"))
        b = canonicalize(parse_sql("select id from emp"))
        assert a == b

    def test_conjunct_sorting(self):
        a = canonicalize(parse_sql("SELECT x FROM t WHERE a = 1 AND b = 2"))
        b = canonicalize(parse_sql("SELECT x FROM t WHERE b = 2 AND a = 1"))
        assert a == b

    def test_disjunct_sorting(self):
        a = canonicalize(parse_sql("SELECT x FROM t WHERE a = 1 OR b = 2"))
        b = canonicalize(parse_sql("SELECT x FROM t WHERE b = 2 OR a = 1"))
        assert a == b

    def test_alias_inlining(self):
        a = canonicalize(parse_sql("SELECT T1.name FROM emp AS T1"))
        b = canonicalize(parse_sql("SELECT emp.name FROM emp"))
        assert a == b

    def test_bare_column_qualified_in_single_table_scope(self):
        a = canonicalize(parse_sql("SELECT a FROM t"))
        b = canonicalize(parse_sql("SELECT t.a FROM t"))
        assert a == b

    def test_self_join_aliases_kept(self):
        sql = "SELECT t1.name FROM emp AS t1 JOIN emp AS t2 ON t1.boss = t2.id"
        out = canonicalize(parse_sql(sql))
        assert "as t1" in out and "as t2" in out

    def test_operator_normalization(self):
        a = canonicalize(parse_sql("SELECT x FROM t WHERE a <> 1"))
        b = canonicalize(parse_sql("SELECT x FROM t WHERE a != 1"))
        assert a == b

    def test_symmetric_comparison_operand_order(self):
        a = canonicalize(parse_sql("SELECT x FROM t JOIN u ON t.a = u.b"))
        b = canonicalize(parse_sql("SELECT x FROM t JOIN u ON u.b = t.a"))
        assert a == b

    def test_in_list_sorting(self):
        a = canonicalize(parse_sql("SELECT x FROM t WHERE a IN (3, 1, 2)"))
        b = canonicalize(parse_sql("SELECT x FROM t WHERE a IN (1, 2, 3)"))
        assert a == b

    def test_projection_alias_dropped_and_order_by_rewritten(self):
        a = canonicalize(parse_sql("SELECT age AS a FROM emp ORDER BY a"))
        b = canonicalize(parse_sql("SELECT age FROM emp ORDER BY age"))
        assert a == b

    def test_order_by_ordinal_expanded(self):
        a = canonicalize(parse_sql("SELECT name, age FROM emp ORDER BY 2"))
        b = canonicalize(parse_sql("SELECT name, age FROM emp ORDER BY age"))
        assert a == b

    @pytest.mark.parametrize("sql", [
        "SELECT  Id FROM Emp",
        "SELECT x FROM t WHERE b = 2 AND a = 1 OR c = 3",
        "SELECT T1.name, T2.title FROM emp AS T1 JOIN project AS T2 ON T1.id = T2.owner",
        "SELECT name, age AS a FROM emp ORDER BY 2 DESC",
        "SELECT count(*) FROM t GROUP BY a HAVING count(*) > 2",
        "SELECT a FROM t UNION SELECT b FROM u",
    ])
    def test_idempotent(self, sql):
        once = canonicalize(parse_sql(sql))
        assert canonicalize(parse_sql(once)) == once

    def test_exact_match_on_equivalent_spellings(self):
        gold = "SELECT emp.name FROM emp WHERE emp.age > 30"
        pred = "select Name from EMP where AGE > 30"
        assert exact_match(parse_sql(pred), parse_sql(gold))

    def test_exact_match_rejects_different_queries(self):
        assert not exact_match(parse_sql("SELECT a FROM t"), parse_sql("SELECT b FROM t"))
