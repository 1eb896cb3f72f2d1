import pytest

from coopsql.errors import InvalidSelectionError, MergeConflictError, PartitionError
from coopsql.schema import (
    ColumnRef,
    ColumnType,
    ForeignKey,
    Schema,
    SchemaSelection,
    TableDef,
    extract_subschema,
    merge_schemas,
    partition_schema,
    schema_contains,
    schema_match_score,
)


def company() -> Schema:
    emp = TableDef.of("emp", [("id", "number"), ("name", "text"), ("age", "number"),
                              ("dept_id", "number")], primary_key=["id"])
    dept = TableDef.of("dept", [("id", "number"), ("name", "text")], primary_key=["id"])
    fk = ForeignKey(ColumnRef("emp", "dept_id"), ColumnRef("dept", "id"))
    return Schema("co", (emp, dept), (fk,))


class TestTypes:
    def test_column_ref_equality_is_case_insensitive(self):
        assert ColumnRef("Emp", "ID") == ColumnRef("emp", "id")
        assert hash(ColumnRef("Emp", "ID")) == hash(ColumnRef("emp", "id"))
        assert ColumnRef("emp", "id") != ColumnRef("dept", "id")

    def test_column_ref_preserves_display_case(self):
        ref = ColumnRef("Emp", "Name")
        assert ref.table_name == "Emp" and ref.column_name == "Name"

    def test_column_ref_rejects_empty_names(self):
        with pytest.raises(ValueError):
            ColumnRef("", "id")
        with pytest.raises(ValueError):
            ColumnRef("emp", "")

    def test_table_rejects_duplicate_columns(self):
        with pytest.raises(ValueError):
            TableDef.of("t", ["a", "A"])

    def test_table_rejects_foreign_primary_key(self):
        with pytest.raises(ValueError):
            TableDef.of("t", ["a"], primary_key=["b"])

    def test_schema_rejects_duplicate_tables(self):
        with pytest.raises(ValueError):
            Schema("d", (TableDef.of("t", ["a"]), TableDef.of("T", ["b"])))

    def test_schema_rejects_dangling_foreign_key(self):
        with pytest.raises(ValueError):
            Schema("d", (TableDef.of("t", ["a"]),),
                   (ForeignKey(ColumnRef("t", "a"), ColumnRef("x", "y")),))

    def test_empty_schema_is_legal(self):
        assert Schema.empty().is_empty

    def test_column_type_coercion(self):
        assert ColumnType.coerce("integer") is ColumnType.NUMBER
        assert ColumnType.coerce("others") is ColumnType.OTHER
        assert ColumnType.coerce("datetime") is ColumnType.TIME
        assert ColumnType.coerce(None) is ColumnType.OTHER


class TestMerge:
    def test_empty_identity(self):
        s = company()
        assert merge_schemas(s, Schema.empty()) is s
        assert merge_schemas(Schema.empty(), s) is s

    def test_union_of_columns_for_shared_table(self):
        a = Schema("co", (TableDef.of("emp", ["id", "name"]),))
        b = Schema("co", (TableDef.of("emp", ["name", "dept_id"]), TableDef.of("dept", ["id"])))
        merged = merge_schemas(a, b)
        assert merged.table("emp").column_names == ("id", "name", "dept_id")
        assert merged.table("dept").column_names == ("id",)

    def test_disjoint_tables_are_both_kept(self):
        a = Schema("d", (TableDef.of("a", ["x"]),))
        b = Schema("d", (TableDef.of("b", ["y"]),))
        merged = merge_schemas(a, b)
        assert merged.table_names == ("a", "b")

    def test_db_id_conflict(self):
        a = Schema("d1", (TableDef.of("a", ["x"]),))
        b = Schema("d2", (TableDef.of("b", ["y"]),))
        with pytest.raises(MergeConflictError):
            merge_schemas(a, b)

    def test_foreign_keys_survive_when_endpoints_resolve(self):
        s = company()
        half = Schema("co", (s.table("emp"),))
        merged = merge_schemas(half, s)
        assert len(merged.foreign_keys) == 1

    def test_merge_is_case_insensitive_on_table_names(self):
        a = Schema("d", (TableDef.of("Emp", ["ID"]),))
        b = Schema("d", (TableDef.of("emp", ["name"]),))
        merged = merge_schemas(a, b)
        assert len(merged.tables) == 1
        assert merged.table("EMP").column_names == ("ID", "name")


class TestExtract:
    def test_padding_prefers_primary_key(self):
        s = company()
        out = extract_subschema(s, SchemaSelection.of({"emp": ["name"]}), 2)
        assert out.table("emp").column_names == ("name", "id")

    def test_zero_floor_keeps_selection_exactly(self):
        s = company()
        out = extract_subschema(s, SchemaSelection.of({"emp": ["name"]}), 0)
        assert out.table("emp").column_names == ("name",)

    def test_floor_clamps_to_table_size(self):
        s = Schema("d", (TableDef.of("t", ["only"]),))
        out = extract_subschema(s, SchemaSelection.of({"t": []}), 3)
        assert out.table("t").column_names == ("only",)

    def test_padding_priority_pk_then_fk_then_order(self):
        t = TableDef.of("t", ["a", "b", "c", "d"], primary_key=["c"])
        u = TableDef.of("u", ["x"])
        s = Schema("d", (t, u), (ForeignKey(ColumnRef("t", "d"), ColumnRef("u", "x")),))
        out = extract_subschema(s, SchemaSelection.of({"t": []}), 3)
        # pk first, fk endpoint second, then source order
        assert out.table("t").column_names == ("c", "d", "a")

    def test_unknown_selection_raises(self):
        s = company()
        with pytest.raises(InvalidSelectionError):
            extract_subschema(s, SchemaSelection.of({"ghost": []}), 0)
        with pytest.raises(InvalidSelectionError):
            extract_subschema(s, SchemaSelection.of({"emp": ["ghost"]}), 0)

    def test_foreign_keys_retained_when_endpoints_survive(self):
        s = company()
        out = extract_subschema(s, SchemaSelection.of({"emp": ["dept_id"], "dept": ["id"]}), 0)
        assert len(out.foreign_keys) == 1
        out2 = extract_subschema(s, SchemaSelection.of({"emp": ["name"]}), 0)
        assert out2.foreign_keys == ()


class TestPartition:
    def test_equal_split_two_ways(self):
        parts = partition_schema(company(), 2, "equal-split", seed=0)
        names = [set(p.table_names) for p in parts]
        assert names[0] | names[1] == {"emp", "dept"}
        assert names[0] & names[1] == set()

    def test_half_to_one_takes_floor_half(self):
        parts = partition_schema(company(), 1, "half-to-one", seed=0)
        assert len(parts) == 1
        assert len(parts[0].tables) == 1

    def test_identity_split(self):
        s = company()
        assert partition_schema(s, 1, "equal-split", seed=5) == [s]

    def test_infeasible_partition(self):
        with pytest.raises(PartitionError):
            partition_schema(company(), 3, "equal-split", seed=0)

    def test_deterministic_for_fixed_seed(self):
        a = partition_schema(company(), 2, "equal-split", seed=7)
        b = partition_schema(company(), 2, "equal-split", seed=7)
        assert a == b

    def test_cross_boundary_keys_dropped_from_both_parts(self):
        parts = partition_schema(company(), 2, "equal-split", seed=0)
        for part in parts:
            assert part.foreign_keys == ()


class TestScore:
    def test_empty_schema_scores_zero(self):
        refs = [ColumnRef("emp", "id"), ColumnRef("emp", "name")]
        assert schema_match_score(Schema.empty(), refs) == 0.0

    def test_full_coverage(self):
        s = company()
        refs = [ColumnRef("emp", "id"), ColumnRef("dept", "id")]
        assert schema_match_score(s, refs) == 1.0

    def test_half_coverage(self):
        s = company()
        refs = [ColumnRef("emp", "id"), ColumnRef("ghost", "id")]
        assert schema_match_score(s, refs) == 0.5

    def test_empty_reference_set_scores_one(self):
        assert schema_match_score(Schema.empty(), []) == 1.0


class TestContains:
    def test_contains_cases(self):
        s = Schema("d", (TableDef.of("emp", ["id"]),))
        assert schema_contains(s, ColumnRef("emp", "id"))
        assert schema_contains(s, ColumnRef("EMP", "ID"))
        assert not schema_contains(s, ColumnRef("dept", "id"))
        assert schema_contains(s, "emp")
        assert not schema_contains(s, "dept")


class TestSerialization:
    def test_round_trip(self):
        s = company()
        again = Schema.from_json(s.to_json())
        assert again == s

    def test_json_shape(self):
        data = company().to_dict()
        assert data["db_id"] == "co"
        assert data["tables"][0]["columns"][0] == {"name": "id", "type": "number"}
        assert data["foreign_keys"] == [["emp", "dept_id", "dept", "id"]]
