import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from insightgraph.errors import PipelineError, WildcardPresentError
from insightgraph.expr import parse_expression
from insightgraph.tabular import Attribute, AttributeType, Table
from insightgraph.transforms import (
    Aggregate,
    Bin,
    Derive,
    Filter,
    Groupby,
    Join,
    JoinOn,
    OrderKey,
    Orderby,
    Rollup,
    TransformSpec,
    execute_pipeline,
    referenced_attributes,
    spec_from_json,
    spec_to_json,
)

from oracles import brute_inner_join, brute_orderby

Q = AttributeType.QUANTITATIVE
N = AttributeType.NOMINAL
T = AttributeType.TEMPORAL


def make_table(name, cols, rows):
    return Table(name, [Attribute(n, k) for n, k in cols], rows)


@pytest.fixture
def crime_fixture():
    # 7 rows over four dates: d1 x3, d2 x2, d3 x1, d4 x1
    days = ["2015-04-27"] * 3 + ["2015-04-26"] * 2 + ["2015-04-25"] + ["2015-04-24"]
    return make_table("baltimoreCrime", [("CrimeDate", T)], [{"CrimeDate": d} for d in days])


def top_days_spec(limit):
    return TransformSpec(
        ("baltimoreCrime",),
        (
            Groupby(("CrimeDate",)),
            Rollup((Aggregate("count", "count"),)),
            Orderby((OrderKey("count", "desc"),)),
            Filter(parse_expression(f"rank() <= {limit}")),
        ),
    )


class TestPipeline:
    def test_top_days(self, crime_fixture):
        # oracle: counts 3, 2, 1, 1 by hand; stable ties keep date order
        out = execute_pipeline(top_days_spec(3), {"baltimoreCrime": crime_fixture})
        assert [(r["CrimeDate"], r["count"]) for r in out.iter_rows()] == [
            ("2015-04-27", 3),
            ("2015-04-26", 2),
            ("2015-04-25", 1),
        ]

    def test_identity_pipeline(self, crime_fixture):
        out = execute_pipeline(
            TransformSpec(("baltimoreCrime",)), {"baltimoreCrime": crime_fixture}
        )
        assert out == crime_fixture

    def test_global_rollup(self):
        table = make_table("t", [("x", Q)], [{"x": i} for i in range(12)])
        spec = TransformSpec(("t",), (Rollup((Aggregate("count", "count"),)),))
        out = execute_pipeline(spec, {"t": table})
        assert out.rows == [{"count": 12}]

    def test_rollup_needs_groupby_or_first(self):
        table = make_table("t", [("x", Q)], [{"x": 1}])
        spec = TransformSpec(
            ("t",),
            (Filter(parse_expression("x > 0")), Rollup((Aggregate("count", "count"),))),
        )
        with pytest.raises(PipelineError, match="rollup"):
            execute_pipeline(spec, {"t": table})

    def test_groupby_must_feed_rollup(self):
        table = make_table("t", [("x", Q)], [{"x": 1}])
        spec = TransformSpec(("t",), (Groupby(("x",)), Filter(parse_expression("x > 0"))))
        with pytest.raises(PipelineError, match="groupby"):
            execute_pipeline(spec, {"t": table})

    def test_wildcard_rejected(self, crime_fixture):
        spec = TransformSpec(("baltimoreCrime",), (Groupby(("*",)),))
        with pytest.raises(WildcardPresentError):
            execute_pipeline(spec, {"baltimoreCrime": crime_fixture})

    def test_unresolved_source(self, crime_fixture):
        with pytest.raises(PipelineError, match="unresolved source"):
            execute_pipeline(TransformSpec(("missing",)), {"baltimoreCrime": crime_fixture})

    def test_unknown_attribute(self, crime_fixture):
        spec = TransformSpec(("baltimoreCrime",), (Groupby(("nope",)),))
        with pytest.raises(PipelineError, match="unknown attribute"):
            execute_pipeline(spec, {"baltimoreCrime": crime_fixture})

    def test_derive_year_and_boolean(self):
        table = make_table("t", [("d", T)], [{"d": "2015-04-27"}, {"d": "1999-01-02"}])
        spec = TransformSpec(
            ("t",),
            (
                Derive("year", parse_expression("year(d)")),
                Derive("modern", parse_expression("year >= 2000")),
            ),
        )
        out = execute_pipeline(spec, {"t": table})
        assert out.column("year") == [2015, 1999]
        # booleans materialize as strings so tables stay CSV-representable
        assert out.column("modern") == ["true", "false"]
        assert out.attribute("year").attribute_type is Q
        assert out.attribute("modern").attribute_type is N

    def test_filter_null_predicate_drops_row(self):
        table = make_table("t", [("x", Q)], [{"x": 5}, {"x": None}, {"x": 1}])
        spec = TransformSpec(("t",), (Filter(parse_expression("x > 2")),))
        out = execute_pipeline(spec, {"t": table})
        assert out.column("x") == [5]

    def test_output_never_aliases_input(self, crime_fixture):
        out = execute_pipeline(
            TransformSpec(("baltimoreCrime",)), {"baltimoreCrime": crime_fixture}
        )
        mutated = out.rows
        mutated[0]["CrimeDate"] = "1900-01-01"
        assert crime_fixture.rows[0]["CrimeDate"] == "2015-04-27"
        assert out.rows[0]["CrimeDate"] == "2015-04-27"

    def test_purity_same_spec_twice(self, crime_fixture):
        datasets = {"baltimoreCrime": crime_fixture}
        assert execute_pipeline(top_days_spec(3), datasets) == execute_pipeline(
            top_days_spec(3), datasets
        )

    def test_rollup_resets_rank_legality(self):
        table = make_table("t", [("g", N), ("x", Q)], [{"g": "a", "x": 1}, {"g": "b", "x": 2}])
        spec = TransformSpec(
            ("t",),
            (
                Orderby((OrderKey("x", "desc"),)),
                Groupby(("g",)),
                Rollup((Aggregate("count", "count"),)),
                Filter(parse_expression("rank() <= 1")),
            ),
        )
        with pytest.raises(PipelineError, match="orderby"):
            execute_pipeline(spec, {"t": table})

    def test_rank_survives_chained_filters(self):
        table = make_table("t", [("x", Q)], [{"x": v} for v in (1, 2, 3)])
        spec = TransformSpec(
            ("t",),
            (
                Orderby((OrderKey("x", "desc"),)),
                Filter(parse_expression("x > 0")),
                Filter(parse_expression("rank() <= 2")),
            ),
        )
        assert execute_pipeline(spec, {"t": table}).column("x") == [3, 2]

    def test_derive_replaces_existing_column_in_place(self):
        table = make_table("t", [("g", N), ("x", Q)], [{"g": "a", "x": 1}, {"g": "b", "x": 2}])
        spec = TransformSpec(("t",), (Derive("x", parse_expression("x * 10")),))
        out = execute_pipeline(spec, {"t": table})
        assert out.attribute_names() == ["g", "x"]
        assert out.column("x") == [10, 20]

    def test_global_rollup_on_empty_table(self):
        table = make_table("t", [("x", Q)], [])
        spec = TransformSpec(
            ("t",), (Rollup((Aggregate("count", "count"), Aggregate("s", "sum", "x"))),)
        )
        assert execute_pipeline(spec, {"t": table}).rows == [{"count": 0, "s": None}]


class TestOrderby:
    def test_stability_on_equal_keys(self):
        rows = [{"k": 1, "tag": f"r{i}"} for i in range(6)]
        table = make_table("t", [("k", Q), ("tag", N)], rows)
        spec = TransformSpec(("t",), (Orderby((OrderKey("k", "asc"),)),))
        out = execute_pipeline(spec, {"t": table})
        assert out.column("tag") == [f"r{i}" for i in range(6)]

    def test_null_placement(self):
        rows = [{"x": 2}, {"x": None}, {"x": 1}]
        table = make_table("t", [("x", Q)], rows)
        asc = TransformSpec(("t",), (Orderby((OrderKey("x", "asc"),)),))
        desc = TransformSpec(("t",), (Orderby((OrderKey("x", "desc"),)),))
        assert execute_pipeline(asc, {"t": table}).column("x") == [1, 2, None]
        assert execute_pipeline(desc, {"t": table}).column("x") == [None, 2, 1]

    def test_ordinal_uses_declared_categories(self):
        attr = Attribute("level", AttributeType.ORDINAL, ("low", "mid", "high"))
        table = Table("t", [attr], [{"level": v} for v in ["high", "low", "mid"]])
        spec = TransformSpec(("t",), (Orderby((OrderKey("level", "asc"),)),))
        out = execute_pipeline(spec, {"t": table})
        assert out.column("level") == ["low", "mid", "high"]

    def test_matches_comparator_oracle(self):
        rng = random.Random(7)
        rows = [
            {"a": rng.choice([None, 1, 2, 3]), "b": rng.choice(["x", "y", None])}
            for _ in range(40)
        ]
        table = make_table("t", [("a", Q), ("b", N)], rows)
        keys = (OrderKey("a", "desc"), OrderKey("b", "asc"))
        out = execute_pipeline(TransformSpec(("t",), (Orderby(keys),)), {"t": table})
        assert out.rows == brute_orderby(table.rows, [("a", "desc"), ("b", "asc")])


class TestBin:
    def test_every_value_in_exactly_one_bin(self):
        rng = random.Random(3)
        rows = [{"x": rng.uniform(-50, 50)} for _ in range(200)] + [{"x": None}]
        table = make_table("t", [("x", Q)], rows)
        spec = TransformSpec(("t",), (Bin("x", "bin", bins=7),))
        out = execute_pipeline(spec, {"t": table})
        assert len(out) == 200  # null dropped
        values = [r["x"] for r in table.rows if r["x"] is not None]
        lo, hi = min(values), max(values)
        width = (hi - lo) / 7
        for row in out.iter_rows():
            start, end = row["bin_start"], row["bin_end"]
            assert start <= row["x"] and (row["x"] < end or (row["x"] == hi and row["x"] <= end))
            assert abs(end - start - width) < 1e-9

    def test_max_lands_in_last_bin(self):
        table = make_table("t", [("x", Q)], [{"x": v} for v in (0.0, 5.0, 10.0)])
        out = execute_pipeline(TransformSpec(("t",), (Bin("x", "b", bins=2),)), {"t": table})
        tops = [r for r in out.iter_rows() if r["x"] == 10.0]
        assert tops[0]["b_start"] == 5.0

    def test_constant_column_single_bin(self):
        table = make_table("t", [("x", Q)], [{"x": 4}, {"x": 4}])
        out = execute_pipeline(TransformSpec(("t",), (Bin("x", "b", bins=3),)), {"t": table})
        assert all(r["b_start"] == 4 and r["b_end"] == 4 for r in out.iter_rows())

    def test_explicit_step_width(self):
        table = make_table("t", [("x", Q)], [{"x": v} for v in (0, 1, 2, 3, 4)])
        out = execute_pipeline(TransformSpec(("t",), (Bin("x", "b", step=2.0),)), {"t": table})
        starts = sorted({r["b_start"] for r in out.iter_rows()})
        assert starts == [0.0, 2.0]

    def test_requires_exactly_one_sizing(self):
        table = make_table("t", [("x", Q)], [])
        with pytest.raises(PipelineError, match="exactly one"):
            execute_pipeline(TransformSpec(("t",), (Bin("x", "b"),)), {"t": table})


class TestJoin:
    def test_matches_nested_loop_oracle(self):
        rng = random.Random(11)
        left_rows = [
            {"k": rng.choice(["a", "b", "c", None]), "v": rng.randint(0, 5)} for _ in range(30)
        ]
        right_rows = [
            {"key": rng.choice(["a", "b", "d", None]), "v": rng.randint(0, 5)} for _ in range(25)
        ]
        left = make_table("L", [("k", N), ("v", Q)], left_rows)
        right = make_table("R", [("key", N), ("v", Q)], right_rows)
        spec = TransformSpec(("L", "R"), (Join("R", (JoinOn("k", "key"),)),))
        out = execute_pipeline(spec, {"L": left, "R": right})
        expected = brute_inner_join(
            left.rows, right.rows, [("k", "key")], ["k", "v"], ["key", "v"]
        )
        assert out.rows == expected
        assert out.attribute_names() == ["k", "v", "key", "v_r"]

    def test_join_right_must_be_declared(self):
        left = make_table("L", [("k", N)], [])
        right = make_table("R", [("k", N)], [])
        spec = TransformSpec(("L",), (Join("R", (JoinOn("k", "k"),)),))
        with pytest.raises(PipelineError, match="declared source"):
            execute_pipeline(spec, {"L": left, "R": right})

    def test_key_type_mismatch(self):
        left = make_table("L", [("k", N)], [])
        right = make_table("R", [("k", Q)], [])
        spec = TransformSpec(("L", "R"), (Join("R", (JoinOn("k", "k"),)),))
        with pytest.raises(PipelineError, match="different types"):
            execute_pipeline(spec, {"L": left, "R": right})


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.tuples(st.sampled_from(["a", "b", None]), st.integers(0, 3)),
        max_size=30,
    )
)
def test_count_conservation(pairs):
    rows = [{"g": g, "x": x} for g, x in pairs]
    table = make_table("t", [("g", N), ("x", Q)], rows)
    spec = TransformSpec(
        ("t",), (Groupby(("g",)), Rollup((Aggregate("count", "count"),)))
    )
    out = execute_pipeline(spec, {"t": table})
    assert sum(r["count"] for r in out.iter_rows()) == len(rows)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.one_of(st.none(), st.integers(-5, 5)), max_size=25), st.integers(-5, 5))
def test_filter_soundness(values, threshold):
    rows = [{"x": v} for v in values]
    table = make_table("t", [("x", Q)], rows)
    spec = TransformSpec(("t",), (Filter(parse_expression(f"x > {threshold}")),))
    out = execute_pipeline(spec, {"t": table})
    kept = out.column("x")
    assert all(v is not None and v > threshold for v in kept)
    excluded = list(values)
    for v in kept:
        excluded.remove(v)
    assert all(v is None or v <= threshold for v in excluded)


class TestReferencedAttributes:
    def test_baltimore_pipeline(self, crime_fixture):
        refs = referenced_attributes(top_days_spec(3), {"baltimoreCrime": crime_fixture})
        assert refs == {("baltimoreCrime", "CrimeDate")}

    def test_empty_pipeline(self, crime_fixture):
        assert referenced_attributes(
            TransformSpec(("baltimoreCrime",)), {"baltimoreCrime": crime_fixture}
        ) == set()

    def test_derived_columns_are_not_source_attributes(self):
        table = make_table("src", [("incident_date", T)], [])
        spec = TransformSpec(
            ("src",),
            (
                Derive("y", parse_expression("year(incident_date)")),
                Filter(parse_expression("y >= 2000")),
            ),
        )
        assert referenced_attributes(spec, {"src": table}) == {("src", "incident_date")}

    def test_join_keys_count_for_both_sides(self):
        left = make_table("L", [("k", N), ("v", Q)], [])
        right = make_table("R", [("key", N)], [])
        spec = TransformSpec(("L", "R"), (Join("R", (JoinOn("k", "key"),)),))
        assert referenced_attributes(spec, {"L": left, "R": right}) == {
            ("L", "k"),
            ("R", "key"),
        }


class TestSpecJson:
    def test_round_trip(self):
        spec = TransformSpec(
            ("strikes",),
            (
                Filter(parse_expression("isValid(precip)")),
                Derive("year", parse_expression("year(incident_date)")),
                Groupby(("year", "precip")),
                Rollup((Aggregate("count", "count"), Aggregate("m", "mean", "speed"))),
                Orderby((OrderKey("year", "asc"), OrderKey("count", "desc"))),
                Bin("speed", "sp", bins=4),
                Join("other", (JoinOn("year", "y"),)),
            ),
        )
        assert spec_from_json(spec_to_json(spec)) == spec

    def test_wildcard_round_trip(self):
        spec = TransformSpec(
            ("t",),
            (Groupby(("*",)), "*", Filter("*"), Derive("out", "*")),
        )
        again = spec_from_json(spec_to_json(spec))
        assert again == spec

    def test_bad_op_rejected(self):
        with pytest.raises(PipelineError, match="unknown transform op"):
            spec_from_json({"sources": ["t"], "transforms": [{"op": "pivot", "args": {}}]})
