"""Acceptance criteria, one test per criterion.

Each criterion prints a PASS/FAIL line (run with ``pytest -s`` to watch
them stream); tolerances are pinned here and nowhere else. The whole
module stays well under a minute.
"""

import contextlib
import json
import random
import warnings

import numpy as np
import pytest

from insightgraph.errors import DuplicateEdgeWarning
from insightgraph.expr import parse_expression
from insightgraph.insight import TaskStatus, satisfies, task_status
from insightgraph.knowledge import results
from insightgraph.metrics import breadth, depth, graph_stats, validate
from insightgraph.relationships import (
    DecisionTreeModel,
    IsolationForestModel,
    KernelDensityModel,
    KnnModel,
    LinearRegressionModel,
    NaiveBayesModel,
)
from insightgraph.scenarios import (
    BALTIMORE_CENSUS,
    baltimore_spec,
    birdstrikes_spec,
    movies_spec,
    rents_spec,
    run_baltimore,
    run_birdstrikes,
    run_rents,
)
from insightgraph.specfile import graph_from_json, graph_to_json, load_spec_dict
from insightgraph.tabular import Attribute, AttributeType, Table, load_csv, write_csv
from insightgraph.transforms import (
    Aggregate,
    Filter,
    Groupby,
    Join,
    JoinOn,
    OrderKey,
    Orderby,
    Rollup,
    TransformSpec,
    execute_pipeline,
)

from dot_checker import parse_dot
from oracles import (
    brute_filter,
    brute_groupby_rollup,
    brute_inner_join,
    brute_orderby,
    exhaustive_best_split,
    exhaustive_knn_vote,
    normal_equations,
)
from test_insight import build_random_world, widen_once
from test_knowledge import random_graph_ops

Q = AttributeType.QUANTITATIVE
N = AttributeType.NOMINAL


@contextlib.contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException:
        print(f"[acceptance] criterion {number}: FAIL  {title}")
        raise
    print(f"[acceptance] criterion {number}: PASS  {title}")


def test_criterion_1_baltimore_scenario():
    with criterion(1, "baltimore census, satisfied task, zero violations"):
        result = run_baltimore()
        graph = result.graph
        stats = graph_stats(graph)
        assert {k: stats[k] for k in ("concepts", "instances", "nodes")} == BALTIMORE_CENSUS
        assert stats["concepts"] == 2 and stats["instances"] == 1
        assert stats["nodes"]["domain"] == 1 and stats["nodes"]["analytic"] == 2
        assert stats["nodes"]["insight"] == 1 and stats["nodes"]["objective"] == 2
        assert stats["nodes"]["task"] == 1
        assert task_status(graph, "protestsTask") is TaskStatus.SATISFIED
        assert validate(graph) == []
        assert all(c.passed for c in result.checks), [c for c in result.checks if not c.passed]


def test_criterion_2_rents_scenario():
    with criterion(2, "rents depths all 1 and breadth ordering"):
        result = run_rents()
        graph, datasets = result.graph, result.datasets
        names = ("minmaxRollup", "normalFit", "rentHistogram")
        assert [depth(graph, n) for n in names] == [1, 1, 1]
        b = {n: breadth(graph, n, datasets) for n in names}
        assert len(result.tables["histogram"]) >= 3
        assert b["minmaxRollup"] < b["rentHistogram"]
        assert b["normalFit"] < b["rentHistogram"]
        assert all(c.passed for c in result.checks), [c for c in result.checks if not c.passed]


def test_criterion_3_birdstrikes_scenario():
    with criterion(3, "bird-strike trend slopes by condition"):
        result = run_birdstrikes()
        precip = result.extras["precip_slopes"]
        sky = result.extras["sky_slopes"]
        assert precip["rain"] > 0 and abs(precip["rain"]) >= 0.5
        for condition, slope in precip.items():
            if condition != "rain":
                assert slope <= 0 and abs(slope) >= 0.5, (condition, slope)
        for condition, slope in sky.items():
            assert slope > 0 and abs(slope) >= 0.5, (condition, slope)
        assert all(c.passed for c in result.checks), [c for c in result.checks if not c.passed]


# ---------------------------------------------------------------------------
# Criterion 4: engine vs brute force on random tables

_LETTERS = ["ax", "bee", "cy", "dz", "ee"]


def _random_table(rng, name, max_rows=100, max_cols=6):
    n_cols = rng.randint(1, max_cols)
    schema, kinds = [], []
    for i in range(n_cols):
        kind = rng.choice([Q, Q, N])
        schema.append(Attribute(f"c{i}", kind))
        kinds.append(kind)
    rows = []
    for _ in range(rng.randint(0, max_rows)):
        row = {}
        for attr in schema:
            if rng.random() < 0.15:
                row[attr.name] = None
            elif attr.attribute_type is Q:
                row[attr.name] = rng.choice([rng.randint(-20, 20), round(rng.uniform(-5, 5), 3)])
            else:
                row[attr.name] = rng.choice(_LETTERS)
        rows.append(row)
    return Table(name, schema, rows)


def _columns_of(table, kind):
    return [a.name for a in table.schema if a.attribute_type is kind]


def _check_groupby_rollup(rng, table):
    keys = rng.sample(table.attribute_names(), rng.randint(1, min(2, len(table.schema))))
    aggregates = [Aggregate("n", "count")]
    quantitative = [c for c in _columns_of(table, Q) if c not in keys]
    if quantitative:
        col = rng.choice(quantitative)
        aggregates.append(Aggregate("agg", rng.choice(["sum", "mean", "min", "max"]), col))
    spec = TransformSpec((table.name,), (Groupby(tuple(keys)), Rollup(tuple(aggregates))))
    out = execute_pipeline(spec, {table.name: table})
    expected = brute_groupby_rollup(table.rows, keys, [(a.out, a.op, a.attribute) for a in aggregates])
    assert out.rows == expected


def _check_filter(rng, table):
    quantitative = _columns_of(table, Q)
    nominal = _columns_of(table, N)
    if quantitative and (not nominal or rng.random() < 0.6):
        col = rng.choice(quantitative)
        threshold = rng.randint(-10, 10)
        text = f"{col} > {threshold}" if rng.random() < 0.5 else f"{col} <= {threshold}"
        op_is_gt = text.count(">") == 1

        def predicate(row, c=col, t=threshold, gt=op_is_gt):
            v = row[c]
            if v is None:
                return None
            return v > t if gt else v <= t

    else:
        col = rng.choice(nominal)
        value = rng.choice(_LETTERS)
        text = f"{col} == '{value}'"

        def predicate(row, c=col, v=value):
            if row[c] is None:
                return None
            return row[c] == v

    spec = TransformSpec((table.name,), (Filter(parse_expression(text)),))
    out = execute_pipeline(spec, {table.name: table})
    assert out.rows == brute_filter(table.rows, predicate)


def _check_orderby(rng, table):
    keys = rng.sample(table.attribute_names(), rng.randint(1, min(2, len(table.schema))))
    plan = [(k, rng.choice(["asc", "desc"])) for k in keys]
    spec = TransformSpec(
        (table.name,), (Orderby(tuple(OrderKey(k, d) for k, d in plan)),)
    )
    out = execute_pipeline(spec, {table.name: table})
    assert out.rows == brute_orderby(table.rows, plan)


def _check_join(rng, left):
    kind = rng.choice([Q, N])
    left_keys = _columns_of(left, kind)
    if not left_keys:
        return
    left_key = rng.choice(left_keys)
    pool = [rng.randint(-20, 20) for _ in range(6)] if kind is Q else _LETTERS
    right_rows = [
        {"k": rng.choice(pool + [None]), "payload": rng.randint(0, 9), "c0": rng.choice(_LETTERS)}
        for _ in range(rng.randint(0, 40))
    ]
    right = Table(
        "right",
        [Attribute("k", kind), Attribute("payload", Q), Attribute("c0", N)],
        right_rows,
    )
    spec = TransformSpec(
        (left.name, "right"), (Join("right", (JoinOn(left_key, "k"),)),)
    )
    out = execute_pipeline(spec, {left.name: left, "right": right})
    expected = brute_inner_join(
        left.rows, right.rows, [(left_key, "k")], left.attribute_names(), right.attribute_names()
    )
    assert out.rows == expected


def test_criterion_4_transform_engine_oracle_equivalence():
    with criterion(4, "transform engine equals brute force on 200 random tables"):
        rng = random.Random(20240)
        for i in range(200):
            table = _random_table(rng, "t")
            _check_groupby_rollup(rng, table)
            _check_filter(rng, table)
            _check_orderby(rng, table)
            _check_join(rng, table)


# ---------------------------------------------------------------------------
# Criterion 5: relationship-model oracles

def _qattr(name):
    return Attribute(name, Q)


def _nattr(name):
    return Attribute(name, N)


def test_criterion_5_relationship_model_oracles():
    with criterion(5, "model zoo matches its independent oracles"):
        # linear regression vs explicit normal equations, 1e-9 relative
        rng = np.random.default_rng(7)
        for _ in range(100):
            n, d = int(rng.integers(10, 50)), int(rng.integers(1, 4))
            x = rng.normal(0, 2, size=(n, d))
            y = rng.normal(0, 1, size=n) + x @ rng.normal(0, 1, size=d)
            rows = [
                {**{f"x{i}": float(x[j, i]) for i in range(d)}, "y": float(y[j])} for j in range(n)
            ]
            trained = LinearRegressionModel(
                name="lr", inputs=tuple(_qattr(f"x{i}") for i in range(d)), output=_qattr("y")
            ).train(rows)
            got = np.array([trained.fit.intercept, *trained.fit.coefficients])
            expected = normal_equations(x, y)
            assert np.linalg.norm(got - expected) <= 1e-9 * max(1.0, np.linalg.norm(expected))

        # decision-tree root split vs exhaustive Gini argmin, 50 instances
        pyrng = random.Random(99)
        inputs = (_nattr("shape"), _qattr("size"))
        for _ in range(50):
            rows = [
                {
                    "shape": pyrng.choice(["round", "square", "spiky"]),
                    "size": round(pyrng.uniform(0, 10), 2),
                    "label": pyrng.choice(["yes", "no"]),
                }
                for _ in range(pyrng.randint(6, 50))
            ]
            rows[0] = {**rows[0], "label": "yes"}
            rows[1] = {**rows[1], "label": "no"}
            model = DecisionTreeModel(name="dt", inputs=inputs, output=_nattr("label"))
            got = model.best_split(rows)
            expected = exhaustive_best_split(rows, inputs, "label")
            assert (got is None) == (expected is None)
            if got is not None:
                assert (got[0].name, got[1], got[2]) == expected[:3]

        # KNN vs exhaustive-distance vote
        knn_rows = [
            {
                "shape": pyrng.choice(["round", "square", "spiky"]),
                "size": pyrng.uniform(0, 10),
                "label": pyrng.choice(["yes", "no", "maybe"]),
            }
            for _ in range(60)
        ]
        knn_rows[0] = {**knn_rows[0], "label": "yes"}
        knn_rows[1] = {**knn_rows[1], "label": "no"}
        trained_knn = KnnModel(name="knn", inputs=inputs, output=_nattr("label")).train(knn_rows)
        points = [(r["shape"], r["size"]) for r in knn_rows]
        labels = [r["label"] for r in knn_rows]
        for _ in range(40):
            probe = {"shape": pyrng.choice(["round", "square", "spiky"]), "size": pyrng.uniform(0, 10)}
            expected = exhaustive_knn_vote(
                points, labels, (probe["shape"], probe["size"]), inputs,
                trained_knn.fit.means, trained_knn.fit.stds, k=3,
            )
            assert trained_knn.predict(probe) == expected

        # naive Bayes posteriors sum to 1 within 1e-12
        nb = NaiveBayesModel(name="nb", inputs=inputs, output=_nattr("label")).train(knn_rows)
        for _ in range(50):
            probe = {"shape": pyrng.choice(["round", "square", "spiky"]), "size": pyrng.uniform(0, 10)}
            assert abs(sum(nb.predict_proba(probe).values()) - 1.0) <= 1e-12

        # KDE integrates to 1 within 1e-3 (trapezoid quadrature oracle)
        values = rng.normal(0, 1.5, size=50)
        kde = KernelDensityModel(name="kde", inputs=(_qattr("v"),)).train(
            [{"v": float(v)} for v in values]
        )
        h = kde.fit.bandwidth
        grid = np.linspace(values.min() - 5 * h, values.max() + 5 * h, 4001)
        integral = np.trapezoid([kde.score(float(g)) for g in grid], grid)
        assert abs(integral - 1.0) <= 1e-3

        # isolation forest: scores in (0,1), planted outlier on top
        cluster = [{"x": float(v)} for v in rng.normal(0, 1, size=100)]
        cluster.append({"x": 25.0})
        iso = IsolationForestModel(name="iso", inputs=(_qattr("x"),), seed=13).train(cluster)
        scores = [iso.score(r) for r in cluster]
        assert all(0.0 < s < 1.0 for s in scores)
        assert scores[-1] > max(scores[:-1])


# ---------------------------------------------------------------------------
# Criterion 6: wildcard semantics

def test_criterion_6_wildcard_semantics():
    with criterion(6, "reflexivity, monotonicity x1000, complete, crime objectives"):
        # reflexivity over randomized fully specified insights
        for seed in range(60):
            _, graph, _, _, insights = build_random_world(seed)
            for name in insights:
                assert satisfies(graph, name, name)

        # monotonicity under wildcard widening, 1000 randomized cases
        from insightgraph.insight import complete, create_insight, is_fully_specified

        cases = 0
        seed = 0
        while cases < 1000:
            rng, graph, domain_names, analytic_names, insights = build_random_world(seed)
            objective = create_insight(
                graph,
                "objective",
                rng.sample(domain_names, rng.randint(1, 2)),
                rng.sample(analytic_names, rng.randint(1, 2)),
            )
            before = {name: satisfies(graph, name, objective) for name in insights}
            if widen_once(rng, graph, objective):
                for name, was in before.items():
                    cases += 1
                    if was:
                        assert satisfies(graph, name, objective), (seed, name)
            seed += 1

        # complete() always yields a fully specified node
        for seed in range(50):
            rng, graph, domain_names, analytic_names, _ = build_random_world(seed + 5000)
            objective = create_insight(graph, "obj", "*", "*")
            done = complete(
                graph,
                objective,
                {
                    "domainKnowledge": rng.sample(domain_names, 2),
                    "analyticKnowledge": rng.sample(analytic_names, 2),
                },
            )
            assert is_fully_specified(graph, done)

        # the two crime-scenario objectives are both met by johnsInsight
        graph, _ = load_spec_dict(baltimore_spec())
        assert satisfies(graph, "johnsInsight", "protestsObjective")
        assert satisfies(graph, "johnsInsight", "aprilCrimeObjective")


# ---------------------------------------------------------------------------
# Criterion 7: graph invariants under fuzzing

def test_criterion_7_graph_fuzzing():
    with criterion(7, "10,000 random graph ops keep every invariant"):
        from oracles import brute_longest_chain

        operations = 0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DuplicateEdgeWarning)
            # 125 larger graphs exercise cycle/self-edge/duplicate paths
            for seed in range(125):
                graph, attempted = random_graph_ops(seed, 64)
                operations += attempted
                assert validate(graph) == []
            # 200 small graphs (<= 12 nodes): depth vs brute-force paths
            for seed in range(1000, 1200):
                graph, attempted = random_graph_ops(seed, 10)
                operations += attempted
                assert validate(graph) == []
                assert len(graph.nodes) <= 12
                sources_of = lambda name: graph.node(name).sources
                for name in graph.nodes:
                    assert depth(graph, name) == brute_longest_chain(sources_of, name)
        assert operations == 10_000


# ---------------------------------------------------------------------------
# Criterion 8: serialization round-trips

def test_criterion_8_round_trips(tmp_path):
    with criterion(8, "spec/graph JSON, CSV, and DOT round-trips"):
        for builder in (baltimore_spec, movies_spec, rents_spec, birdstrikes_spec):
            graph, datasets = load_spec_dict(builder())
            payload = graph_to_json(graph)
            rebuilt = graph_from_json(json.loads(json.dumps(payload)))
            assert validate(rebuilt) == []
            assert graph_stats(rebuilt) == graph_stats(graph)

            from insightgraph.dot import graph_to_dot

            nodes, edges = parse_dot(graph_to_dot(graph))
            assert nodes == len(graph.nodes)
            assert len(edges) == sum(len(n.sources) for n in graph.nodes.values()) + sum(
                len(n.related) for n in graph.nodes.values()
            ) // 2

        # exported CSV reloads value-identically
        graph, datasets = load_spec_dict(birdstrikes_spec())
        direct = results(graph, "precipNode", datasets)
        path = tmp_path / "precip.csv"
        write_csv(direct, path)
        assert load_csv(path, direct.schema, name=direct.name) == direct
