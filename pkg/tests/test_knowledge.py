import random

import pytest

from insightgraph.errors import DuplicateEdgeWarning, GraphError
from insightgraph.expr import parse_expression
from insightgraph.knowledge import (
    KnowledgeGraph,
    add_related,
    add_source,
    add_target,
    create_analytic_node,
    create_concept,
    create_domain_node,
    create_instance,
    results,
)
from insightgraph.metrics import validate
from insightgraph.relationships import EvaluationReport
from insightgraph.tabular import Attribute, AttributeType, Table
from insightgraph.transforms import Aggregate, Filter, Groupby, Rollup, TransformSpec

Q = AttributeType.QUANTITATIVE
N = AttributeType.NOMINAL


@pytest.fixture
def graph():
    return KnowledgeGraph()


def crime_table():
    rows = [
        {"premise": "street", "label": "theft"},
        {"premise": "street", "label": "theft"},
        {"premise": "home", "label": "burglary"},
        {"premise": "home", "label": "burglary"},
    ]
    return Table("crime", [Attribute("premise", N), Attribute("label", N)], rows)


def count_spec(source="crime"):
    return TransformSpec((source,), (Groupby(("premise",)), Rollup((Aggregate("count", "count"),))))


class TestConcepts:
    def test_root_and_child(self, graph):
        create_concept(graph, "Protest")
        child = create_concept(graph, "ViolentCrime", ["Protest"])
        assert child.parents == ("Protest",)

    def test_duplicate_name(self, graph):
        create_concept(graph, "Crime")
        with pytest.raises(GraphError, match="duplicate concept"):
            create_concept(graph, "Crime")

    def test_unresolved_parent(self, graph):
        with pytest.raises(GraphError, match="no concept"):
            create_concept(graph, "Kid", ["Ghost"])

    def test_instance_metadata_checked(self, graph):
        create_concept(graph, "Protest")
        create_instance(
            graph,
            "article",
            "Protest",
            {"attributes": [{"name": "link", "type": "nominal"}], "values": {"link": "u"}},
        )
        with pytest.raises(GraphError, match="no declared attribute"):
            create_instance(graph, "bad", "Protest", {"attributes": [], "values": {"x": 1}})

    def test_instance_with_empty_metadata(self, graph):
        create_concept(graph, "Protest")
        inst = create_instance(graph, "bare", "Protest")
        assert inst.values == {}


class TestNodes:
    def test_domain_node_needs_instance(self, graph):
        with pytest.raises(GraphError, match="no instance"):
            create_domain_node(graph, "n", "missing")

    def test_two_nodes_may_cite_one_instance(self, graph):
        create_concept(graph, "Protest")
        create_instance(graph, "article", "Protest")
        create_domain_node(graph, "a", "article")
        create_domain_node(graph, "b", "article")
        assert {n.name for n in graph.nodes_of_kind("domain")} == {"a", "b"}

    def test_duplicate_node_name(self, graph):
        create_concept(graph, "Protest")
        create_instance(graph, "article", "Protest")
        create_domain_node(graph, "a", "article")
        with pytest.raises(GraphError, match="duplicate node"):
            create_domain_node(graph, "a", "article")

    def test_analytic_node_needs_content(self, graph):
        with pytest.raises(GraphError, match="transformation or a relationship"):
            create_analytic_node(graph, "empty", timestamp=1)

    def test_relationship_only_node(self, graph):
        node = create_analytic_node(
            graph,
            "clf",
            timestamp=1,
            relationship={
                "name": "m",
                "kind": "knnClassification",
                "inputs": ["premise"],
                "output": "label",
            },
            data_source="crime",
        )
        assert node.relationship["hyperparameters"] == {"k": 3}

    def test_negative_timestamp_rejected(self, graph):
        with pytest.raises(GraphError, match="non-negative"):
            create_analytic_node(graph, "n", timestamp=-5, transform=count_spec())


class TestEdges:
    def make_three(self, graph):
        for name in "abc":
            create_analytic_node(graph, name, timestamp=1, transform=count_spec())
        return graph

    def test_symmetry(self, graph):
        self.make_three(graph)
        add_target(graph, "a", "b")
        assert graph.node("b").sources == ["a"]
        assert graph.node("a").targets == ["b"]

    def test_add_source_equals_reversed_add_target(self, graph):
        self.make_three(graph)
        add_source(graph, "a", "b")  # b -> a
        assert graph.node("a").sources == ["b"]
        assert graph.node("b").targets == ["a"]

    def test_self_edge_rejected(self, graph):
        self.make_three(graph)
        with pytest.raises(GraphError, match="self-edge"):
            add_source(graph, "a", "a")

    def test_cycle_rejected(self, graph):
        self.make_three(graph)
        add_source(graph, "a", "b")
        with pytest.raises(GraphError, match="cycle"):
            add_source(graph, "b", "a")

    def test_longer_cycle_rejected(self, graph):
        self.make_three(graph)
        add_source(graph, "b", "a")
        add_source(graph, "c", "b")
        with pytest.raises(GraphError, match="cycle"):
            add_source(graph, "a", "c")

    def test_duplicate_edge_warns_and_noops(self, graph):
        self.make_three(graph)
        add_source(graph, "a", "b")
        with pytest.warns(DuplicateEdgeWarning):
            add_source(graph, "a", "b")
        assert graph.node("a").sources == ["b"]
        assert graph.node("b").targets == ["a"]

    def test_related_is_symmetric(self, graph):
        self.make_three(graph)
        add_related(graph, "a", "b")
        assert graph.node("a").related == ["b"]
        assert graph.node("b").related == ["a"]

    def test_related_duplicate_from_either_side_warns(self, graph):
        self.make_three(graph)
        add_related(graph, "a", "b")
        with pytest.warns(DuplicateEdgeWarning):
            add_related(graph, "b", "a")

    def test_unresolved_node(self, graph):
        with pytest.raises(GraphError, match="no node"):
            add_source(graph, "x", "y")


class TestResults:
    def test_transform_node_returns_table(self, graph):
        create_analytic_node(graph, "counts", timestamp=1, transform=count_spec())
        table = results(graph, "counts", {"crime": crime_table()})
        assert isinstance(table, Table)
        assert {(r["premise"], r["count"]) for r in table.iter_rows()} == {("street", 2), ("home", 2)}

    def test_relationship_node_returns_report(self, graph):
        create_analytic_node(
            graph,
            "clf",
            timestamp=1,
            relationship={
                "name": "m",
                "kind": "decisionTreeClassification",
                "inputs": ["premise"],
                "output": "label",
            },
            data_source="crime",
        )
        report = results(graph, "clf", {"crime": crime_table()})
        assert isinstance(report, EvaluationReport)
        assert report.metrics["accuracy"] == 1.0

    def test_combined_node_trains_on_transform_output(self, graph):
        # transform filters to one premise ... then a density fit runs on
        # the filtered column; the two-stage result must match a manual run
        table = Table(
            "points",
            [Attribute("g", N), Attribute("v", Q)],
            [
                {"g": "keep", "v": 1.0},
                {"g": "keep", "v": 2.0},
                {"g": "keep", "v": 4.0},
                {"g": "drop", "v": 100.0},
            ],
        )
        spec = TransformSpec(("points",), (Filter(parse_expression("g == 'keep'")),))
        create_analytic_node(
            graph,
            "fit",
            timestamp=1,
            transform=spec,
            relationship={"name": "norm", "kind": "normalDistribution", "inputs": ["v"], "output": None},
        )
        report = results(graph, "fit", {"points": table})
        assert report.rows_used == 3  # the drop row never reaches training

    def test_memoized_per_dataset_identity(self, graph):
        create_analytic_node(graph, "counts", timestamp=1, transform=count_spec())
        datasets = {"crime": crime_table()}
        first = results(graph, "counts", datasets)
        second = results(graph, "counts", datasets)
        assert first is second
        other = results(graph, "counts", {"crime": crime_table()})
        assert other is not first and other == first

    def test_relationship_node_needs_source(self, graph):
        create_analytic_node(
            graph,
            "clf",
            timestamp=1,
            relationship={"name": "m", "kind": "knnClassification", "inputs": ["premise"], "output": "label"},
        )
        with pytest.raises(GraphError, match="no data source"):
            results(graph, "clf", {"crime": crime_table()})


def random_graph_ops(seed, op_count, graph=None):
    """Drive random create/add operations; invalid ones must raise and
    leave no trace. Returns the number of operations attempted."""
    rng = random.Random(seed)
    graph = graph if graph is not None else KnowledgeGraph()
    names = []
    attempted = 0
    for i in range(op_count):
        attempted += 1
        roll = rng.random()
        if roll < 0.32 or len(names) < 2:
            name = f"n{seed}_{i}"
            create_analytic_node(graph, name, timestamp=i, transform=count_spec())
            names.append(name)
        elif roll < 0.38:
            # a duplicate-name create must be refused and leave no trace
            before = len(graph.nodes)
            try:
                create_analytic_node(graph, rng.choice(names), timestamp=i, transform=count_spec())
                raise AssertionError("duplicate node name accepted")
            except GraphError:
                pass
            assert len(graph.nodes) == before
        else:
            a, b = rng.choice(names), rng.choice(names)
            kind = rng.choice(("source", "target", "related"))
            try:
                if kind == "source":
                    add_source(graph, a, b)
                elif kind == "target":
                    add_target(graph, a, b)
                else:
                    add_related(graph, a, b)
            except GraphError:
                pass  # self-edge or cycle, correctly refused
    return graph, attempted


def test_random_operation_sequences_keep_invariants():
    import warnings

    total = 0
    for seed in range(40):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DuplicateEdgeWarning)
            graph, attempted = random_graph_ops(seed, 60)
        total += attempted
        assert validate(graph) == []
    assert total == 2400
