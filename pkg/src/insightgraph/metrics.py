"""Complexity measures and graph validation.

Depth counts nodes on the longest source chain ending at a node, so a
node with no sources has depth one. Breadth is the coverage ratio
(input cells + output cells) / total source-table cells for an analytic
node; it is reported raw and may exceed 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .errors import GraphError
from .insight import InsightNode, TaskNode, WILDCARD, is_fully_specified
from .knowledge import AnalyticKnowledgeNode, DomainKnowledgeNode, KnowledgeGraph, KnowledgeNode, results
from .relationships import EvaluationReport
from .tabular import Table, cell_count
from .transforms import referenced_attributes


@dataclass(frozen=True)
class MetricReport:
    """Per-node complexity summary; the cell fields are present for
    analytic nodes only."""

    node_name: str
    depth: int
    breadth: float | None = None
    input_cells: int | None = None
    output_cells: int | None = None
    dataset_cells: int | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"nodeName": self.node_name, "depth": self.depth}
        if self.breadth is not None:
            out.update(
                breadth=self.breadth,
                inputCells=self.input_cells,
                outputCells=self.output_cells,
                datasetCells=self.dataset_cells,
            )
        return out


def depth(graph: KnowledgeGraph, node: KnowledgeNode | str) -> int:
    """1 + the maximum depth over source nodes; 1 at a root. Iterative,
    so long chains cannot overflow the stack."""
    start = (node if isinstance(node, str) else node.name)
    graph.node(start)
    memo: dict[str, int] = {}
    stack = [start]
    while stack:
        current = stack[-1]
        if current in memo:
            stack.pop()
            continue
        pending = [s for s in graph.node(current).sources if s not in memo]
        if pending:
            stack.extend(pending)
            continue
        memo[current] = 1 + max((memo[s] for s in graph.node(current).sources), default=0)
        stack.pop()
    return memo[start]


def breadth_cells(
    graph: KnowledgeGraph, node: AnalyticKnowledgeNode | str, datasets: Mapping[str, Table]
) -> tuple[int, int, int]:
    """(input cells, output cells, dataset cells) for an analytic node.

    Transformation inputs count one column of cells per referenced source
    attribute; a relationship's training data counts rows x (inputs +
    outputs). Output is the result table's cells, or the scalar count of
    the evaluation report for relationship-bearing nodes.
    """
    if isinstance(node, str):
        node = graph.node(node)
    if not isinstance(node, AnalyticKnowledgeNode):
        raise GraphError(f"{node.name!r} is not an analytic knowledge node")
    outcome = results(graph, node, datasets)
    if node.transform is not None:
        refs = referenced_attributes(node.transform, datasets)
        input_cells = sum(len(datasets[source]) for source, _ in refs)
        dataset_cells = sum(cell_count(datasets[s]) for s in node.transform.sources)
    else:
        spec = node.relationship or {}
        width = len(spec.get("inputs") or []) + (1 if spec.get("output") else 0)
        assert isinstance(outcome, EvaluationReport)
        input_cells = outcome.rows_used * width
        dataset_cells = cell_count(datasets[node.data_source])
    if isinstance(outcome, EvaluationReport):
        output_cells = outcome.scalar_count
    else:
        output_cells = cell_count(outcome)
    return input_cells, output_cells, dataset_cells


def breadth(graph: KnowledgeGraph, node: AnalyticKnowledgeNode | str, datasets: Mapping[str, Table]) -> float:
    input_cells, output_cells, dataset_cells = breadth_cells(graph, node, datasets)
    if dataset_cells == 0:
        return 0.0
    return (input_cells + output_cells) / dataset_cells


def metric_report(
    graph: KnowledgeGraph, node: KnowledgeNode | str, datasets: Mapping[str, Table] | None = None
) -> MetricReport:
    if isinstance(node, str):
        node = graph.node(node)
    d = depth(graph, node)
    if isinstance(node, AnalyticKnowledgeNode) and datasets is not None:
        input_cells, output_cells, dataset_cells = breadth_cells(graph, node, datasets)
        ratio = (input_cells + output_cells) / dataset_cells if dataset_cells else 0.0
        return MetricReport(node.name, d, ratio, input_cells, output_cells, dataset_cells)
    return MetricReport(node.name, d)


# ---------------------------------------------------------------------------
# Summary statistics

def graph_stats(graph: KnowledgeGraph) -> dict:
    """Counts per node kind and edge type, the maximum depth, and the
    source-less roots."""
    kinds = {"domain": 0, "analytic": 0, "insight": 0, "objective": 0, "task": 0}
    for node in graph.nodes.values():
        if isinstance(node, InsightNode):
            key = "insight" if is_fully_specified(graph, node) else "objective"
        else:
            key = node.kind
        kinds[key] = kinds.get(key, 0) + 1
    source_edges = sum(len(n.sources) for n in graph.nodes.values())
    related_edges = sum(len(n.related) for n in graph.nodes.values()) // 2
    max_depth = max((depth(graph, n) for n in graph.nodes.values()), default=0)
    roots = sorted(n.name for n in graph.nodes.values() if not n.sources)
    return {
        "concepts": len(graph.concepts),
        "instances": len(graph.instances),
        "nodes": {**kinds, "total": len(graph.nodes)},
        "edges": {"sourceTarget": source_edges, "related": related_edges},
        "maxDepth": max_depth,
        "roots": roots,
    }


# ---------------------------------------------------------------------------
# Validation audit

@dataclass(frozen=True)
class Violation:
    rule: str
    subject: str
    detail: str

    def __str__(self) -> str:
        return f"[{self.rule}] {self.subject}: {self.detail}"


def _audit_edges(graph: KnowledgeGraph, out: list[Violation]) -> None:
    for node in graph.nodes.values():
        for label in ("sources", "targets", "related"):
            names = getattr(node, label)
            if node.name in names:
                out.append(Violation("self-edge", node.name, f"{label} lists the node itself"))
            dupes = sorted({n for n in names if names.count(n) > 1})
            if dupes:
                out.append(Violation("duplicate-edge", node.name, f"{label} repeats {dupes}"))
            for other_name in names:
                other = graph.nodes.get(other_name)
                if other is None:
                    out.append(Violation("unresolved-edge", node.name, f"{label} names missing node {other_name!r}"))
                    continue
                back = {"sources": other.targets, "targets": other.sources, "related": other.related}[label]
                if node.name not in back:
                    out.append(
                        Violation(
                            "edge-symmetry",
                            node.name,
                            f"{other_name!r} in {label} lacks the reciprocal entry",
                        )
                    )


def _audit_cycles(graph: KnowledgeGraph, out: list[Violation]) -> None:
    # iterative three-color DFS over the source -> target relation
    WHITE, GREY, BLACK = 0, 1, 2
    color = {name: WHITE for name in graph.nodes}
    for origin in graph.nodes:
        if color[origin] != WHITE:
            continue
        stack: list[tuple[str, int]] = [(origin, 0)]
        while stack:
            name, edge_index = stack[-1]
            if edge_index == 0:
                color[name] = GREY
            followers = [t for t in graph.node(name).targets if t in graph.nodes]
            if edge_index < len(followers):
                stack[-1] = (name, edge_index + 1)
                follower = followers[edge_index]
                if color[follower] == GREY:
                    out.append(Violation("cycle", follower, "source/target edges close a cycle"))
                elif color[follower] == WHITE:
                    stack.append((follower, 0))
            else:
                color[name] = BLACK
                stack.pop()


def _audit_concepts(graph: KnowledgeGraph, out: list[Violation]) -> None:
    for concept in graph.concepts.values():
        for parent in concept.parents:
            if parent not in graph.concepts:
                out.append(Violation("unresolved-concept", concept.name, f"parent {parent!r} missing"))
        seen, stack = set(), list(concept.parents)
        while stack:
            current = stack.pop()
            if current == concept.name:
                out.append(Violation("concept-cycle", concept.name, "hierarchy cycles through itself"))
                break
            if current in seen or current not in graph.concepts:
                continue
            seen.add(current)
            stack.extend(graph.concepts[current].parents)
    for instance in graph.instances.values():
        if instance.core_concept not in graph.concepts:
            out.append(
                Violation("unresolved-concept", instance.name, f"core concept {instance.core_concept!r} missing")
            )
        declared = {a.name for a in instance.attributes}
        stray = sorted(set(instance.values) - declared)
        if stray:
            out.append(Violation("stray-metadata", instance.name, f"values {stray} have no declared attribute"))


def _audit_members(graph: KnowledgeGraph, out: list[Violation]) -> None:
    for node in graph.nodes.values():
        if isinstance(node, DomainKnowledgeNode):
            if node.instance not in graph.instances:
                out.append(Violation("unresolved-instance", node.name, f"instance {node.instance!r} missing"))
        elif isinstance(node, AnalyticKnowledgeNode):
            if node.transform is None and node.relationship is None:
                out.append(Violation("empty-analytic", node.name, "neither transformation nor relationship"))
            if node.timestamp < 0:
                out.append(Violation("bad-timestamp", node.name, f"timestamp {node.timestamp} is negative"))
        elif isinstance(node, InsightNode):
            for label, members, expected in (
                ("domain", node.domain_knowledge, DomainKnowledgeNode),
                ("analytic", node.analytic_knowledge, AnalyticKnowledgeNode),
            ):
                if members == WILDCARD:
                    continue
                if not members:
                    out.append(Violation("empty-members", node.name, f"{label} list is empty"))
                for member in members:
                    if member == WILDCARD:
                        continue
                    target = graph.nodes.get(member)
                    if target is None:
                        out.append(Violation("unresolved-member", node.name, f"{label} member {member!r} missing"))
                    elif not isinstance(target, expected):
                        out.append(
                            Violation("member-kind", node.name, f"{label} member {member!r} has kind {target.kind}")
                        )
        elif isinstance(node, TaskNode):
            objective = graph.nodes.get(node.objective)
            if objective is None:
                out.append(Violation("unresolved-member", node.name, f"objective {node.objective!r} missing"))
            elif not isinstance(objective, InsightNode):
                out.append(Violation("member-kind", node.name, f"objective {node.objective!r} is not an insight"))
            for member in node.insights:
                target = graph.nodes.get(member)
                if target is None:
                    out.append(Violation("unresolved-member", node.name, f"insight {member!r} missing"))
                elif not isinstance(target, InsightNode):
                    out.append(Violation("member-kind", node.name, f"insight {member!r} has kind {target.kind}"))
                elif not is_fully_specified(graph, target):
                    out.append(Violation("partial-insight", node.name, f"insight {member!r} is partially specified"))


def validate(graph: KnowledgeGraph) -> list[Violation]:
    """Audit every structural invariant; an empty list means the graph is
    sound. Violations are data, not errors."""
    out: list[Violation] = []
    _audit_edges(graph, out)
    _audit_cycles(graph, out)
    _audit_concepts(graph, out)
    _audit_members(graph, out)
    return out
