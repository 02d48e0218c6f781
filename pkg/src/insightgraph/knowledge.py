"""Knowledge graph: shared node machinery, domain knowledge, analytic
knowledge.

All node kinds live in one name-indexed registry. Edges are recorded on
both endpoints (``B in sources(A)`` iff ``A in targets(B)``; related is
symmetric) and the directed source-to-target relation is kept acyclic so
longest-path depth is always defined. Concepts and instances are
registries of their own; many nodes may cite one instance.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping

from .errors import DuplicateEdgeWarning, GraphError
from .relationships import (
    EvaluationReport,
    RelationshipModel,
    model_from_spec,
    model_spec_contains_wildcard,
    model_to_spec,
    normalize_model_spec,
)
from .tabular import Attribute, Table, Value, attribute_from_json
from .transforms import TransformSpec, execute_pipeline, spec_contains_wildcard

NodeName = str


@dataclass
class KnowledgeNode:
    """Core record every node kind shares: a unique name, an optional
    description, and source/target/related edge lists (node names)."""

    name: str
    description: str | None = None
    sources: list[NodeName] = field(default_factory=list)
    targets: list[NodeName] = field(default_factory=list)
    related: list[NodeName] = field(default_factory=list)

    kind = "node"


@dataclass(frozen=True)
class Concept:
    """An abstract domain type the analyst reasons about, optionally
    refining parent concepts."""

    name: str
    parents: tuple[str, ...] = ()


@dataclass(frozen=True)
class Instance:
    """A concrete case of a concept, with supporting metadata values."""

    name: str
    core_concept: str
    attributes: tuple[Attribute, ...] = ()
    values: Mapping[str, Value] = field(default_factory=dict)


@dataclass
class DomainKnowledgeNode(KnowledgeNode):
    instance: str = ""

    kind = "domain"


@dataclass
class AnalyticKnowledgeNode(KnowledgeNode):
    """A unit of analytic knowledge: a data transformation and/or a data
    relationship, plus the timestamp when it was learned.

    ``relationship`` is stored in declarative spec form; fitted state is
    never kept on the node. ``data_source`` names the table a
    relationship-only node trains on; when a transformation is present
    the relationship trains on its output instead. ``results`` is lazy
    and memoized per dataset identity.
    """

    timestamp: int = 0
    transform: TransformSpec | None = None
    relationship: dict | None = None
    data_source: str | None = None
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    kind = "analytic"

    def contains_wildcard(self) -> bool:
        if self.transform is not None and spec_contains_wildcard(self.transform):
            return True
        return self.relationship is not None and model_spec_contains_wildcard(self.relationship)


class KnowledgeGraph:
    """Name-indexed registry of concepts, instances, and nodes."""

    def __init__(self) -> None:
        self.concepts: dict[str, Concept] = {}
        self.instances: dict[str, Instance] = {}
        self.nodes: dict[NodeName, KnowledgeNode] = {}

    def node(self, name: NodeName) -> KnowledgeNode:
        try:
            return self.nodes[name]
        except KeyError:
            raise GraphError(f"no node named {name!r}") from None

    def concept(self, name: str) -> Concept:
        try:
            return self.concepts[name]
        except KeyError:
            raise GraphError(f"no concept named {name!r}") from None

    def instance(self, name: str) -> Instance:
        try:
            return self.instances[name]
        except KeyError:
            raise GraphError(f"no instance named {name!r}") from None

    def add_node(self, node: KnowledgeNode) -> None:
        if not node.name:
            raise GraphError("node name must be non-empty")
        if node.name in self.nodes:
            raise GraphError(f"duplicate node name {node.name!r}")
        self.nodes[node.name] = node

    def nodes_of_kind(self, kind: str) -> list[KnowledgeNode]:
        return [n for n in self.nodes.values() if n.kind == kind]

    def reachable(self, start: NodeName, goal: NodeName) -> bool:
        """True if a directed source-to-target path leads from ``start``
        to ``goal``."""
        stack, seen = [start], set()
        while stack:
            current = stack.pop()
            if current == goal:
                return True
            if current in seen:
                continue
            seen.add(current)
            node = self.nodes.get(current)
            if node is not None:
                stack.extend(node.targets)
        return False


# ---------------------------------------------------------------------------
# Domain knowledge

def create_concept(graph: KnowledgeGraph, name: str, parent_concepts: list[str] | tuple[str, ...] = ()) -> Concept:
    if name in graph.concepts:
        raise GraphError(f"duplicate concept name {name!r}")
    parents = tuple(parent_concepts)
    for p in parents:
        graph.concept(p)
    # walking existing parents cannot revisit `name`, except through itself
    stack = list(parents)
    while stack:
        current = stack.pop()
        if current == name:
            raise GraphError(f"concept {name!r} would close a hierarchy cycle")
        stack.extend(graph.concept(current).parents)
    concept = Concept(name, parents)
    graph.concepts[name] = concept
    return concept


def create_instance(
    graph: KnowledgeGraph,
    name: str,
    core_concept: str,
    metadata: Mapping[str, Any] | None = None,
) -> Instance:
    """Register a concrete case of a concept.

    ``metadata`` follows the record shape ``{"attributes": [...],
    "values": {...}}``; every value key must name a declared attribute.
    """
    if name in graph.instances:
        raise GraphError(f"duplicate instance name {name!r}")
    graph.concept(core_concept)
    metadata = metadata or {}
    raw_attrs = metadata.get("attributes", [])
    attrs = tuple(a if isinstance(a, Attribute) else attribute_from_json(a) for a in raw_attrs)
    values = dict(metadata.get("values", {}))
    declared = {a.name for a in attrs}
    stray = sorted(set(values) - declared)
    if stray:
        raise GraphError(f"instance {name!r}: metadata values {stray} have no declared attribute")
    instance = Instance(name, core_concept, attrs, values)
    graph.instances[name] = instance
    return instance


def create_domain_node(
    graph: KnowledgeGraph, name: str, instance: str | Instance, description: str | None = None
) -> DomainKnowledgeNode:
    instance_name = instance.name if isinstance(instance, Instance) else instance
    graph.instance(instance_name)
    node = DomainKnowledgeNode(name=name, description=description, instance=instance_name)
    graph.add_node(node)
    return node


# ---------------------------------------------------------------------------
# Analytic knowledge

def create_analytic_node(
    graph: KnowledgeGraph,
    name: str,
    timestamp: int | None = None,
    transform: TransformSpec | None = None,
    relationship: RelationshipModel | Mapping[str, Any] | None = None,
    description: str | None = None,
    data_source: str | None = None,
) -> AnalyticKnowledgeNode:
    """Register a unit of analytic knowledge.

    At least one of ``transform``/``relationship`` must be present; a
    node with neither carries no computable analytic content.
    """
    if transform is None and relationship is None:
        raise GraphError(f"analytic node {name!r} needs a transformation or a relationship")
    if timestamp is None:
        timestamp = int(time.time() * 1000)
    if not isinstance(timestamp, int) or timestamp < 0:
        raise GraphError(f"analytic node {name!r}: timestamp must be a non-negative integer")
    spec: dict | None
    if isinstance(relationship, RelationshipModel):
        spec = model_to_spec(relationship)
    elif relationship is not None:
        spec = normalize_model_spec(relationship)
    else:
        spec = None
    node = AnalyticKnowledgeNode(
        name=name,
        description=description,
        timestamp=timestamp,
        transform=transform,
        relationship=spec,
        data_source=data_source,
    )
    graph.add_node(node)
    return node


def results(
    graph: KnowledgeGraph, node: AnalyticKnowledgeNode | str, datasets: Mapping[str, Table]
) -> Table | EvaluationReport:
    """Compute (or recall) what an analytic node's content yields.

    Transform-only nodes return the pipeline's output table. Nodes with a
    relationship train it deterministically and return the in-sample
    evaluation report; when both fields are present the relationship
    trains on the transformation's output. Memoized per (node, dataset
    identity).
    """
    if isinstance(node, str):
        node = graph.node(node)
    if not isinstance(node, AnalyticKnowledgeNode):
        raise GraphError(f"{node.name!r} is not an analytic knowledge node")
    key = tuple(sorted((name, id(table)) for name, table in datasets.items()))
    if key in node._memo:
        return node._memo[key]

    if node.transform is not None:
        table = execute_pipeline(node.transform, datasets, name=f"{node.name}.result")
    else:
        if node.data_source is None:
            raise GraphError(f"analytic node {node.name!r} has a relationship but no data source table")
        if node.data_source not in datasets:
            raise GraphError(f"analytic node {node.name!r}: unresolved data source {node.data_source!r}")
        table = datasets[node.data_source]

    if node.relationship is not None:
        schema = {a.name: a for a in table.schema}
        model = model_from_spec(node.relationship, schema)
        trained = model.train(table.rows)
        value: Table | EvaluationReport = trained.evaluate(table.rows)
    else:
        value = table
    node._memo[key] = value
    return value


# ---------------------------------------------------------------------------
# Edges

def _resolve(graph: KnowledgeGraph, node: KnowledgeNode | str) -> KnowledgeNode:
    return graph.node(node if isinstance(node, str) else node.name)


def add_source(graph: KnowledgeGraph, node: KnowledgeNode | str, other: KnowledgeNode | str) -> None:
    """Record ``other`` as a source (input/parent) of ``node``.

    Equivalent to ``add_target(other, node)``; the directed edge runs
    other -> node and must not close a cycle.
    """
    node = _resolve(graph, node)
    other = _resolve(graph, other)
    if node.name == other.name:
        raise GraphError(f"self-edge on {node.name!r}")
    if other.name in node.sources:
        warnings.warn(f"edge {other.name!r} -> {node.name!r} already exists", DuplicateEdgeWarning)
        return
    if graph.reachable(node.name, other.name):
        raise GraphError(f"edge {other.name!r} -> {node.name!r} would close a cycle")
    node.sources.append(other.name)
    other.targets.append(node.name)


def add_target(graph: KnowledgeGraph, node: KnowledgeNode | str, other: KnowledgeNode | str) -> None:
    add_source(graph, other, node)


def add_related(graph: KnowledgeGraph, node: KnowledgeNode | str, other: KnowledgeNode | str) -> None:
    """Record an undirected association between two nodes."""
    node = _resolve(graph, node)
    other = _resolve(graph, other)
    if node.name == other.name:
        raise GraphError(f"self-edge on {node.name!r}")
    if other.name in node.related:
        warnings.warn(f"{node.name!r} and {other.name!r} are already related", DuplicateEdgeWarning)
        return
    node.related.append(other.name)
    other.related.append(node.name)
