"""Insights, objectives, and tasks.

An insight links domain-knowledge nodes with analytic-knowledge nodes.
The same node kind doubles as an objective: any wildcard anywhere in it
(including inside a referenced analytic node's declared specs) makes it
partially specified, and a fully specified objective simply is an
insight. A task pairs one objective with the insights discovered while
pursuing it; its status is derivable from the graph at any time.

Objectives act as constraints. An insight satisfies an objective when it
covers the objective's domain nodes (knowing more is fine) and each of
the objective's analytic members is matched, injectively, by a distinct
insight member whose declared specs agree position-for-position wherever
the objective is not a wildcard.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

from . import transforms as T
from .errors import DuplicateEdgeWarning, GraphError
from .knowledge import (
    AnalyticKnowledgeNode,
    DomainKnowledgeNode,
    KnowledgeGraph,
    KnowledgeNode,
    add_source,
)
from .relationships import normalize_model_spec
from .tabular import Table

WILDCARD = "*"


class TaskStatus(str, Enum):
    OPEN = "open"
    SATISFIED = "satisfied"
    CLOSED_NULL = "closedNull"


@dataclass
class InsightNode(KnowledgeNode):
    domain_knowledge: list[str] | str = WILDCARD
    analytic_knowledge: list[str] | str = WILDCARD

    kind = "insight"


@dataclass
class TaskNode(KnowledgeNode):
    """Pairs the objective driving a task with the insights found while
    completing it. Source/target edges link parent and sub-tasks."""

    objective: str = ""
    insights: list[str] = field(default_factory=list)

    kind = "task"


# ---------------------------------------------------------------------------
# Construction

def _check_members(graph: KnowledgeGraph, name: str, members: Any, expected: type, label: str) -> list[str] | str:
    if members == WILDCARD:
        return WILDCARD
    if isinstance(members, str) or not isinstance(members, (list, tuple)):
        raise GraphError(f"insight {name!r}: {label} must be a list of node names or the wildcard")
    members = list(members)
    if not members:
        raise GraphError(f"insight {name!r}: empty {label} list (use the wildcard to leave it open)")
    for member in members:
        if member == WILDCARD:
            raise GraphError(
                f"insight {name!r}: the wildcard stands in for the whole {label} list, not one member"
            )
        node = graph.node(member)
        if not isinstance(node, expected):
            raise GraphError(f"insight {name!r}: {member!r} is not a {label} node")
    return members


def create_insight(
    graph: KnowledgeGraph,
    name: str,
    domain_knowledge: Any,
    analytic_knowledge: Any,
    description: str | None = None,
) -> InsightNode:
    """Register an insight (or, with wildcards, an objective)."""
    domain = _check_members(graph, name, domain_knowledge, DomainKnowledgeNode, "domain knowledge")
    analytic = _check_members(graph, name, analytic_knowledge, AnalyticKnowledgeNode, "analytic knowledge")
    node = InsightNode(
        name=name, description=description, domain_knowledge=domain, analytic_knowledge=analytic
    )
    graph.add_node(node)
    return node


def create_task(
    graph: KnowledgeGraph,
    name: str,
    objective: InsightNode | str,
    insights: list[str] | None = None,
    description: str | None = None,
) -> TaskNode:
    objective_name = objective.name if isinstance(objective, InsightNode) else objective
    obj = graph.node(objective_name)
    if not isinstance(obj, InsightNode):
        raise GraphError(f"task {name!r}: objective {objective_name!r} is not an insight node")
    attached = []
    for member in insights or []:
        member_name = member.name if isinstance(member, InsightNode) else member
        node = graph.node(member_name)
        if not isinstance(node, InsightNode):
            raise GraphError(f"task {name!r}: {member_name!r} is not an insight node")
        if not is_fully_specified(graph, node):
            raise GraphError(f"task {name!r}: insight {member_name!r} is only partially specified")
        attached.append(member_name)
    task = TaskNode(name=name, description=description, objective=objective_name, insights=attached)
    graph.add_node(task)
    return task


def add_task_insight(graph: KnowledgeGraph, task: TaskNode | str, insight: InsightNode | str) -> None:
    """Attach a discovered insight to an existing task."""
    task = graph.node(task if isinstance(task, str) else task.name)
    if not isinstance(task, TaskNode):
        raise GraphError(f"{task.name!r} is not a task node")
    insight_name = insight if isinstance(insight, str) else insight.name
    node = graph.node(insight_name)
    if not isinstance(node, InsightNode) or not is_fully_specified(graph, node):
        raise GraphError(f"task {task.name!r}: {insight_name!r} is not a fully specified insight")
    if insight_name in task.insights:
        warnings.warn(f"task {task.name!r} already lists {insight_name!r}", DuplicateEdgeWarning)
        return
    task.insights.append(insight_name)


# ---------------------------------------------------------------------------
# Wildcard semantics

def is_fully_specified(graph: KnowledgeGraph, node: InsightNode | str) -> bool:
    """True iff no wildcard occurs anywhere in the insight, including
    inside the declared specs of its analytic members."""
    if isinstance(node, str):
        node = graph.node(node)
    if node.domain_knowledge == WILDCARD or node.analytic_knowledge == WILDCARD:
        return False
    if WILDCARD in node.domain_knowledge or WILDCARD in node.analytic_knowledge:
        return False
    for member in node.analytic_knowledge:
        analytic = graph.node(member)
        if isinstance(analytic, AnalyticKnowledgeNode) and analytic.contains_wildcard():
            return False
    return True


def _field_matches(template: Any, concrete: Any) -> bool:
    return template == WILDCARD or template == concrete


def _names_match(template: tuple, concrete: tuple) -> bool:
    return len(template) == len(concrete) and all(
        _field_matches(t, c) for t, c in zip(template, concrete)
    )


def _step_matches(template: T.TransformStep, concrete: T.TransformStep) -> bool:
    if template == T.WILDCARD:
        return True
    if type(template) is not type(concrete):
        return False
    if isinstance(template, T.Groupby):
        return _names_match(template.keys, concrete.keys)
    if isinstance(template, T.Rollup):
        return len(template.aggregates) == len(concrete.aggregates) and all(
            _field_matches(t.out, c.out)
            and _field_matches(t.op, c.op)
            and _field_matches(t.attribute, c.attribute)
            for t, c in zip(template.aggregates, concrete.aggregates)
        )
    if isinstance(template, T.Orderby):
        return len(template.keys) == len(concrete.keys) and all(
            _field_matches(t.attribute, c.attribute) and _field_matches(t.direction, c.direction)
            for t, c in zip(template.keys, concrete.keys)
        )
    if isinstance(template, T.Filter):
        return template.predicate == T.WILDCARD or template.predicate == concrete.predicate
    if isinstance(template, T.Derive):
        return _field_matches(template.out, concrete.out) and (
            template.expression == T.WILDCARD or template.expression == concrete.expression
        )
    if isinstance(template, T.Bin):
        return (
            _field_matches(template.attribute, concrete.attribute)
            and _field_matches(template.out, concrete.out)
            and template.bins == concrete.bins
            and template.step == concrete.step
        )
    if isinstance(template, T.Join):
        return (
            _field_matches(template.right, concrete.right)
            and template.kind == concrete.kind
            and len(template.on) == len(concrete.on)
            and all(
                _field_matches(t.left, c.left) and _field_matches(t.right, c.right)
                for t, c in zip(template.on, concrete.on)
            )
        )
    raise GraphError(f"unknown step {template!r}")


def _transform_matches(template: T.TransformSpec, concrete: T.TransformSpec) -> bool:
    return (
        _names_match(template.sources, concrete.sources)
        and len(template.transforms) == len(concrete.transforms)
        and all(_step_matches(t, c) for t, c in zip(template.transforms, concrete.transforms))
    )


def _model_matches(template: Mapping[str, Any], concrete: Mapping[str, Any]) -> bool:
    t = normalize_model_spec(template)
    c = normalize_model_spec(concrete)
    if not (_field_matches(t["name"], c["name"]) and _field_matches(t["kind"], c["kind"])):
        return False
    if len(t["inputs"]) != len(c["inputs"]) or not all(
        _field_matches(ti, ci) for ti, ci in zip(t["inputs"], c["inputs"])
    ):
        return False
    if not _field_matches(t["output"], c["output"]):
        return False
    keys = set(t["hyperparameters"]) | set(c["hyperparameters"])
    return all(
        _field_matches(t["hyperparameters"].get(k), c["hyperparameters"].get(k)) for k in keys
    )


def match_with_wildcards(template: Any, concrete: Any) -> bool:
    """Structural match of a wildcard-bearing template against a concrete
    spec of the same kind; lists must agree in length position by
    position."""
    if isinstance(template, T.TransformSpec) and isinstance(concrete, T.TransformSpec):
        return _transform_matches(template, concrete)
    if isinstance(template, Mapping) and isinstance(concrete, Mapping):
        return _model_matches(template, concrete)
    raise GraphError(
        f"cannot match a {type(template).__name__} template against a {type(concrete).__name__}"
    )


def _analytic_member_matches(graph: KnowledgeGraph, template: str, concrete: str) -> bool:
    if template == concrete:
        return True
    t = graph.node(template)
    c = graph.node(concrete)
    if not isinstance(t, AnalyticKnowledgeNode) or not isinstance(c, AnalyticKnowledgeNode):
        return False
    if (t.transform is None) != (c.transform is None):
        return False
    if (t.relationship is None) != (c.relationship is None):
        return False
    if t.transform is not None and not _transform_matches(t.transform, c.transform):
        return False
    if t.relationship is not None and not _model_matches(t.relationship, c.relationship):
        return False
    return True


def _injective_assignment(candidates: list[list[int]], used: set[int], i: int = 0) -> bool:
    if i == len(candidates):
        return True
    for j in candidates[i]:
        if j not in used:
            used.add(j)
            if _injective_assignment(candidates, used, i + 1):
                return True
            used.discard(j)
    return False


def satisfies(graph: KnowledgeGraph, insight: InsightNode | str, objective: InsightNode | str) -> bool:
    """Does a fully specified insight meet an objective's constraints?"""
    if isinstance(insight, str):
        insight = graph.node(insight)
    if isinstance(objective, str):
        objective = graph.node(objective)
    if not is_fully_specified(graph, insight):
        raise GraphError(f"insight {insight.name!r} is not fully specified")
    if objective.domain_knowledge != WILDCARD:
        if not set(objective.domain_knowledge) <= set(insight.domain_knowledge):
            return False
    if objective.analytic_knowledge == WILDCARD:
        return True
    # each objective member needs a distinct matching insight member
    candidates = [
        [
            j
            for j, concrete in enumerate(insight.analytic_knowledge)
            if _analytic_member_matches(graph, template, concrete)
        ]
        for template in objective.analytic_knowledge
    ]
    return _injective_assignment(candidates, set())


def matching_insights(graph: KnowledgeGraph, objective: InsightNode | str) -> list[str]:
    """Names of every fully specified insight satisfying the objective,
    sorted. A fully specified query node degenerates to exact matching."""
    if isinstance(objective, str):
        objective = graph.node(objective)
    hits = []
    for node in graph.nodes.values():
        if not isinstance(node, InsightNode) or node.name == objective.name:
            continue
        if is_fully_specified(graph, node) and satisfies(graph, node, objective):
            hits.append(node.name)
    return sorted(hits)


def task_status(graph: KnowledgeGraph, task: TaskNode | str, datasets: Mapping[str, Table] | None = None) -> TaskStatus:
    """open with no insights attached; satisfied when any attached
    insight meets the objective; closedNull otherwise (a recorded null
    result)."""
    if isinstance(task, str):
        task = graph.node(task)
    if not task.insights:
        return TaskStatus.OPEN
    for name in task.insights:
        if satisfies(graph, name, task.objective):
            return TaskStatus.SATISFIED
    return TaskStatus.CLOSED_NULL


# ---------------------------------------------------------------------------
# Completing objectives

def complete(
    graph: KnowledgeGraph,
    objective: InsightNode | str,
    bindings: Mapping[str, Any],
    name: str | None = None,
) -> InsightNode:
    """Fill an objective's wildcards and register the fully specified
    result, leaving the objective unchanged and source-linked to it.

    ``bindings`` may carry ``domainKnowledge`` / ``analyticKnowledge``
    lists for the list-level wildcards, and a ``members`` map replacing
    wildcard-bearing analytic members with concrete nodes that match
    them. Every wildcard must be covered; bindings for positions that
    hold no wildcard are rejected.
    """
    if isinstance(objective, str):
        objective = graph.node(objective)
    if not isinstance(objective, InsightNode):
        raise GraphError(f"{objective.name!r} is not an insight node")
    bindings = dict(bindings)
    member_map = dict(bindings.pop("members", {}))

    domain = objective.domain_knowledge
    if "domainKnowledge" in bindings:
        if domain != WILDCARD:
            raise GraphError(f"stray binding: {objective.name!r} has concrete domain knowledge")
        domain = list(bindings.pop("domainKnowledge"))
    analytic = objective.analytic_knowledge
    if "analyticKnowledge" in bindings:
        if analytic != WILDCARD:
            raise GraphError(f"stray binding: {objective.name!r} has concrete analytic knowledge")
        analytic = list(bindings.pop("analyticKnowledge"))
    if bindings:
        raise GraphError(f"unknown binding keys {sorted(bindings)}")

    if domain == WILDCARD:
        raise GraphError(f"objective {objective.name!r}: domain-knowledge wildcard left unbound")
    if analytic == WILDCARD:
        raise GraphError(f"objective {objective.name!r}: analytic-knowledge wildcard left unbound")

    resolved = []
    for member in analytic:
        replacement = member_map.pop(member, None)
        if replacement is not None:
            if not _analytic_member_matches(graph, member, replacement):
                raise GraphError(
                    f"binding {replacement!r} does not match the template member {member!r}"
                )
            member = replacement
        resolved.append(member)
    if member_map:
        raise GraphError(f"stray member bindings {sorted(member_map)}")

    completed = create_insight(
        graph,
        name or f"{objective.name}.completed",
        list(domain),
        resolved,
        description=objective.description,
    )
    if not is_fully_specified(graph, completed):
        # roll the registration back; the caller's bindings were incomplete
        del graph.nodes[completed.name]
        raise GraphError(f"objective {objective.name!r}: bindings leave wildcards uncovered")
    add_source(graph, completed, objective)
    return completed
