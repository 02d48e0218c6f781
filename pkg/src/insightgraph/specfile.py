"""Spec files and the graph interchange format.

A spec file declares datasets, domain knowledge, transformations,
relationship models, analytic nodes, insights, tasks, and edges in one
JSON document. Loading is a two-pass affair per section, so declaration
order within a section never matters; duplicate names are rejected by
the graph registry.

The graph JSON form stores every edge once: a ``sourceTarget`` edge
``from -> to`` means ``from`` is a source of ``to``; ``related`` edges
appear once per pair.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from .errors import ExpressionError, GraphError, SpecError
from .insight import InsightNode, TaskNode, WILDCARD, create_insight, create_task
from .knowledge import (
    AnalyticKnowledgeNode,
    DomainKnowledgeNode,
    KnowledgeGraph,
    add_related,
    add_source,
    create_analytic_node,
    create_concept,
    create_domain_node,
    create_instance,
)
from .relationships import normalize_model_spec
from .tabular import (
    Table,
    attribute_from_json,
    attribute_to_json,
    load_csv,
)
from .transforms import TransformSpec, spec_from_json, spec_to_json


def _records(obj: Mapping[str, Any], key: str) -> list[Mapping[str, Any]]:
    value = obj.get(key, [])
    if not isinstance(value, list):
        raise SpecError(f"spec section {key!r} must be a list")
    return value


def _name(record: Mapping[str, Any], section: str) -> str:
    try:
        return record["name"]
    except (KeyError, TypeError):
        raise SpecError(f"record in {section!r} lacks a name: {record!r}") from None


def _load_datasets(
    records: list[Mapping[str, Any]],
    base_dir: Path,
    overrides: Mapping[str, str] | None,
) -> dict[str, Table]:
    overrides = dict(overrides or {})
    datasets: dict[str, Table] = {}
    for record in records:
        name = _name(record, "datasets")
        if name in datasets:
            raise GraphError(f"duplicate dataset name {name!r}")
        schema = None
        if "schema" in record:
            schema = [attribute_from_json(a) for a in record["schema"]]
        path = overrides.pop(name, record.get("path"))
        if path is not None:
            resolved = Path(path)
            if not resolved.is_absolute():
                resolved = base_dir / resolved
            datasets[name] = load_csv(resolved, schema, name=name)
        elif "rows" in record:
            if schema is None:
                raise SpecError(f"dataset {name!r}: inline rows need a schema")
            datasets[name] = Table(name, schema, record["rows"])
        else:
            raise SpecError(f"dataset {name!r} needs a path or inline rows")
    if overrides:
        raise SpecError(f"--data overrides name unknown datasets: {sorted(overrides)}")
    return datasets


def _load_concepts(graph: KnowledgeGraph, records: list[Mapping[str, Any]]) -> None:
    # parents may be declared later in the list; iterate to a fixpoint
    pending = list(records)
    while pending:
        progressed = []
        stuck = []
        for record in pending:
            name = _name(record, "concepts")
            parents = record.get("parents", [])
            if all(p in graph.concepts for p in parents):
                create_concept(graph, name, parents)
                progressed.append(record)
            else:
                stuck.append(record)
        if not progressed:
            names = [r.get("name") for r in stuck]
            raise GraphError(f"concepts {names} have unresolved or cyclic parents")
        pending = stuck


def load_spec_dict(
    obj: Mapping[str, Any],
    base_dir: str | Path = ".",
    data_overrides: Mapping[str, str] | None = None,
    default_seed: int | None = None,
) -> tuple[KnowledgeGraph, dict[str, Table]]:
    """Build a knowledge graph and its datasets from a spec document.

    ``data_overrides`` maps dataset names to replacement CSV paths; the
    declared schema, when present, still applies. ``default_seed`` seeds
    isolation-forest models that do not pin a seed themselves.
    """
    if not isinstance(obj, Mapping):
        raise SpecError("spec document must be a JSON object")
    base_dir = Path(base_dir)
    graph = KnowledgeGraph()
    datasets = _load_datasets(_records(obj, "datasets"), base_dir, data_overrides)
    _load_concepts(graph, _records(obj, "concepts"))

    for record in _records(obj, "instances"):
        create_instance(graph, _name(record, "instances"), record.get("concept"), record.get("metadata"))

    for record in _records(obj, "domainNodes"):
        create_domain_node(
            graph, _name(record, "domainNodes"), record.get("instance"), record.get("description")
        )

    transforms: dict[str, TransformSpec] = {}
    for record in _records(obj, "transforms"):
        name = _name(record, "transforms")
        if name in transforms:
            raise GraphError(f"duplicate transform name {name!r}")
        try:
            transforms[name] = spec_from_json(record)
        except ExpressionError as exc:
            raise SpecError(f"transform {name!r}: {exc}") from exc

    models: dict[str, dict] = {}
    for record in _records(obj, "relationshipModels"):
        name = _name(record, "relationshipModels")
        if name in models:
            raise GraphError(f"duplicate relationship model name {name!r}")
        models[name] = normalize_model_spec(record, default_seed)

    def resolve_transform(ref: Any, node: str) -> TransformSpec | None:
        if ref is None:
            return None
        if isinstance(ref, str):
            if ref not in transforms:
                raise GraphError(f"analytic node {node!r}: unknown transform {ref!r}")
            return transforms[ref]
        try:
            return spec_from_json(ref)
        except ExpressionError as exc:
            raise SpecError(f"analytic node {node!r}: {exc}") from exc

    def resolve_model(ref: Any, node: str) -> dict | None:
        if ref is None:
            return None
        if isinstance(ref, str):
            if ref not in models:
                raise GraphError(f"analytic node {node!r}: unknown relationship model {ref!r}")
            return models[ref]
        return normalize_model_spec(ref, default_seed)

    for record in _records(obj, "analyticNodes"):
        name = _name(record, "analyticNodes")
        create_analytic_node(
            graph,
            name,
            timestamp=record.get("timestamp", 0),
            transform=resolve_transform(record.get("transform"), name),
            relationship=resolve_model(record.get("relationship"), name),
            description=record.get("description"),
            data_source=record.get("source"),
        )

    for record in _records(obj, "insights"):
        create_insight(
            graph,
            _name(record, "insights"),
            record.get("domainKnowledge", WILDCARD),
            record.get("analyticKnowledge", WILDCARD),
            record.get("description"),
        )

    for record in _records(obj, "tasks"):
        create_task(
            graph,
            _name(record, "tasks"),
            record.get("objective"),
            record.get("insights", []),
            record.get("description"),
        )

    for record in _records(obj, "edges"):
        try:
            source, target, kind = record["from"], record["to"], record.get("type", "sourceTarget")
        except (KeyError, TypeError):
            raise SpecError(f"bad edge record: {record!r}") from None
        if kind == "sourceTarget":
            add_source(graph, target, source)
        elif kind == "related":
            add_related(graph, source, target)
        else:
            raise SpecError(f"unknown edge type {kind!r}")

    return graph, datasets


def load_spec_path(
    path: str | Path,
    data_overrides: Mapping[str, str] | None = None,
    default_seed: int | None = None,
) -> tuple[KnowledgeGraph, dict[str, Table]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path} is not valid JSON: {exc}") from exc
    return load_spec_dict(obj, base_dir=path.parent, data_overrides=data_overrides, default_seed=default_seed)


# ---------------------------------------------------------------------------
# Graph JSON

def _node_to_json(node, summaries: Mapping[str, Any] | None) -> dict:
    record: dict[str, Any] = {"kind": node.kind, "name": node.name}
    if node.description is not None:
        record["description"] = node.description
    if isinstance(node, DomainKnowledgeNode):
        record["instance"] = node.instance
    elif isinstance(node, AnalyticKnowledgeNode):
        record["timestamp"] = node.timestamp
        record["transform"] = spec_to_json(node.transform) if node.transform is not None else None
        record["relationship"] = node.relationship
        record["source"] = node.data_source
        if summaries and node.name in summaries:
            record["results"] = summaries[node.name]
    elif isinstance(node, InsightNode):
        record["domainKnowledge"] = node.domain_knowledge
        record["analyticKnowledge"] = node.analytic_knowledge
    elif isinstance(node, TaskNode):
        record["objective"] = node.objective
        record["insights"] = list(node.insights)
    return record


def graph_to_json(graph: KnowledgeGraph, summaries: Mapping[str, Any] | None = None) -> dict:
    edges = []
    for node in graph.nodes.values():
        for source in node.sources:
            edges.append({"from": source, "to": node.name, "type": "sourceTarget"})
        for other in node.related:
            if node.name < other:
                edges.append({"from": node.name, "to": other, "type": "related"})
    return {
        "concepts": [{"name": c.name, "parents": list(c.parents)} for c in graph.concepts.values()],
        "instances": [
            {
                "name": i.name,
                "concept": i.core_concept,
                "metadata": {
                    "attributes": [attribute_to_json(a) for a in i.attributes],
                    "values": dict(i.values),
                },
            }
            for i in graph.instances.values()
        ],
        "nodes": [_node_to_json(n, summaries) for n in graph.nodes.values()],
        "edges": edges,
    }


def graph_from_json(obj: Mapping[str, Any]) -> KnowledgeGraph:
    """Rebuild a graph from its JSON form (datasets are not part of it)."""
    if not isinstance(obj, Mapping):
        raise SpecError("graph document must be a JSON object")
    graph = KnowledgeGraph()
    _load_concepts(graph, _records(obj, "concepts"))
    for record in _records(obj, "instances"):
        create_instance(graph, _name(record, "instances"), record.get("concept"), record.get("metadata"))
    # kinds reference each other one way; load in dependency order so the
    # node list itself may come in any order
    kind_rank = {"domain": 0, "analytic": 0, "insight": 1, "task": 2}
    node_records = sorted(
        enumerate(_records(obj, "nodes")),
        key=lambda pair: (kind_rank.get(pair[1].get("kind"), 0), pair[0]),
    )
    for _, record in node_records:
        kind = record.get("kind")
        name = _name(record, "nodes")
        description = record.get("description")
        if kind == "domain":
            create_domain_node(graph, name, record.get("instance"), description)
        elif kind == "analytic":
            transform = record.get("transform")
            create_analytic_node(
                graph,
                name,
                timestamp=record.get("timestamp", 0),
                transform=spec_from_json(transform) if transform is not None else None,
                relationship=record.get("relationship"),
                description=description,
                data_source=record.get("source"),
            )
        elif kind == "insight":
            create_insight(
                graph,
                name,
                record.get("domainKnowledge", WILDCARD),
                record.get("analyticKnowledge", WILDCARD),
                description,
            )
        elif kind == "task":
            create_task(graph, name, record.get("objective"), record.get("insights", []), description)
        else:
            raise SpecError(f"unknown node kind {kind!r} for {name!r}")
    for record in _records(obj, "edges"):
        kind = record.get("type", "sourceTarget")
        if kind == "sourceTarget":
            add_source(graph, record["to"], record["from"])
        elif kind == "related":
            add_related(graph, record["from"], record["to"])
        else:
            raise SpecError(f"unknown edge type {kind!r}")
    return graph
