"""Graphviz DOT export of a knowledge graph.

Nodes are labeled ``name (kind)``; source-to-target edges are solid and
related edges dashed. Output order is sorted, so the same graph always
renders to the same bytes.
"""

from __future__ import annotations

from .knowledge import KnowledgeGraph


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_to_dot(graph: KnowledgeGraph, title: str = "knowledge") -> str:
    lines = [f"digraph {_quote(title)} {{", "  rankdir=LR;"]
    for name in sorted(graph.nodes):
        node = graph.nodes[name]
        lines.append(f"  {_quote(name)} [label={_quote(f'{name} ({node.kind})')}];")
    solid = []
    dashed = []
    for name in sorted(graph.nodes):
        node = graph.nodes[name]
        for source in sorted(node.sources):
            solid.append(f"  {_quote(source)} -> {_quote(name)};")
        for other in sorted(node.related):
            if name < other:
                dashed.append(f"  {_quote(name)} -> {_quote(other)} [style=dashed, dir=none];")
    lines.extend(sorted(solid))
    lines.extend(sorted(dashed))
    lines.append("}")
    return "\n".join(lines) + "\n"
