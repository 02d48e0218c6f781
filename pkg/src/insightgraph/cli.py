"""Command-line front end.

Subcommands: ``run`` builds a graph from a spec file and prints it with
per-node result summaries; ``scenario`` replays a bundled analysis and
checks it against golden expectations, optionally writing CSVs and
figures; ``metrics`` prints a node's complexity report; ``export`` emits
DOT or CSV; ``match`` lists the insights satisfying an objective.

Exit codes: 0 success, 1 semantic violation or golden mismatch, 2 I/O or
parse failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dot import graph_to_dot
from .errors import DataError, InsightGraphError, SpecError
from .insight import InsightNode, is_fully_specified, matching_insights
from .knowledge import AnalyticKnowledgeNode, results
from .metrics import metric_report, validate
from .relationships import EvaluationReport
from .scenarios import SCENARIO_IDS, run_scenario, write_artifacts
from .specfile import graph_to_json, load_spec_path
from .tabular import Table, table_to_csv_text


def _parse_data_flags(pairs: list[str] | None) -> dict[str, str]:
    overrides = {}
    for pair in pairs or []:
        name, sep, path = pair.partition("=")
        if not sep or not name or not path:
            raise SpecError(f"--data expects name=path, got {pair!r}")
        overrides[name] = path
    return overrides


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(args: argparse.Namespace):
    return load_spec_path(
        args.spec, data_overrides=_parse_data_flags(args.data), default_seed=args.seed
    )


def _result_summary(value) -> dict:
    if isinstance(value, Table):
        return {"type": "table", "rows": len(value), "columns": len(value.schema)}
    assert isinstance(value, EvaluationReport)
    return {"type": "evaluation", **value.to_json()}


def cmd_run(args: argparse.Namespace) -> int:
    graph, datasets = _load(args)
    violations = validate(graph)
    if violations:
        print(f"validation failed: {violations[0]}", file=sys.stderr)
        return 1
    summaries = {}
    for node in graph.nodes_of_kind("analytic"):
        summaries[node.name] = _result_summary(results(graph, node, datasets))
    _emit(json.dumps(graph_to_json(graph, summaries), indent=2) + "\n", args.out)
    return 0


def cmd_scenario(args: argparse.Namespace) -> int:
    result = run_scenario(args.id, seed=args.seed)
    for note in result.notes:
        print(note)
    for check in result.checks:
        mark = "ok  " if check.passed else "FAIL"
        line = f"{mark}  {check.label}"
        if not check.passed:
            line += f"  ({check.detail})"
        print(line)
    if args.out:
        for path in write_artifacts(result, args.out):
            print(f"wrote {path}")
    print(f"scenario {result.scenario}: {'pass' if result.passed else 'FAIL'}")
    return 0 if result.passed else 1


def cmd_metrics(args: argparse.Namespace) -> int:
    graph, datasets = _load(args)
    if args.node not in graph.nodes:
        print(f"unknown node {args.node!r}", file=sys.stderr)
        return 1
    report = metric_report(graph, args.node, datasets)
    _emit(json.dumps(report.to_json(), indent=2) + "\n", args.out)
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    graph, datasets = _load(args)
    if args.format == "dot":
        _emit(graph_to_dot(graph, title=Path(args.spec).stem), args.out)
        return 0
    # csv needs a transform-bearing analytic node
    if not args.target:
        print("--target is required for csv export", file=sys.stderr)
        return 1
    node = graph.nodes.get(args.target)
    if node is None or not isinstance(node, AnalyticKnowledgeNode):
        print(f"unknown analytic node {args.target!r}", file=sys.stderr)
        return 1
    value = results(graph, node, datasets)
    if not isinstance(value, Table):
        print(f"{args.target!r} yields an evaluation report, not a table", file=sys.stderr)
        return 1
    _emit(table_to_csv_text(value), args.out)
    return 0


def cmd_match(args: argparse.Namespace) -> int:
    graph, _ = _load(args)
    node = graph.nodes.get(args.objective)
    if node is None or not isinstance(node, InsightNode):
        print(f"unknown objective {args.objective!r}", file=sys.stderr)
        return 1
    if is_fully_specified(graph, node):
        print(
            f"note: {args.objective!r} is fully specified; treating it as an exact-match query",
            file=sys.stderr,
        )
    _emit(json.dumps(matching_insights(graph, node), indent=2) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="insightgraph",
        description="Declarative insights, objectives, and tasks over typed tables and knowledge graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--data",
        action="append",
        metavar="NAME=PATH",
        help="substitute a dataset with a CSV file (repeatable)",
    )
    common.add_argument("--seed", type=int, default=0, help="seed for isolation-forest models")
    common.add_argument("--out", help="write output to this path instead of stdout")

    p_run = sub.add_parser("run", parents=[common], help="build a graph from a spec and print it")
    p_run.add_argument("spec", help="spec JSON file")
    p_run.set_defaults(func=cmd_run)

    p_scenario = sub.add_parser("scenario", parents=[common], help="replay a bundled scenario")
    p_scenario.add_argument("id", choices=SCENARIO_IDS)
    p_scenario.set_defaults(func=cmd_scenario)

    p_metrics = sub.add_parser("metrics", parents=[common], help="print a node's complexity report")
    p_metrics.add_argument("spec", help="spec JSON file")
    p_metrics.add_argument("node", help="node name")
    p_metrics.set_defaults(func=cmd_metrics)

    p_export = sub.add_parser("export", parents=[common], help="export DOT or a result CSV")
    p_export.add_argument("spec", help="spec JSON file")
    p_export.add_argument("--format", choices=("dot", "csv"), required=True)
    p_export.add_argument("--target", help="analytic node for csv export")
    p_export.set_defaults(func=cmd_export)

    p_match = sub.add_parser("match", parents=[common], help="insights satisfying an objective")
    p_match.add_argument("spec", help="spec JSON file")
    p_match.add_argument("objective", help="objective node name")
    p_match.set_defaults(func=cmd_match)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InsightGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
