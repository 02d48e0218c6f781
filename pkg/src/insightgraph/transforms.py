"""Declarative data-transformation pipelines over named source tables.

A spec names its source tables and an ordered list of steps; the first
step consumes the primary source and each later step consumes its
predecessor's output. Join is the only step that reads a second source.
Any string position in a spec may hold the wildcard ``"*"`` (and a whole
step may be the wildcard), which turns the spec into a template: it can
be matched against concrete specs but not executed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

from . import expr as E
from .errors import PipelineError, WildcardPresentError
from .tabular import Attribute, AttributeType, Table, Value, sort_key

WILDCARD = "*"

AGGREGATE_OPS = ("count", "sum", "mean", "min", "max")


@dataclass(frozen=True)
class Aggregate:
    out: str
    op: str
    attribute: str | None = None


@dataclass(frozen=True)
class Groupby:
    keys: tuple[str, ...]


@dataclass(frozen=True)
class Rollup:
    aggregates: tuple[Aggregate, ...]


@dataclass(frozen=True)
class OrderKey:
    attribute: str
    direction: str = "asc"  # asc | desc


@dataclass(frozen=True)
class Orderby:
    keys: tuple[OrderKey, ...]


@dataclass(frozen=True)
class Filter:
    predicate: E.Expr | str  # parsed expression, or the wildcard marker


@dataclass(frozen=True)
class Derive:
    out: str
    expression: E.Expr | str


@dataclass(frozen=True)
class Bin:
    attribute: str
    out: str
    bins: int | None = None
    step: float | None = None


@dataclass(frozen=True)
class JoinOn:
    left: str
    right: str


@dataclass(frozen=True)
class Join:
    right: str
    on: tuple[JoinOn, ...]
    kind: str = "inner"


TransformStep = Groupby | Rollup | Orderby | Filter | Derive | Bin | Join | str


@dataclass(frozen=True)
class TransformSpec:
    sources: tuple[str, ...]
    transforms: tuple[TransformStep, ...] = ()

    def __post_init__(self) -> None:
        if not self.sources:
            raise PipelineError("a transform spec needs at least one source")


# ---------------------------------------------------------------------------
# Wildcard scan

def _expr_is_wild(e: E.Expr | str) -> bool:
    return isinstance(e, str) and e == WILDCARD


def step_contains_wildcard(step: TransformStep) -> bool:
    if isinstance(step, str):
        return step == WILDCARD
    if isinstance(step, Groupby):
        return WILDCARD in step.keys
    if isinstance(step, Rollup):
        return any(a.out == WILDCARD or a.op == WILDCARD or a.attribute == WILDCARD for a in step.aggregates)
    if isinstance(step, Orderby):
        return any(k.attribute == WILDCARD or k.direction == WILDCARD for k in step.keys)
    if isinstance(step, Filter):
        return _expr_is_wild(step.predicate)
    if isinstance(step, Derive):
        return step.out == WILDCARD or _expr_is_wild(step.expression)
    if isinstance(step, Bin):
        return step.attribute == WILDCARD or step.out == WILDCARD
    if isinstance(step, Join):
        return step.right == WILDCARD or any(o.left == WILDCARD or o.right == WILDCARD for o in step.on)
    raise PipelineError(f"unknown step {step!r}")


def spec_contains_wildcard(spec: TransformSpec) -> bool:
    return WILDCARD in spec.sources or any(step_contains_wildcard(s) for s in spec.transforms)


# ---------------------------------------------------------------------------
# JSON interchange

def _expr_to_json(e: E.Expr | str) -> str:
    return e if isinstance(e, str) else E.format_expression(e)


def _expr_from_json(text: str) -> E.Expr | str:
    return WILDCARD if text == WILDCARD else E.parse_expression(text)


def step_to_json(step: TransformStep) -> Any:
    if isinstance(step, str):
        return step
    if isinstance(step, Groupby):
        return {"op": "groupby", "args": {"keys": list(step.keys)}}
    if isinstance(step, Rollup):
        aggs = []
        for a in step.aggregates:
            rec: dict[str, Any] = {"out": a.out, "op": a.op}
            if a.attribute is not None:
                rec["attribute"] = a.attribute
            aggs.append(rec)
        return {"op": "rollup", "args": {"aggregates": aggs}}
    if isinstance(step, Orderby):
        return {
            "op": "orderby",
            "args": {"keys": [{"attribute": k.attribute, "direction": k.direction} for k in step.keys]},
        }
    if isinstance(step, Filter):
        return {"op": "filter", "args": {"predicate": _expr_to_json(step.predicate)}}
    if isinstance(step, Derive):
        return {"op": "derive", "args": {"out": step.out, "expr": _expr_to_json(step.expression)}}
    if isinstance(step, Bin):
        args: dict[str, Any] = {"attribute": step.attribute, "out": step.out}
        if step.bins is not None:
            args["bins"] = step.bins
        if step.step is not None:
            args["step"] = step.step
        return {"op": "bin", "args": args}
    if isinstance(step, Join):
        return {
            "op": "join",
            "args": {
                "right": step.right,
                "on": [{"left": o.left, "right": o.right} for o in step.on],
                "kind": step.kind,
            },
        }
    raise PipelineError(f"unknown step {step!r}")


def step_from_json(obj: Any) -> TransformStep:
    if obj == WILDCARD:
        return WILDCARD
    if not isinstance(obj, Mapping) or "op" not in obj:
        raise PipelineError(f"bad transform step record: {obj!r}")
    op = obj["op"]
    args = obj.get("args", {})
    if op == "groupby":
        return Groupby(tuple(args["keys"]))
    if op == "rollup":
        return Rollup(tuple(Aggregate(a["out"], a["op"], a.get("attribute")) for a in args["aggregates"]))
    if op == "orderby":
        return Orderby(tuple(OrderKey(k["attribute"], k.get("direction", "asc")) for k in args["keys"]))
    if op == "filter":
        return Filter(_expr_from_json(args["predicate"]))
    if op == "derive":
        return Derive(args["out"], _expr_from_json(args["expr"]))
    if op == "bin":
        return Bin(args["attribute"], args["out"], args.get("bins"), args.get("step"))
    if op == "join":
        return Join(args["right"], tuple(JoinOn(o["left"], o["right"]) for o in args["on"]), args.get("kind", "inner"))
    raise PipelineError(f"unknown transform op {op!r}")


def spec_to_json(spec: TransformSpec) -> dict:
    return {"sources": list(spec.sources), "transforms": [step_to_json(s) for s in spec.transforms]}


def spec_from_json(obj: Mapping[str, Any]) -> TransformSpec:
    try:
        sources = tuple(obj["sources"])
    except KeyError:
        raise PipelineError(f"transform spec record lacks sources: {obj!r}") from None
    return TransformSpec(sources, tuple(step_from_json(s) for s in obj.get("transforms", [])))


# ---------------------------------------------------------------------------
# Execution

_STATIC_TO_ATTR = {
    E.NUM: AttributeType.QUANTITATIVE,
    E.STR: AttributeType.NOMINAL,
    E.BOOL: AttributeType.NOMINAL,  # booleans materialize as "true"/"false"
    E.DATE: AttributeType.TEMPORAL,
}


class _Pipeline:
    """Walks the steps once, validating as it goes.

    With ``execute=False`` only schemas flow through, which is how
    referenced-attribute analysis binds a spec without running it.
    """

    def __init__(self, spec: TransformSpec, datasets: Mapping[str, Table], execute: bool):
        self.spec = spec
        self.datasets = datasets
        self.execute = execute
        for src in spec.sources:
            if src not in datasets:
                raise PipelineError(f"unresolved source table {src!r}")
        primary = datasets[spec.sources[0]]
        self.schema: list[Attribute] = list(primary.schema)
        # column name -> (source table, source attribute) for pass-through
        # columns; None for derived/aggregate columns.
        self.provenance: dict[str, tuple[str, str] | None] = {
            a.name: (spec.sources[0], a.name) for a in primary.schema
        }
        self.rows: list[dict[str, Value]] = primary.rows if execute else []
        self.refs: set[tuple[str, str]] = set()
        self.pending_group: tuple[str, ...] | None = None
        self.orderby_seen = False

    # -- helpers -----------------------------------------------------------

    def _attr(self, name: str, step: str) -> Attribute:
        for a in self.schema:
            if a.name == name:
                return a
        raise PipelineError(f"{step}: unknown attribute {name!r}")

    def _note_ref(self, name: str) -> None:
        origin = self.provenance.get(name)
        if origin is not None:
            self.refs.add(origin)

    def _schema_types(self) -> dict[str, AttributeType]:
        return {a.name: a.attribute_type for a in self.schema}

    # -- steps -------------------------------------------------------------

    def run(self) -> None:
        for i, step in enumerate(self.spec.transforms):
            if self.pending_group is not None and not isinstance(step, Rollup):
                raise PipelineError("groupby must be immediately followed by rollup")
            if isinstance(step, Groupby):
                self._groupby(step)
            elif isinstance(step, Rollup):
                self._rollup(step, first=(i == 0))
            elif isinstance(step, Orderby):
                self._orderby(step)
            elif isinstance(step, Filter):
                self._filter(step)
            elif isinstance(step, Derive):
                self._derive(step)
            elif isinstance(step, Bin):
                self._bin(step)
            elif isinstance(step, Join):
                self._join(step)
            else:
                raise PipelineError(f"unknown step {step!r}")
        if self.pending_group is not None:
            raise PipelineError("groupby must be immediately followed by rollup")

    def _groupby(self, step: Groupby) -> None:
        if not step.keys:
            raise PipelineError("groupby needs at least one key")
        for key in step.keys:
            self._attr(key, "groupby")
            self._note_ref(key)
        self.pending_group = step.keys

    def _rollup(self, step: Rollup, first: bool) -> None:
        keys = self.pending_group
        self.pending_group = None
        if keys is None and not first:
            raise PipelineError("rollup must be immediately preceded by groupby, or be the first step")
        if not step.aggregates:
            raise PipelineError("rollup needs at least one aggregate")
        key_attrs = [self._attr(k, "rollup") for k in (keys or ())]
        out_attrs: list[Attribute] = list(key_attrs)
        out_names = {a.name for a in key_attrs}
        specs: list[tuple[Aggregate, Attribute | None]] = []
        for agg in step.aggregates:
            if agg.op not in AGGREGATE_OPS:
                raise PipelineError(f"unknown aggregate {agg.op!r}")
            attr: Attribute | None = None
            if agg.op == "count":
                if agg.attribute is not None:
                    raise PipelineError("count() takes no attribute")
                out = Attribute(agg.out, AttributeType.QUANTITATIVE)
            else:
                if agg.attribute is None:
                    raise PipelineError(f"{agg.op}() needs an attribute")
                attr = self._attr(agg.attribute, "rollup")
                self._note_ref(agg.attribute)
                if agg.op in ("sum", "mean"):
                    if attr.attribute_type is not AttributeType.QUANTITATIVE:
                        raise PipelineError(f"{agg.op}({agg.attribute}) needs a quantitative attribute")
                    out = Attribute(agg.out, AttributeType.QUANTITATIVE)
                else:  # min / max keep the argument's type
                    if attr.attribute_type is AttributeType.NOMINAL:
                        raise PipelineError(
                            f"{agg.op}({agg.attribute}) needs a quantitative, ordinal, or temporal attribute"
                        )
                    out = Attribute(agg.out, attr.attribute_type, attr.categories)
            if out.name in out_names:
                raise PipelineError(f"duplicate rollup output column {out.name!r}")
            out_names.add(out.name)
            out_attrs.append(out)
            specs.append((agg, attr))

        if self.execute:
            if keys:
                groups: dict[tuple, list[dict]] = {}
                for row in self.rows:
                    groups.setdefault(tuple(row[k] for k in keys), []).append(row)
                items = list(groups.items())
            else:
                items = [((), self.rows)]
            new_rows = []
            for key_vals, members in items:
                rec = dict(zip(keys or (), key_vals))
                for agg, attr in specs:
                    rec[agg.out] = _aggregate(agg.op, attr, members)
                new_rows.append(rec)
            self.rows = new_rows
        self.schema = out_attrs
        self.provenance = {a.name: self.provenance.get(a.name) for a in key_attrs}
        for agg, _ in specs:
            self.provenance[agg.out] = None
        self.orderby_seen = False

    def _orderby(self, step: Orderby) -> None:
        if not step.keys:
            raise PipelineError("orderby needs at least one key")
        plan = []
        for key in step.keys:
            if key.direction not in ("asc", "desc"):
                raise PipelineError(f"orderby direction must be asc or desc, got {key.direction!r}")
            attr = self._attr(key.attribute, "orderby")
            self._note_ref(key.attribute)
            plan.append((attr, key.direction))
        if self.execute:
            rows = list(self.rows)
            # stable multi-key sort: apply keys right-to-left; nulls sort
            # last under asc and, via reverse, first under desc
            for attr, direction in reversed(plan):
                def keyfunc(row: dict, a: Attribute = attr) -> tuple:
                    v = row[a.name]
                    return (1, ()) if v is None else (0, sort_key(a, v))
                rows.sort(key=keyfunc, reverse=(direction == "desc"))
            self.rows = rows
        self.orderby_seen = True

    def _filter(self, step: Filter) -> None:
        assert not isinstance(step.predicate, str)
        try:
            kind = E.bind_expression(step.predicate, self._schema_types(), rank_ok=self.orderby_seen)
        except E.ExpressionError as exc:
            raise PipelineError(f"filter: {exc}") from exc
        if kind != E.BOOL:
            raise PipelineError(f"filter predicate must be boolean, got {kind}")
        for col in E.referenced_columns(step.predicate):
            self._note_ref(col)
        if self.execute:
            self.rows = [
                row
                for i, row in enumerate(self.rows)
                if E.eval_expression(step.predicate, row, E.EvalContext(rank=i + 1)) is True
            ]

    def _derive(self, step: Derive) -> None:
        assert not isinstance(step.expression, str)
        try:
            kind = E.bind_expression(step.expression, self._schema_types())
        except E.ExpressionError as exc:
            raise PipelineError(f"derive {step.out!r}: {exc}") from exc
        for col in E.referenced_columns(step.expression):
            self._note_ref(col)
        attr = Attribute(step.out, _STATIC_TO_ATTR[kind])
        existing = [i for i, a in enumerate(self.schema) if a.name == step.out]
        if existing:
            self.schema[existing[0]] = attr
        else:
            self.schema.append(attr)
        self.provenance[step.out] = None
        if self.execute:
            new_rows = []
            for row in self.rows:
                v = E.eval_expression(step.expression, row)
                if isinstance(v, bool):
                    v = "true" if v else "false"
                new_rows.append({**row, step.out: v})
            self.rows = new_rows

    def _bin(self, step: Bin) -> None:
        attr = self._attr(step.attribute, "bin")
        if attr.attribute_type is not AttributeType.QUANTITATIVE:
            raise PipelineError(f"bin needs a quantitative attribute, got {step.attribute!r}")
        if (step.bins is None) == (step.step is None):
            raise PipelineError("bin needs exactly one of a bin count or a step width")
        if step.bins is not None and step.bins < 1:
            raise PipelineError("bin count must be >= 1")
        if step.step is not None and step.step <= 0:
            raise PipelineError("bin step width must be positive")
        self._note_ref(step.attribute)
        start_name, end_name = f"{step.out}_start", f"{step.out}_end"
        names = {a.name for a in self.schema}
        if start_name in names or end_name in names:
            raise PipelineError(f"bin output columns {start_name!r}/{end_name!r} collide with the schema")
        self.schema.append(Attribute(start_name, AttributeType.QUANTITATIVE))
        self.schema.append(Attribute(end_name, AttributeType.QUANTITATIVE))
        self.provenance[start_name] = None
        self.provenance[end_name] = None
        if self.execute:
            kept = [row for row in self.rows if row[step.attribute] is not None]
            if not kept:
                self.rows = []
                return
            values = [row[step.attribute] for row in kept]
            lo, hi = min(values), max(values)
            if step.bins is not None:
                nbins = step.bins
                width = (hi - lo) / nbins
            else:
                width = step.step
                nbins = max(1, math.ceil((hi - lo) / width)) if hi > lo else 1
            new_rows = []
            for row in kept:
                v = row[step.attribute]
                idx = 0 if width == 0 else min(int((v - lo) / width), nbins - 1)
                start = lo + idx * width
                new_rows.append({**row, start_name: start, end_name: start + width})
            self.rows = new_rows

    def _join(self, step: Join) -> None:
        if step.kind != "inner":
            raise PipelineError(f"only inner joins are supported, got {step.kind!r}")
        if step.right not in self.spec.sources:
            raise PipelineError(f"join references {step.right!r}, which is not a declared source")
        right = self.datasets[step.right]
        if not step.on:
            raise PipelineError("join needs at least one key pair")
        left_keys, right_keys = [], []
        for pair in step.on:
            la = self._attr(pair.left, "join")
            try:
                ra = right.attribute(pair.right)
            except Exception:
                raise PipelineError(f"join: unknown attribute {pair.right!r} in {step.right!r}") from None
            if la.attribute_type is not ra.attribute_type:
                raise PipelineError(
                    f"join keys {pair.left!r} and {pair.right!r} have different types"
                )
            self._note_ref(pair.left)
            self.refs.add((step.right, pair.right))
            left_keys.append(pair.left)
            right_keys.append(pair.right)
        # right columns come after the left schema, suffixed on collision
        names = {a.name for a in self.schema}
        rename: dict[str, str] = {}
        for a in right.schema:
            out = a.name
            while out in names:
                out += "_r"
            names.add(out)
            rename[a.name] = out
            self.schema.append(Attribute(out, a.attribute_type, a.categories))
            self.provenance[out] = (step.right, a.name)
        if self.execute:
            buckets: dict[tuple, list[dict]] = {}
            for rrow in right.iter_rows():
                key = tuple(rrow[k] for k in right_keys)
                if any(v is None for v in key):
                    continue  # null keys never match
                buckets.setdefault(key, []).append(rrow)
            new_rows = []
            for lrow in self.rows:
                key = tuple(lrow[k] for k in left_keys)
                if any(v is None for v in key):
                    continue
                for rrow in buckets.get(key, ()):
                    merged = dict(lrow)
                    for src_name, out in rename.items():
                        merged[out] = rrow[src_name]
                    new_rows.append(merged)
            self.rows = new_rows
        self.orderby_seen = False


def _aggregate(op: str, attr: Attribute | None, members: list[dict]) -> Value:
    if op == "count":
        return len(members)
    assert attr is not None
    values = [row[attr.name] for row in members if row[attr.name] is not None]
    if not values:
        return None
    if op == "sum":
        return sum(values)
    if op == "mean":
        return sum(values) / len(values)
    if op == "min":
        return min(values, key=lambda v: sort_key(attr, v))
    return max(values, key=lambda v: sort_key(attr, v))


def _checked(spec: TransformSpec) -> None:
    if spec_contains_wildcard(spec):
        raise WildcardPresentError(
            "spec contains wildcards; it describes an objective and cannot execute"
        )


def execute_pipeline(spec: TransformSpec, datasets: Mapping[str, Table], name: str | None = None) -> Table:
    """Run every step left to right and return the resulting table.

    The result never aliases input storage; an empty transforms list
    reproduces the primary source table.
    """
    _checked(spec)
    pipe = _Pipeline(spec, datasets, execute=True)
    pipe.run()
    return Table(name or datasets[spec.sources[0]].name, pipe.schema, pipe.rows)


def bind_pipeline(spec: TransformSpec, datasets: Mapping[str, Table]) -> list[Attribute]:
    """Validate a spec against its sources and return the output schema."""
    _checked(spec)
    pipe = _Pipeline(spec, datasets, execute=False)
    pipe.run()
    return list(pipe.schema)


def referenced_attributes(spec: TransformSpec, datasets: Mapping[str, Table]) -> set[tuple[str, str]]:
    """Every (source table, attribute) pair any step reads.

    Derived and aggregate columns are not source attributes; references to
    them do not count, but the source columns inside their defining
    expressions do.
    """
    _checked(spec)
    pipe = _Pipeline(spec, datasets, execute=False)
    pipe.run()
    return set(pipe.refs)
