"""Trainable statistical relationship models.

Seven model families cover the classification, regression, density, and
outlier relationships an analyst records as analytic knowledge. Models
are immutable values: ``train`` returns a new fitted model and leaves the
original untouched, so trained models are safe to share. Rows with a
null in any used attribute are dropped for both training and evaluation,
and the dropped count is reported.

Defaults are pinned so training is fully deterministic: decision trees
use Gini impurity with one-vs-rest categorical splits and first-attribute
/ lowest-threshold tie-breaking; KNN standardizes quantitative inputs
and adds 0/1 mismatch distance for nominal ones; naive Bayes smooths
nominal likelihoods with Laplace alpha=1 and fits per-class Gaussians to
quantitative inputs; kernel density uses a Gaussian kernel with the
1.06 * std * n^(-1/5) bandwidth rule unless one is given; the isolation
forest builds 100 trees on subsamples of at most 256 rows from an
explicit seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, ClassVar, Iterable, Mapping, Sequence

import numpy as np

from .errors import ModelError
from .tabular import Attribute, AttributeType, Value

Row = Mapping[str, Value]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_EULER_GAMMA = 0.5772156649015329


class RelationshipKind(str, Enum):
    LINEAR_REGRESSION = "linearRegression"
    DECISION_TREE = "decisionTreeClassification"
    KNN = "knnClassification"
    NAIVE_BAYES = "naiveBayesClassification"
    KERNEL_DENSITY = "kernelDensity"
    NORMAL_DISTRIBUTION = "normalDistribution"
    ISOLATION_FOREST = "isolationForest"


@dataclass(frozen=True)
class EvaluationReport:
    """Kind-appropriate metrics for a trained model.

    ``metrics`` holds the scalar measures; classifiers additionally carry
    a confusion table (actual label -> predicted label -> count).
    """

    model_name: str
    kind: RelationshipKind
    metrics: dict[str, float]
    confusion: dict[str, dict[str, int]] | None = None
    rows_used: int = 0
    rows_dropped: int = 0

    @property
    def scalar_count(self) -> int:
        n = len(self.metrics)
        if self.confusion is not None:
            n += sum(len(row) for row in self.confusion.values())
        return n

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "model": self.model_name,
            "kind": self.kind.value,
            "metrics": dict(self.metrics),
            "rows_used": self.rows_used,
            "rows_dropped": self.rows_dropped,
        }
        if self.confusion is not None:
            out["confusion"] = {k: dict(v) for k, v in self.confusion.items()}
        return out


# ---------------------------------------------------------------------------
# Shared helpers

def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ModelError(message)


def _used_attributes(model: "RelationshipModel") -> list[Attribute]:
    used = list(model.inputs)
    if model.output is not None:
        used.append(model.output)
    return used


def _usable_rows(model: "RelationshipModel", rows: Iterable[Row]) -> tuple[list[Row], int]:
    used = [a.name for a in _used_attributes(model)]
    kept, dropped = [], 0
    for row in rows:
        missing = [n for n in used if n not in row]
        if missing:
            raise ModelError(f"model {model.name!r}: rows lack attribute(s) {missing}")
        if any(row[n] is None for n in used):
            dropped += 1
        else:
            kept.append(row)
    return kept, dropped


def _input_vector(model: "RelationshipModel", row: Row) -> list[Value]:
    values = []
    for attr in model.inputs:
        v = row.get(attr.name) if isinstance(row, Mapping) else None
        if v is None:
            raise ModelError(f"model {model.name!r}: null or missing input {attr.name!r}")
        values.append(v)
    return values


def _check_quantitative(inputs: Sequence[Attribute], context: str) -> None:
    bad = [a.name for a in inputs if a.attribute_type is not AttributeType.QUANTITATIVE]
    _require(not bad, f"{context} needs quantitative inputs; {bad} are not")


def _check_trained(model: "RelationshipModel") -> None:
    _require(model.fit is not None, f"model {model.name!r} is not trained")


def _classification_report(model: "RelationshipModel", rows: Sequence[Row]) -> EvaluationReport:
    usable, dropped = _usable_rows(model, rows)
    _require(bool(usable), f"model {model.name!r}: no usable evaluation rows")
    labels = sorted({str(r[model.output.name]) for r in usable})
    confusion = {a: {p: 0 for p in labels} for a in labels}
    hits = 0
    for row in usable:
        actual = str(row[model.output.name])
        predicted = str(model.predict(row))
        confusion.setdefault(actual, {}).setdefault(predicted, 0)
        confusion[actual][predicted] = confusion[actual].get(predicted, 0) + 1
        if predicted == actual:
            hits += 1
    return EvaluationReport(
        model_name=model.name,
        kind=model.kind,
        metrics={"accuracy": hits / len(usable)},
        confusion=confusion,
        rows_used=len(usable),
        rows_dropped=dropped,
    )


# ---------------------------------------------------------------------------
# Model classes

@dataclass(frozen=True)
class RelationshipModel:
    """Shared surface of every relationship model.

    ``fit`` is the kind-specific fitted state, absent until trained.
    """

    kind: ClassVar[RelationshipKind]

    name: str
    inputs: tuple[Attribute, ...]
    output: Attribute | None = None
    fit: Any = None

    @property
    def trained(self) -> bool:
        return self.fit is not None

    def train(self, rows: Sequence[Row]) -> "RelationshipModel":
        raise NotImplementedError

    def predict(self, row: Row) -> Value:
        raise ModelError(f"model {self.name!r} ({self.kind.value}) does not predict")

    def score(self, row_or_value: Any) -> float:
        raise ModelError(f"model {self.name!r} ({self.kind.value}) does not score")

    def evaluate(self, rows: Sequence[Row]) -> EvaluationReport:
        raise NotImplementedError

    def hyperparameters(self) -> dict[str, Any]:
        return {}


@dataclass(frozen=True)
class _LinearFit:
    intercept: float
    coefficients: tuple[float, ...]
    rows_used: int
    rows_dropped: int


@dataclass(frozen=True)
class LinearRegressionModel(RelationshipModel):
    """Ordinary least squares fit of one quantitative output."""

    kind: ClassVar[RelationshipKind] = RelationshipKind.LINEAR_REGRESSION

    def __post_init__(self) -> None:
        _require(bool(self.inputs), f"model {self.name!r}: regression needs at least one input")
        _check_quantitative(self.inputs, f"model {self.name!r}")
        _require(
            self.output is not None and self.output.attribute_type is AttributeType.QUANTITATIVE,
            f"model {self.name!r}: regression needs a quantitative output attribute",
        )

    def train(self, rows: Sequence[Row]) -> "LinearRegressionModel":
        usable, dropped = _usable_rows(self, rows)
        _require(len(usable) >= 2, f"model {self.name!r}: regression needs at least 2 usable rows")
        x = np.array([[1.0] + [float(r[a.name]) for a in self.inputs] for r in usable])
        y = np.array([float(r[self.output.name]) for r in usable])
        theta, *_ = np.linalg.lstsq(x, y, rcond=None)
        fit = _LinearFit(float(theta[0]), tuple(float(c) for c in theta[1:]), len(usable), dropped)
        return replace(self, fit=fit)

    def predict(self, row: Row) -> float:
        _check_trained(self)
        values = _input_vector(self, row)
        return self.fit.intercept + sum(c * float(v) for c, v in zip(self.fit.coefficients, values))

    def evaluate(self, rows: Sequence[Row]) -> EvaluationReport:
        _check_trained(self)
        usable, dropped = _usable_rows(self, rows)
        _require(bool(usable), f"model {self.name!r}: no usable evaluation rows")
        actual = np.array([float(r[self.output.name]) for r in usable])
        predicted = np.array([self.predict(r) for r in usable])
        residual = actual - predicted
        rmse = float(np.sqrt(np.mean(residual**2)))
        ss_res = float(np.sum(residual**2))
        ss_tot = float(np.sum((actual - actual.mean()) ** 2))
        if ss_tot == 0.0:
            r2 = 1.0 if ss_res < 1e-12 else 0.0
        else:
            r2 = 1.0 - ss_res / ss_tot
        return EvaluationReport(
            model_name=self.name,
            kind=self.kind,
            metrics={"rmse": rmse, "r2": r2},
            rows_used=len(usable),
            rows_dropped=dropped,
        )


@dataclass(frozen=True)
class _TreeLeaf:
    label: str


@dataclass(frozen=True)
class _TreeSplit:
    attribute: str
    numeric: bool
    pivot: Value  # threshold (<=) for numeric, category (==) for nominal
    left: "_TreeLeaf | _TreeSplit"
    right: "_TreeLeaf | _TreeSplit"


@dataclass(frozen=True)
class _TreeFit:
    root: _TreeLeaf | _TreeSplit
    labels: tuple[str, ...]
    rows_used: int
    rows_dropped: int


def gini_impurity(labels: Sequence[str]) -> float:
    n = len(labels)
    if n == 0:
        return 0.0
    counts: dict[str, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    return 1.0 - sum((c / n) ** 2 for c in counts.values())


def _majority(labels: Sequence[str]) -> str:
    counts: dict[str, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    best = max(counts.values())
    return min(lab for lab, c in counts.items() if c == best)


def split_candidates(attr: Attribute, values: Sequence[Value]) -> list[Value]:
    """Candidate pivots for one attribute over the node's rows.

    Numeric attributes use midpoints between consecutive distinct values,
    ascending; nominal attributes use each category, sorted, as a
    one-vs-rest split. Candidate order is the documented tie-break order.
    """
    if attr.attribute_type is AttributeType.QUANTITATIVE:
        distinct = sorted(set(values))
        return [(a + b) / 2 for a, b in zip(distinct, distinct[1:])]
    return sorted(set(str(v) for v in values))


@dataclass(frozen=True)
class DecisionTreeModel(RelationshipModel):
    """CART-style classification tree split on Gini impurity."""

    kind: ClassVar[RelationshipKind] = RelationshipKind.DECISION_TREE

    max_depth: int = 8
    min_leaf: int = 1

    def __post_init__(self) -> None:
        _require(bool(self.inputs), f"model {self.name!r}: classifier needs at least one input")
        _require(
            self.output is not None and self.output.attribute_type is AttributeType.NOMINAL,
            f"model {self.name!r}: classification needs a nominal output attribute",
        )

    def hyperparameters(self) -> dict[str, Any]:
        return {"max_depth": self.max_depth, "min_leaf": self.min_leaf}

    def train(self, rows: Sequence[Row]) -> "DecisionTreeModel":
        usable, dropped = _usable_rows(self, rows)
        _require(bool(usable), f"model {self.name!r}: no usable training rows")
        labels = sorted({str(r[self.output.name]) for r in usable})
        _require(
            len(labels) >= 2,
            f"model {self.name!r}: training set has a single class {labels[0] if labels else '?'!r}",
        )
        root = self._build(usable, depth=0)
        return replace(self, fit=_TreeFit(root, tuple(labels), len(usable), dropped))

    def best_split(self, rows: Sequence[Row]) -> tuple[Attribute, bool, Value, float] | None:
        """Lowest weighted-Gini split over every (attribute, pivot)
        candidate; ties keep the earliest candidate in scan order."""
        n = len(rows)
        best: tuple[Attribute, bool, Value, float] | None = None
        for attr in self.inputs:
            numeric = attr.attribute_type is AttributeType.QUANTITATIVE
            column = [r[attr.name] for r in rows]
            for pivot in split_candidates(attr, column):
                left, right = [], []
                for row in rows:
                    v = row[attr.name]
                    hit = (v <= pivot) if numeric else (str(v) == pivot)
                    (left if hit else right).append(str(row[self.output.name]))
                if len(left) < self.min_leaf or len(right) < self.min_leaf:
                    continue
                score = (len(left) * gini_impurity(left) + len(right) * gini_impurity(right)) / n
                if best is None or score < best[3] - 1e-12:
                    best = (attr, numeric, pivot, score)
        return best

    def _build(self, rows: Sequence[Row], depth: int) -> _TreeLeaf | _TreeSplit:
        labels = [str(r[self.output.name]) for r in rows]
        if depth >= self.max_depth or len(set(labels)) <= 1 or len(rows) < 2 * self.min_leaf:
            return _TreeLeaf(_majority(labels))
        found = self.best_split(rows)
        if found is None or found[3] >= gini_impurity(labels) - 1e-12:
            return _TreeLeaf(_majority(labels))
        attr, numeric, pivot, _ = found
        left_rows, right_rows = [], []
        for row in rows:
            v = row[attr.name]
            hit = (v <= pivot) if numeric else (str(v) == pivot)
            (left_rows if hit else right_rows).append(row)
        return _TreeSplit(
            attr.name,
            numeric,
            pivot,
            self._build(left_rows, depth + 1),
            self._build(right_rows, depth + 1),
        )

    def predict(self, row: Row) -> str:
        _check_trained(self)
        _input_vector(self, row)  # null check
        node = self.fit.root
        while isinstance(node, _TreeSplit):
            v = row[node.attribute]
            hit = (v <= node.pivot) if node.numeric else (str(v) == node.pivot)
            node = node.left if hit else node.right
        return node.label

    def evaluate(self, rows: Sequence[Row]) -> EvaluationReport:
        _check_trained(self)
        return _classification_report(self, rows)


@dataclass(frozen=True)
class _KnnFit:
    points: tuple[tuple[Value, ...], ...]
    labels: tuple[str, ...]
    means: tuple[float, ...]
    stds: tuple[float, ...]
    rows_used: int
    rows_dropped: int


@dataclass(frozen=True)
class KnnModel(RelationshipModel):
    """k-nearest-neighbor majority vote over mixed-type inputs."""

    kind: ClassVar[RelationshipKind] = RelationshipKind.KNN

    k: int = 3

    def __post_init__(self) -> None:
        _require(bool(self.inputs), f"model {self.name!r}: classifier needs at least one input")
        _require(self.k >= 1, f"model {self.name!r}: k must be >= 1")
        _require(
            self.output is not None and self.output.attribute_type is AttributeType.NOMINAL,
            f"model {self.name!r}: classification needs a nominal output attribute",
        )

    def hyperparameters(self) -> dict[str, Any]:
        return {"k": self.k}

    def _quantitative_indexes(self) -> list[int]:
        return [i for i, a in enumerate(self.inputs) if a.attribute_type is AttributeType.QUANTITATIVE]

    def train(self, rows: Sequence[Row]) -> "KnnModel":
        usable, dropped = _usable_rows(self, rows)
        _require(bool(usable), f"model {self.name!r}: no usable training rows")
        labels = sorted({str(r[self.output.name]) for r in usable})
        _require(len(labels) >= 2, f"model {self.name!r}: training set has a single class")
        points = tuple(tuple(r[a.name] for a in self.inputs) for r in usable)
        means, stds = [], []
        for i, attr in enumerate(self.inputs):
            if attr.attribute_type is AttributeType.QUANTITATIVE:
                col = np.array([float(p[i]) for p in points])
                means.append(float(col.mean()))
                stds.append(float(col.std(ddof=0)))
            else:
                means.append(0.0)
                stds.append(0.0)
        fit = _KnnFit(
            points,
            tuple(str(r[self.output.name]) for r in usable),
            tuple(means),
            tuple(stds),
            len(usable),
            dropped,
        )
        return replace(self, fit=fit)

    def distance(self, a: Sequence[Value], b: Sequence[Value]) -> float:
        """Euclidean over standardized quantitative inputs plus a 0/1
        mismatch per nominal input. Zero-variance features contribute 0."""
        _check_trained(self)
        sq = 0.0
        mismatches = 0.0
        for i, attr in enumerate(self.inputs):
            if attr.attribute_type is AttributeType.QUANTITATIVE:
                s = self.fit.stds[i]
                if s > 0:
                    sq += ((float(a[i]) - float(b[i])) / s) ** 2
            else:
                mismatches += 0.0 if str(a[i]) == str(b[i]) else 1.0
        return math.sqrt(sq) + mismatches

    def predict(self, row: Row) -> str:
        _check_trained(self)
        probe = _input_vector(self, row)
        ranked = sorted(
            range(len(self.fit.points)),
            key=lambda i: (self.distance(probe, self.fit.points[i]), i),
        )
        votes: dict[str, int] = {}
        for i in ranked[: self.k]:
            lab = self.fit.labels[i]
            votes[lab] = votes.get(lab, 0) + 1
        top = max(votes.values())
        return min(lab for lab, c in votes.items() if c == top)

    def evaluate(self, rows: Sequence[Row]) -> EvaluationReport:
        _check_trained(self)
        return _classification_report(self, rows)


@dataclass(frozen=True)
class _BayesFit:
    priors: dict[str, float]
    class_counts: dict[str, int]
    # nominal attr -> {class -> {value -> count}}, with the training vocabulary
    nominal_counts: dict[str, dict[str, dict[str, int]]]
    nominal_vocab: dict[str, tuple[str, ...]]
    # quantitative attr -> {class -> (mean, variance)}
    gaussians: dict[str, dict[str, tuple[float, float]]]
    rows_used: int
    rows_dropped: int


@dataclass(frozen=True)
class NaiveBayesModel(RelationshipModel):
    """Naive Bayes with Laplace-smoothed nominal likelihoods and
    per-class Gaussians for quantitative inputs."""

    kind: ClassVar[RelationshipKind] = RelationshipKind.NAIVE_BAYES

    alpha: float = 1.0

    def __post_init__(self) -> None:
        _require(bool(self.inputs), f"model {self.name!r}: classifier needs at least one input")
        _require(
            self.output is not None and self.output.attribute_type is AttributeType.NOMINAL,
            f"model {self.name!r}: classification needs a nominal output attribute",
        )

    def hyperparameters(self) -> dict[str, Any]:
        return {"alpha": self.alpha}

    def train(self, rows: Sequence[Row]) -> "NaiveBayesModel":
        usable, dropped = _usable_rows(self, rows)
        _require(bool(usable), f"model {self.name!r}: no usable training rows")
        classes = sorted({str(r[self.output.name]) for r in usable})
        _require(len(classes) >= 2, f"model {self.name!r}: training set has a single class")
        n = len(usable)
        class_counts = {c: 0 for c in classes}
        for row in usable:
            class_counts[str(row[self.output.name])] += 1
        priors = {c: class_counts[c] / n for c in classes}
        nominal_counts: dict[str, dict[str, dict[str, int]]] = {}
        nominal_vocab: dict[str, tuple[str, ...]] = {}
        gaussians: dict[str, dict[str, tuple[float, float]]] = {}
        for attr in self.inputs:
            if attr.attribute_type is AttributeType.QUANTITATIVE:
                per_class = {}
                for c in classes:
                    vals = np.array(
                        [float(r[attr.name]) for r in usable if str(r[self.output.name]) == c]
                    )
                    mean = float(vals.mean())
                    var = float(vals.var(ddof=0))
                    per_class[c] = (mean, max(var, 1e-9))
                gaussians[attr.name] = per_class
            else:
                vocab = sorted({str(r[attr.name]) for r in usable})
                counts = {c: {v: 0 for v in vocab} for c in classes}
                for row in usable:
                    counts[str(row[self.output.name])][str(row[attr.name])] += 1
                nominal_counts[attr.name] = counts
                nominal_vocab[attr.name] = tuple(vocab)
        fit = _BayesFit(priors, class_counts, nominal_counts, nominal_vocab, gaussians, n, dropped)
        return replace(self, fit=fit)

    def predict_proba(self, row: Row) -> dict[str, float]:
        """Posterior probability per class; probabilities sum to 1."""
        _check_trained(self)
        _input_vector(self, row)
        log_post = {}
        for c, prior in self.fit.priors.items():
            lp = math.log(prior)
            for attr in self.inputs:
                v = row[attr.name]
                if attr.attribute_type is AttributeType.QUANTITATIVE:
                    mean, var = self.fit.gaussians[attr.name][c]
                    lp += -0.5 * ((float(v) - mean) ** 2) / var - 0.5 * math.log(2.0 * math.pi * var)
                else:
                    counts = self.fit.nominal_counts[attr.name][c]
                    vocab_size = len(self.fit.nominal_vocab[attr.name])
                    hits = counts.get(str(v), 0)
                    lp += math.log(
                        (hits + self.alpha) / (self.fit.class_counts[c] + self.alpha * vocab_size)
                    )
            log_post[c] = lp
        peak = max(log_post.values())
        weights = {c: math.exp(lp - peak) for c, lp in log_post.items()}
        total = sum(weights.values())
        return {c: w / total for c, w in weights.items()}

    def predict(self, row: Row) -> str:
        proba = self.predict_proba(row)
        top = max(proba.values())
        return min(c for c, p in proba.items() if p == top)

    def evaluate(self, rows: Sequence[Row]) -> EvaluationReport:
        _check_trained(self)
        return _classification_report(self, rows)


def _density_value(model: "RelationshipModel", row_or_value: Any) -> float:
    """Univariate models accept either a bare number or a full record."""
    if isinstance(row_or_value, Mapping):
        v = row_or_value.get(model.inputs[0].name)
        _require(v is not None, f"model {model.name!r}: null or missing input {model.inputs[0].name!r}")
        return float(v)
    _require(row_or_value is not None, f"model {model.name!r}: null input value")
    return float(row_or_value)


def silverman_bandwidth(values: Sequence[float]) -> float:
    n = len(values)
    _require(n >= 2, "bandwidth rule needs at least 2 values; give a bandwidth explicitly")
    std = float(np.std(np.asarray(values, dtype=float), ddof=1))
    _require(std > 0, "bandwidth rule needs non-constant values; give a bandwidth explicitly")
    return 1.06 * std * n ** (-1 / 5)


@dataclass(frozen=True)
class _KdeFit:
    values: tuple[float, ...]
    bandwidth: float
    rows_used: int
    rows_dropped: int


@dataclass(frozen=True)
class KernelDensityModel(RelationshipModel):
    """Gaussian-kernel density estimate over one quantitative input."""

    kind: ClassVar[RelationshipKind] = RelationshipKind.KERNEL_DENSITY

    bandwidth: float | None = None  # None -> Silverman rule at train time

    def __post_init__(self) -> None:
        _require(
            len(self.inputs) == 1 and self.inputs[0].attribute_type is AttributeType.QUANTITATIVE,
            f"model {self.name!r}: density needs exactly one quantitative input",
        )
        _require(self.output is None, f"model {self.name!r}: density models take no output attribute")
        _require(self.bandwidth is None or self.bandwidth > 0, f"model {self.name!r}: bandwidth must be positive")

    def hyperparameters(self) -> dict[str, Any]:
        return {"bandwidth": self.bandwidth}

    def train(self, rows: Sequence[Row]) -> "KernelDensityModel":
        usable, dropped = _usable_rows(self, rows)
        _require(bool(usable), f"model {self.name!r}: no usable training rows")
        values = tuple(float(r[self.inputs[0].name]) for r in usable)
        h = self.bandwidth if self.bandwidth is not None else silverman_bandwidth(values)
        return replace(self, fit=_KdeFit(values, h, len(usable), dropped))

    def log_density(self, x: float) -> float:
        _check_trained(self)
        h = self.fit.bandwidth
        z = (np.asarray(self.fit.values) - x) / h
        logs = -0.5 * z**2
        peak = float(np.max(logs))
        acc = peak + math.log(float(np.sum(np.exp(logs - peak))))
        return acc - math.log(len(self.fit.values) * h * _SQRT_2PI)

    def score(self, row_or_value: Any) -> float:
        return math.exp(self.log_density(_density_value(self, row_or_value)))

    def evaluate(self, rows: Sequence[Row]) -> EvaluationReport:
        _check_trained(self)
        usable, dropped = _usable_rows(self, rows)
        _require(bool(usable), f"model {self.name!r}: no usable evaluation rows")
        mean_ll = sum(self.log_density(float(r[self.inputs[0].name])) for r in usable) / len(usable)
        return EvaluationReport(
            model_name=self.name,
            kind=self.kind,
            metrics={"mean_log_likelihood": mean_ll},
            rows_used=len(usable),
            rows_dropped=dropped,
        )


@dataclass(frozen=True)
class _NormalFit:
    mean: float
    std: float
    rows_used: int
    rows_dropped: int


@dataclass(frozen=True)
class NormalDistributionModel(RelationshipModel):
    """Normal fit (mean, sample standard deviation) to one quantitative
    input."""

    kind: ClassVar[RelationshipKind] = RelationshipKind.NORMAL_DISTRIBUTION

    def __post_init__(self) -> None:
        _require(
            len(self.inputs) == 1 and self.inputs[0].attribute_type is AttributeType.QUANTITATIVE,
            f"model {self.name!r}: distribution fit needs exactly one quantitative input",
        )
        _require(self.output is None, f"model {self.name!r}: density models take no output attribute")

    def train(self, rows: Sequence[Row]) -> "NormalDistributionModel":
        usable, dropped = _usable_rows(self, rows)
        _require(len(usable) >= 2, f"model {self.name!r}: normal fit needs at least 2 usable rows")
        values = np.array([float(r[self.inputs[0].name]) for r in usable])
        std = float(values.std(ddof=1))
        _require(std > 0, f"model {self.name!r}: values are constant, no distribution to fit")
        return replace(self, fit=_NormalFit(float(values.mean()), std, len(usable), dropped))

    def log_density(self, x: float) -> float:
        _check_trained(self)
        z = (x - self.fit.mean) / self.fit.std
        return -0.5 * z * z - math.log(self.fit.std * _SQRT_2PI)

    def score(self, row_or_value: Any) -> float:
        return math.exp(self.log_density(_density_value(self, row_or_value)))

    def evaluate(self, rows: Sequence[Row]) -> EvaluationReport:
        _check_trained(self)
        usable, dropped = _usable_rows(self, rows)
        _require(bool(usable), f"model {self.name!r}: no usable evaluation rows")
        mean_ll = sum(self.log_density(float(r[self.inputs[0].name])) for r in usable) / len(usable)
        return EvaluationReport(
            model_name=self.name,
            kind=self.kind,
            metrics={"mean_log_likelihood": mean_ll},
            rows_used=len(usable),
            rows_dropped=dropped,
        )


def average_path_length(n: int) -> float:
    """Expected unsuccessful-search path length in a binary tree of ``n``
    points; the isolation-forest normalizing constant."""
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    return 2.0 * (math.log(n - 1) + _EULER_GAMMA) - 2.0 * (n - 1) / n


@dataclass(frozen=True)
class _IsoLeaf:
    size: int


@dataclass(frozen=True)
class _IsoSplit:
    feature: int
    threshold: float
    left: "_IsoLeaf | _IsoSplit"
    right: "_IsoLeaf | _IsoSplit"


@dataclass(frozen=True)
class _IsoFit:
    trees: tuple[Any, ...]
    subsample: int
    rows_used: int
    rows_dropped: int


@dataclass(frozen=True)
class IsolationForestModel(RelationshipModel):
    """Isolation forest anomaly scorer over quantitative inputs.

    Scores are the standard 2^(-E[path]/c(subsample)) normalization and
    lie strictly in (0, 1); higher means more anomalous.
    """

    kind: ClassVar[RelationshipKind] = RelationshipKind.ISOLATION_FOREST

    trees: int = 100
    subsample: int = 256
    seed: int = 0

    def __post_init__(self) -> None:
        _require(bool(self.inputs), f"model {self.name!r}: isolation forest needs at least one input")
        _check_quantitative(self.inputs, f"model {self.name!r}")
        _require(self.output is None, f"model {self.name!r}: outlier models take no output attribute")
        _require(self.trees >= 1 and self.subsample >= 2, f"model {self.name!r}: bad forest shape")

    def hyperparameters(self) -> dict[str, Any]:
        return {"trees": self.trees, "subsample": self.subsample, "seed": self.seed}

    def train(self, rows: Sequence[Row]) -> "IsolationForestModel":
        usable, dropped = _usable_rows(self, rows)
        _require(len(usable) >= 2, f"model {self.name!r}: isolation forest needs at least 2 usable rows")
        data = np.array([[float(r[a.name]) for a in self.inputs] for r in usable])
        rng = np.random.default_rng(self.seed)
        psi = min(self.subsample, len(usable))
        height_limit = math.ceil(math.log2(psi))
        forest = []
        for _ in range(self.trees):
            take = rng.choice(len(data), size=psi, replace=False)
            forest.append(self._grow(data[take], 0, height_limit, rng))
        return replace(self, fit=_IsoFit(tuple(forest), psi, len(usable), dropped))

    def _grow(self, data: np.ndarray, depth: int, limit: int, rng: np.random.Generator):
        if depth >= limit or len(data) <= 1:
            return _IsoLeaf(len(data))
        spread = [q for q in range(data.shape[1]) if data[:, q].min() < data[:, q].max()]
        if not spread:
            return _IsoLeaf(len(data))
        q = int(rng.choice(spread))
        lo, hi = float(data[:, q].min()), float(data[:, q].max())
        t = float(rng.uniform(lo, hi))
        mask = data[:, q] < t
        return _IsoSplit(
            q,
            t,
            self._grow(data[mask], depth + 1, limit, rng),
            self._grow(data[~mask], depth + 1, limit, rng),
        )

    def _path_length(self, x: Sequence[float], node, depth: int = 0) -> float:
        while isinstance(node, _IsoSplit):
            node = node.left if x[node.feature] < node.threshold else node.right
            depth += 1
        return depth + average_path_length(node.size)

    def score(self, row_or_value: Any) -> float:
        _check_trained(self)
        if isinstance(row_or_value, Mapping):
            x = [float(v) for v in _input_vector(self, row_or_value)]
        else:
            _require(len(self.inputs) == 1, f"model {self.name!r}: a bare value only fits univariate inputs")
            _require(row_or_value is not None, f"model {self.name!r}: null input value")
            x = [float(row_or_value)]
        mean_path = sum(self._path_length(x, t) for t in self.fit.trees) / len(self.fit.trees)
        return 2.0 ** (-mean_path / average_path_length(self.fit.subsample))

    def evaluate(self, rows: Sequence[Row]) -> EvaluationReport:
        _check_trained(self)
        usable, dropped = _usable_rows(self, rows)
        _require(bool(usable), f"model {self.name!r}: no usable evaluation rows")
        scores = [self.score(r) for r in usable]
        return EvaluationReport(
            model_name=self.name,
            kind=self.kind,
            metrics={
                "score_min": min(scores),
                "score_mean": sum(scores) / len(scores),
                "score_max": max(scores),
            },
            rows_used=len(usable),
            rows_dropped=dropped,
        )


# ---------------------------------------------------------------------------
# Spec form: the declarative JSON shape stored on analytic knowledge nodes.
# Fitted state never serializes; training is deterministic, so models are
# retrained on load.

_MODEL_CLASSES: dict[RelationshipKind, type[RelationshipModel]] = {
    RelationshipKind.LINEAR_REGRESSION: LinearRegressionModel,
    RelationshipKind.DECISION_TREE: DecisionTreeModel,
    RelationshipKind.KNN: KnnModel,
    RelationshipKind.NAIVE_BAYES: NaiveBayesModel,
    RelationshipKind.KERNEL_DENSITY: KernelDensityModel,
    RelationshipKind.NORMAL_DISTRIBUTION: NormalDistributionModel,
    RelationshipKind.ISOLATION_FOREST: IsolationForestModel,
}

HYPERPARAMETER_DEFAULTS: dict[RelationshipKind, dict[str, Any]] = {
    RelationshipKind.LINEAR_REGRESSION: {},
    RelationshipKind.DECISION_TREE: {"max_depth": 8, "min_leaf": 1},
    RelationshipKind.KNN: {"k": 3},
    RelationshipKind.NAIVE_BAYES: {"alpha": 1.0},
    RelationshipKind.KERNEL_DENSITY: {"bandwidth": None},
    RelationshipKind.NORMAL_DISTRIBUTION: {},
    RelationshipKind.ISOLATION_FOREST: {"trees": 100, "subsample": 256, "seed": 0},
}


def normalize_model_spec(spec: Mapping[str, Any], default_seed: int | None = None) -> dict:
    """Fill hyperparameter defaults so equal specs compare equal.

    ``default_seed`` overrides the isolation-forest seed when the spec
    does not pin one itself.
    """
    try:
        kind = RelationshipKind(spec["kind"])
    except (KeyError, ValueError):
        raise ModelError(f"bad model spec kind in {spec!r}") from None
    if "name" not in spec:
        raise ModelError(f"model spec lacks a name: {spec!r}")
    hyper = dict(HYPERPARAMETER_DEFAULTS[kind])
    given = spec.get("hyperparameters") or {}
    unknown = set(given) - set(hyper)
    if unknown:
        raise ModelError(f"model spec {spec.get('name')!r}: unknown hyperparameters {sorted(unknown)}")
    if kind is RelationshipKind.ISOLATION_FOREST and default_seed is not None and "seed" not in given:
        hyper["seed"] = default_seed
    hyper.update(given)
    return {
        "name": spec["name"],
        "kind": kind.value,
        "inputs": list(spec.get("inputs") or []),
        "output": spec.get("output"),
        "hyperparameters": hyper,
    }


def model_spec_contains_wildcard(spec: Mapping[str, Any]) -> bool:
    if "*" in (spec.get("inputs") or []) or spec.get("output") == "*":
        return True
    return "*" in (spec.get("hyperparameters") or {}).values()


def model_from_spec(spec: Mapping[str, Any], schema: Mapping[str, Attribute]) -> RelationshipModel:
    """Instantiate a concrete model, resolving attribute types from the
    schema of the table it will train on."""
    norm = normalize_model_spec(spec)
    if model_spec_contains_wildcard(norm):
        raise ModelError(
            f"model spec {norm['name']!r} contains wildcards; it is a template, not a trainable model"
        )

    def resolve(name: str) -> Attribute:
        if name not in schema:
            raise ModelError(f"model {norm['name']!r}: attribute {name!r} not found in training schema")
        return schema[name]

    inputs = tuple(resolve(n) for n in norm["inputs"])
    output = resolve(norm["output"]) if norm["output"] is not None else None
    cls = _MODEL_CLASSES[RelationshipKind(norm["kind"])]
    return cls(name=norm["name"], inputs=inputs, output=output, **norm["hyperparameters"])


def model_to_spec(model: RelationshipModel) -> dict:
    return {
        "name": model.name,
        "kind": model.kind.value,
        "inputs": [a.name for a in model.inputs],
        "output": model.output.name if model.output is not None else None,
        "hyperparameters": model.hyperparameters(),
    }


# Free-function aliases mirroring the operation names.

def train(model: RelationshipModel, rows: Sequence[Row]) -> RelationshipModel:
    return model.train(rows)


def predict(model: RelationshipModel, row: Row) -> Value:
    return model.predict(row)


def score(model: RelationshipModel, row_or_value: Any) -> float:
    return model.score(row_or_value)


def evaluate(model: RelationshipModel, rows: Sequence[Row]) -> EvaluationReport:
    return model.evaluate(rows)
