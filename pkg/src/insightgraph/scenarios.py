"""Bundled demonstration scenarios with golden expectations.

Each scenario builds a small synthetic dataset that mimics a real
analysis (crime peaks, award-winning movies, monthly rents, wildlife
strikes), declares the graph in spec-file form, runs every analytic
node, and checks the outcome against hand-derived golden values. The
fixtures are constructed so the encoded effects are unambiguous: trend
slopes are at least 0.5 incidents/year in magnitude, and regressions
over filtered rows are exact.

``--data name=path`` on the CLI substitutes real CSVs for any fixture.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .dot import graph_to_dot
from .insight import (
    TaskStatus,
    add_task_insight,
    complete,
    create_insight,
    is_fully_specified,
    matching_insights,
    task_status,
)
from .knowledge import KnowledgeGraph, add_source, results
from .metrics import breadth, depth, graph_stats, validate
from .relationships import LinearRegressionModel
from .specfile import graph_to_json, load_spec_dict
from .tabular import Table, write_csv
from .transforms import execute_pipeline

SCENARIO_IDS = ("baltimore", "movies", "rents", "birdstrikes")


@dataclass(frozen=True)
class Check:
    label: str
    passed: bool
    detail: str


@dataclass
class ScenarioResult:
    scenario: str
    checks: list[Check]
    graph: KnowledgeGraph
    datasets: dict[str, Table]
    tables: dict[str, Table] = field(default_factory=dict)
    extras: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _check(checks: list[Check], label: str, passed: bool, detail: str) -> None:
    checks.append(Check(label, bool(passed), detail))


def _expect(checks: list[Check], label: str, actual: Any, expected: Any) -> None:
    _check(checks, label, actual == expected, f"expected {expected!r}, got {actual!r}")


# ---------------------------------------------------------------------------
# Baltimore crime peaks

_CRIME_PREMISES = {
    "STREET": ("O", "LARCENY"),
    "ROW/TOWNHOUSE": ("I", "BURGLARY"),
    "APARTMENT": ("I", "COMMON ASSAULT"),
    "BUSINESS": ("I", "ROBBERY"),
}

_CRIME_DATES = [
    ("2015-04-27", 6),
    ("2015-04-26", 4),
    ("2015-04-25", 3),
    ("2015-04-12", 2),
    ("2015-01-15", 2),
    ("2014-07-04", 1),
    ("2013-03-09", 1),
    ("2012-11-21", 1),
]

BALTIMORE_TOP_DAYS = [("2015-04-27", 6), ("2015-04-26", 4), ("2015-04-25", 3)]


def baltimore_rows() -> list[dict]:
    premises = list(_CRIME_PREMISES)
    rows = []
    i = 0
    for day, count in _CRIME_DATES:
        for _ in range(count):
            premise = premises[i % len(premises)]
            inside, description = _CRIME_PREMISES[premise]
            rows.append(
                {
                    "CrimeDate": day,
                    "Inside/Outside": inside,
                    "Premise": premise,
                    "Description": description,
                }
            )
            i += 1
    return rows


def baltimore_spec() -> dict:
    crime_schema = [
        {"name": "CrimeDate", "type": "temporal"},
        {"name": "Inside/Outside", "type": "nominal"},
        {"name": "Premise", "type": "nominal"},
        {"name": "Description", "type": "nominal"},
    ]
    agg_transform = {
        "name": "aggTransform",
        "sources": ["baltimoreCrime"],
        "transforms": [
            {"op": "groupby", "args": {"keys": ["CrimeDate"]}},
            {"op": "rollup", "args": {"aggregates": [{"out": "count", "op": "count"}]}},
            {"op": "orderby", "args": {"keys": [{"attribute": "count", "direction": "desc"}]}},
            {"op": "filter", "args": {"predicate": "rank() <= 3"}},
        ],
    }
    return {
        "datasets": [{"name": "baltimoreCrime", "schema": crime_schema, "rows": baltimore_rows()}],
        "concepts": [{"name": "Crime"}, {"name": "Protest"}],
        "instances": [
            {
                "name": "WikipediaArticle-2015BaltimoreProtests",
                "concept": "Protest",
                "metadata": {
                    "attributes": [{"name": "link", "type": "nominal"}],
                    "values": {"link": "https://en.wikipedia.org/wiki/2015_Baltimore_protests"},
                },
            }
        ],
        "domainNodes": [
            {
                "name": "2015BaltimoreProtests",
                "instance": "WikipediaArticle-2015BaltimoreProtests",
                "description": "city-wide protests in April 2015",
            }
        ],
        "transforms": [agg_transform],
        "relationshipModels": [
            {
                "name": "predictCrimeType",
                "kind": "decisionTreeClassification",
                "inputs": ["Inside/Outside", "Premise"],
                "output": "Description",
            }
        ],
        "analyticNodes": [
            {
                "name": "peakCrimes",
                "timestamp": 1,
                "transform": "aggTransform",
                "description": "top 3 days by reported crimes",
            },
            {
                "name": "predictCrimeTypeNode",
                "timestamp": 2,
                "relationship": "predictCrimeType",
                "source": "baltimoreCrime",
                "description": "does location signal the crime type?",
            },
        ],
        "insights": [
            {
                "name": "johnsInsight",
                "domainKnowledge": ["2015BaltimoreProtests"],
                "analyticKnowledge": ["peakCrimes"],
                "description": "the crime peak lines up with the protests",
            },
            {
                "name": "protestsObjective",
                "domainKnowledge": ["2015BaltimoreProtests"],
                "analyticKnowledge": "*",
                "description": "how did the protests affect crime levels?",
            },
            {
                "name": "aprilCrimeObjective",
                "domainKnowledge": "*",
                "analyticKnowledge": ["peakCrimes"],
                "description": "what drove the late-April crime peak?",
            },
        ],
        "tasks": [
            {
                "name": "protestsTask",
                "objective": "protestsObjective",
                "insights": ["johnsInsight"],
            }
        ],
        "edges": [
            {"from": "2015BaltimoreProtests", "to": "johnsInsight", "type": "sourceTarget"},
            {"from": "peakCrimes", "to": "johnsInsight", "type": "sourceTarget"},
            {"from": "2015BaltimoreProtests", "to": "protestsObjective", "type": "sourceTarget"},
            {"from": "peakCrimes", "to": "aprilCrimeObjective", "type": "sourceTarget"},
        ],
    }


BALTIMORE_CENSUS = {
    "concepts": 2,
    "instances": 1,
    "nodes": {"domain": 1, "analytic": 2, "insight": 1, "objective": 2, "task": 1, "total": 7},
}


def run_baltimore(seed: int = 0) -> ScenarioResult:
    graph, datasets = load_spec_dict(baltimore_spec(), default_seed=seed)
    checks: list[Check] = []
    stats = graph_stats(graph)
    _expect(checks, "object census", {k: stats[k] for k in ("concepts", "instances", "nodes")}, BALTIMORE_CENSUS)
    _expect(checks, "zero validation violations", [str(v) for v in validate(graph)], [])

    top_days = results(graph, "peakCrimes", datasets)
    got = [(r["CrimeDate"], r["count"]) for r in top_days.iter_rows()]
    _expect(checks, "top 3 crime days", got, BALTIMORE_TOP_DAYS)

    report = results(graph, "predictCrimeTypeNode", datasets)
    _expect(checks, "crime-type classifier in-sample accuracy", report.metrics["accuracy"], 1.0)

    _expect(checks, "protestsTask status", task_status(graph, "protestsTask"), TaskStatus.SATISFIED)
    _expect(checks, "depth of johnsInsight", depth(graph, "johnsInsight"), 2)
    _expect(checks, "depth of peakCrimes", depth(graph, "peakCrimes"), 1)
    _expect(checks, "insights meeting protestsObjective", matching_insights(graph, "protestsObjective"), ["johnsInsight"])
    _expect(checks, "insights meeting aprilCrimeObjective", matching_insights(graph, "aprilCrimeObjective"), ["johnsInsight"])

    return ScenarioResult(
        "baltimore",
        checks,
        graph,
        datasets,
        tables={"top_days": top_days},
    )


# ---------------------------------------------------------------------------
# Movies: award winners, film length versus rating

_MOVIES = [
    # in-window winners: rating is exactly 9.5 - 0.02 * length
    ("Marlowe's Shadow", 1996, 150, 6.5),
    ("Glass Harbor", 1998, 130, 6.9),
    ("The Long Meridian", 2000, 170, 6.1),
    ("Northern Lights", 2002, 110, 7.3),
    ("Last Cartographer", 2004, 190, 5.7),
    # winners before the window
    ("Dust & Brass", 1987, 95, 7.9),
    ("Silent Foundry", 1990, 160, 6.0),
    ("Winter Accord", 1993, 125, 7.6),
    # never won
    ("Cobalt Sky", 1995, 100, 8.4),
    ("Paper Lanterns", 1999, 140, 5.2),
    ("The Gilded Cage", 2001, 105, 6.6),
    ("Roadside Prophets", 2003, 88, 7.8),
    ("Ember Days", 1986, 132, 6.2),
    ("Quiet Tides", 1989, 118, 8.0),
]

_WINNERS = [
    "Marlowe's Shadow",
    "Glass Harbor",
    "The Long Meridian",
    "Northern Lights",
    "Last Cartographer",
    "Dust & Brass",
    "Silent Foundry",
    "Winter Accord",
]

MOVIES_WINDOW_ROWS = 5
MOVIES_SLOPE = -0.02
MOVIES_INTERCEPT = 9.5


def movies_spec() -> dict:
    movie_rows = [
        {"title": t, "year": y, "length": l, "rating": r} for t, y, l, r in _MOVIES
    ]
    oscar_rows = [
        {"movie": title, "award_year": year + 1, "category": "Best Picture"}
        for title, year, _, _ in _MOVIES
        if title in _WINNERS
    ]
    oscar_rows.append({"movie": "The Vanishing Coast", "award_year": 1997, "category": "Best Picture"})
    return {
        "datasets": [
            {
                "name": "movies",
                "schema": [
                    {"name": "title", "type": "nominal"},
                    {"name": "year", "type": "quantitative"},
                    {"name": "length", "type": "quantitative"},
                    {"name": "rating", "type": "quantitative"},
                ],
                "rows": movie_rows,
            },
            {
                "name": "oscars",
                "schema": [
                    {"name": "movie", "type": "nominal"},
                    {"name": "award_year", "type": "quantitative"},
                    {"name": "category", "type": "nominal"},
                ],
                "rows": oscar_rows,
            },
        ],
        "concepts": [{"name": "FilmQuality"}],
        "instances": [
            {
                "name": "Article-RuntimeAndReception",
                "concept": "FilmQuality",
                "metadata": {
                    "attributes": [{"name": "link", "type": "nominal"}],
                    "values": {"link": "https://example.org/runtime-and-reception"},
                },
            }
        ],
        "domainNodes": [
            {
                "name": "filmLengthNode",
                "instance": "Article-RuntimeAndReception",
                "description": "running time is said to weigh on ratings",
            }
        ],
        "transforms": [
            {
                "name": "awardWinnersSpec",
                "sources": ["movies", "oscars"],
                "transforms": [
                    {"op": "join", "args": {"right": "oscars", "on": [{"left": "title", "right": "movie"}]}},
                    {"op": "filter", "args": {"predicate": "year >= 1995"}},
                ],
            }
        ],
        "relationshipModels": [
            {
                "name": "lengthRatingModel",
                "kind": "linearRegression",
                "inputs": ["length"],
                "output": "rating",
            }
        ],
        "analyticNodes": [
            {
                "name": "moviesAnalysis",
                "timestamp": 1,
                "transform": "awardWinnersSpec",
                "relationship": "lengthRatingModel",
                "description": "regress rating on length over recent winners",
            }
        ],
        "insights": [
            {
                "name": "moviesObjective",
                "domainKnowledge": ["filmLengthNode"],
                "analyticKnowledge": "*",
                "description": "do longer winners rate worse?",
            }
        ],
        "tasks": [
            {"name": "moviesTask", "objective": "moviesObjective", "insights": []},
        ],
        "edges": [
            {"from": "filmLengthNode", "to": "moviesObjective", "type": "sourceTarget"},
        ],
    }


# counted after the harness records moviesInsight and completes the
# objective, which registers one more fully specified insight
MOVIES_CENSUS = {
    "concepts": 1,
    "instances": 1,
    "nodes": {"domain": 1, "analytic": 1, "insight": 2, "objective": 1, "task": 1, "total": 6},
}


def run_movies(seed: int = 0) -> ScenarioResult:
    graph, datasets = load_spec_dict(movies_spec(), default_seed=seed)
    checks: list[Check] = []

    _expect(checks, "task starts open", task_status(graph, "moviesTask"), TaskStatus.OPEN)

    # the winners-only window is exactly linear, so the fit is exact
    report = results(graph, "moviesAnalysis", datasets)
    _check(checks, "regression is exact on winners", abs(report.metrics["rmse"]) < 1e-9, f"rmse {report.metrics['rmse']}")
    _check(checks, "regression explains the window", abs(report.metrics["r2"] - 1.0) < 1e-9, f"r2 {report.metrics['r2']}")
    _expect(checks, "joined window row count", report.rows_used, MOVIES_WINDOW_ROWS)

    node = graph.node("moviesAnalysis")
    joined = execute_pipeline(node.transform, datasets, name="awardWinners")
    model = LinearRegressionModel(
        name="lengthRating",
        inputs=(joined.attribute("length"),),
        output=joined.attribute("rating"),
    ).train(joined.rows)
    slope, intercept = model.fit.coefficients[0], model.fit.intercept
    _check(checks, "slope is negative", slope < 0, f"slope {slope}")
    _check(
        checks,
        "fit matches construction",
        abs(slope - MOVIES_SLOPE) < 1e-9 and abs(intercept - MOVIES_INTERCEPT) < 1e-9,
        f"slope {slope}, intercept {intercept}",
    )

    insight = create_insight(
        graph,
        "moviesInsight",
        ["filmLengthNode"],
        ["moviesAnalysis"],
        description="longer recent winners rate lower",
    )
    add_source(graph, insight, "filmLengthNode")
    add_source(graph, insight, "moviesAnalysis")
    add_task_insight(graph, "moviesTask", insight)
    _expect(checks, "task satisfied after linking the insight", task_status(graph, "moviesTask"), TaskStatus.SATISFIED)

    completed = complete(graph, "moviesObjective", {"analyticKnowledge": ["moviesAnalysis"]})
    _check(checks, "completed objective is an insight", is_fully_specified(graph, completed), completed.name)
    _expect(checks, "objective links into the completed node", graph.node(completed.name).sources, ["moviesObjective"])

    stats = graph_stats(graph)
    _expect(checks, "object census", {k: stats[k] for k in ("concepts", "instances", "nodes")}, MOVIES_CENSUS)
    _expect(checks, "zero validation violations", [str(v) for v in validate(graph)], [])

    return ScenarioResult(
        "movies",
        checks,
        graph,
        datasets,
        tables={"award_winners": joined},
        extras={"slope": slope, "intercept": intercept},
    )


# ---------------------------------------------------------------------------
# Rents: three looks at one quantitative column

RENTS = [
    520, 580, 610, 640, 700, 730, 760, 820, 850, 880, 910, 970,
    1000, 1030, 1090, 1120, 1180, 1210, 1270, 1340, 1420, 1510, 1640, 1780,
]

RENT_BIN_COUNT = 5


def rents_spec() -> dict:
    return {
        "datasets": [
            {
                "name": "rents",
                "schema": [{"name": "rent", "type": "quantitative"}],
                "rows": [{"rent": r} for r in RENTS],
            }
        ],
        "transforms": [
            {
                "name": "minmaxSpec",
                "sources": ["rents"],
                "transforms": [
                    {
                        "op": "rollup",
                        "args": {
                            "aggregates": [
                                {"out": "min_rent", "op": "min", "attribute": "rent"},
                                {"out": "max_rent", "op": "max", "attribute": "rent"},
                            ]
                        },
                    }
                ],
            },
            {
                "name": "histogramSpec",
                "sources": ["rents"],
                "transforms": [
                    {"op": "bin", "args": {"attribute": "rent", "out": "bin", "bins": RENT_BIN_COUNT}},
                    {"op": "groupby", "args": {"keys": ["bin_start", "bin_end"]}},
                    {"op": "rollup", "args": {"aggregates": [{"out": "count", "op": "count"}]}},
                    {"op": "orderby", "args": {"keys": [{"attribute": "bin_start", "direction": "asc"}]}},
                ],
            },
        ],
        "relationshipModels": [
            {"name": "rentNormal", "kind": "normalDistribution", "inputs": ["rent"]}
        ],
        "analyticNodes": [
            {"name": "minmaxRollup", "timestamp": 1, "transform": "minmaxSpec", "description": "rent extremes"},
            {
                "name": "normalFit",
                "timestamp": 2,
                "relationship": "rentNormal",
                "source": "rents",
                "description": "normal fit over rents",
            },
            {"name": "rentHistogram", "timestamp": 3, "transform": "histogramSpec", "description": "rent distribution shape"},
        ],
    }


def run_rents(seed: int = 0) -> ScenarioResult:
    graph, datasets = load_spec_dict(rents_spec(), default_seed=seed)
    checks: list[Check] = []

    for name in ("minmaxRollup", "normalFit", "rentHistogram"):
        _expect(checks, f"depth of {name}", depth(graph, name), 1)

    minmax = results(graph, "minmaxRollup", datasets)
    _expect(
        checks,
        "rent extremes",
        (minmax.rows[0]["min_rent"], minmax.rows[0]["max_rent"]),
        (min(RENTS), max(RENTS)),
    )

    hist = results(graph, "rentHistogram", datasets)
    _check(checks, "histogram has at least 3 bins", len(hist) >= 3, f"{len(hist)} bins")
    _expect(checks, "histogram counts cover every rent", sum(r["count"] for r in hist.iter_rows()), len(RENTS))

    b_minmax = breadth(graph, "minmaxRollup", datasets)
    b_normal = breadth(graph, "normalFit", datasets)
    b_hist = breadth(graph, "rentHistogram", datasets)
    _check(checks, "minmax narrower than histogram", b_minmax < b_hist, f"{b_minmax} vs {b_hist}")
    _check(checks, "normal fit narrower than histogram", b_normal < b_hist, f"{b_normal} vs {b_hist}")
    _expect(checks, "zero validation violations", [str(v) for v in validate(graph)], [])

    return ScenarioResult(
        "rents",
        checks,
        graph,
        datasets,
        tables={"minmax": minmax, "histogram": hist},
        extras={"breadths": {"minmax": b_minmax, "normal": b_normal, "histogram": b_hist}},
    )


# ---------------------------------------------------------------------------
# Bird strikes: precip versus sky pipelines over the same incidents

BIRDSTRIKE_YEARS = list(range(2000, 2008))

# counts per condition at year index k; each inner function is linear so
# the least-squares slope equals the stated rate exactly
_PRECIP_COUNTS = {
    "rain": lambda k: 4 + 2 * k,
    "none": lambda k: 30 - k,
    "fog": lambda k: 12 - k,
    "snow": lambda k: 10 - k,
}
_PRECIP_NULLS = lambda k: 4 + k
_SKY_COUNTS = {
    "clear": lambda k: 10 + k,
    "some clouds": lambda k: 8 + 2 * k,
    "overcast": lambda k: 6 + k,
}

PRECIP_SLOPES = {"rain": 2.0, "none": -1.0, "fog": -1.0, "snow": -1.0}
SKY_SLOPES = {"clear": 1.0, "some clouds": 2.0, "overcast": 1.0}


def birdstrike_rows() -> list[dict]:
    rows = []
    for k, year in enumerate(BIRDSTRIKE_YEARS):
        precip_values: list[str | None] = []
        for condition, rate in _PRECIP_COUNTS.items():
            precip_values.extend([condition] * rate(k))
        precip_values.extend([None] * _PRECIP_NULLS(k))
        sky_values: list[str | None] = []
        for condition, rate in _SKY_COUNTS.items():
            sky_values.extend([condition] * rate(k))
        sky_values.extend([None] * (len(precip_values) - len(sky_values)))
        for i, (precip, sky) in enumerate(zip(precip_values, sky_values)):
            rows.append(
                {
                    "incident_date": f"{year}-{(i % 12) + 1:02d}-{(i % 28) + 1:02d}",
                    "precip": precip,
                    "sky": sky,
                }
            )
    return rows


def _strike_pipeline(attribute: str) -> dict:
    return {
        "name": f"{attribute}Spec",
        "sources": ["strikes"],
        "transforms": [
            {"op": "filter", "args": {"predicate": f"isValid({attribute})"}},
            {"op": "derive", "args": {"out": "year", "expr": "year(incident_date)"}},
            {"op": "groupby", "args": {"keys": ["year", attribute]}},
            {"op": "rollup", "args": {"aggregates": [{"out": "count", "op": "count"}]}},
            {"op": "orderby", "args": {"keys": [{"attribute": "year"}, {"attribute": attribute}]}},
        ],
    }


def birdstrikes_spec() -> dict:
    return {
        "datasets": [
            {
                "name": "strikes",
                "schema": [
                    {"name": "incident_date", "type": "temporal"},
                    {"name": "precip", "type": "nominal"},
                    {"name": "sky", "type": "nominal"},
                ],
                "rows": birdstrike_rows(),
            }
        ],
        "concepts": [{"name": "Weather"}],
        "instances": [
            {
                "name": "FieldNote-WeatherAndStrikes",
                "concept": "Weather",
                "metadata": {
                    "attributes": [{"name": "note", "type": "nominal"}],
                    "values": {"note": "strike reports carry precipitation and sky cover"},
                },
            }
        ],
        "domainNodes": [
            {
                "name": "weatherConditionsNode",
                "instance": "FieldNote-WeatherAndStrikes",
                "description": "weather context for strike reports",
            }
        ],
        "transforms": [_strike_pipeline("precip"), _strike_pipeline("sky")],
        "analyticNodes": [
            {
                "name": "precipNode",
                "timestamp": 1,
                "transform": "precipSpec",
                "description": "strikes per year by precipitation",
            },
            {
                "name": "skyNode",
                "timestamp": 2,
                "transform": "skySpec",
                "description": "strikes per year by sky cover",
            },
        ],
        "insights": [
            {
                "name": "noTimeTrendInsight",
                "domainKnowledge": ["weatherConditionsNode"],
                "analyticKnowledge": ["precipNode"],
                "description": "most precipitation conditions show no growth",
            },
            {
                "name": "weatherTrendInsight",
                "domainKnowledge": ["weatherConditionsNode"],
                "analyticKnowledge": ["skyNode"],
                "description": "every sky condition shows growth",
            },
            {
                "name": "strikesObjective",
                "domainKnowledge": ["weatherConditionsNode"],
                "analyticKnowledge": "*",
                "description": "do weather conditions relate to strike counts over time?",
            },
        ],
        "tasks": [
            {
                "name": "strikesTask",
                "objective": "strikesObjective",
                "insights": ["noTimeTrendInsight", "weatherTrendInsight"],
            }
        ],
        "edges": [
            {"from": "weatherConditionsNode", "to": "noTimeTrendInsight", "type": "sourceTarget"},
            {"from": "precipNode", "to": "noTimeTrendInsight", "type": "sourceTarget"},
            {"from": "weatherConditionsNode", "to": "weatherTrendInsight", "type": "sourceTarget"},
            {"from": "skyNode", "to": "weatherTrendInsight", "type": "sourceTarget"},
            {"from": "weatherConditionsNode", "to": "strikesObjective", "type": "sourceTarget"},
            {"from": "noTimeTrendInsight", "to": "weatherTrendInsight", "type": "related"},
        ],
    }


BIRDSTRIKES_CENSUS = {
    "concepts": 1,
    "instances": 1,
    "nodes": {"domain": 1, "analytic": 2, "insight": 2, "objective": 1, "task": 1, "total": 7},
}


def condition_slopes(table: Table, condition: str) -> dict[str, float]:
    """Least-squares slope of count against year, per condition value."""
    year = table.attribute("year")
    count = table.attribute("count")
    groups: dict[str, list[dict]] = {}
    for row in table.iter_rows():
        groups.setdefault(str(row[condition]), []).append(row)
    slopes = {}
    for label, rows in sorted(groups.items()):
        model = LinearRegressionModel(name=f"trend[{label}]", inputs=(year,), output=count).train(rows)
        slopes[label] = model.fit.coefficients[0]
    return slopes


def run_birdstrikes(seed: int = 0) -> ScenarioResult:
    graph, datasets = load_spec_dict(birdstrikes_spec(), default_seed=seed)
    checks: list[Check] = []

    precip_table = results(graph, "precipNode", datasets)
    sky_table = results(graph, "skyNode", datasets)
    precip_slopes = condition_slopes(precip_table, "precip")
    sky_slopes = condition_slopes(sky_table, "sky")

    for condition, slope in sorted(precip_slopes.items()):
        if condition == "rain":
            _check(checks, "precip: rain trends upward", slope > 0.5, f"slope {slope:.3f}")
        else:
            _check(checks, f"precip: {condition} does not trend upward", slope <= -0.5, f"slope {slope:.3f}")
    for condition, slope in sorted(sky_slopes.items()):
        _check(checks, f"sky: {condition} trends upward", slope > 0.5, f"slope {slope:.3f}")

    for label, expected in sorted({**PRECIP_SLOPES}.items()):
        _check(
            checks,
            f"precip slope of {label} matches construction",
            abs(precip_slopes[label] - expected) < 1e-9,
            f"{precip_slopes[label]} vs {expected}",
        )
    for label, expected in sorted({**SKY_SLOPES}.items()):
        _check(
            checks,
            f"sky slope of {label} matches construction",
            abs(sky_slopes[label] - expected) < 1e-9,
            f"{sky_slopes[label]} vs {expected}",
        )

    _expect(checks, "strikesTask status", task_status(graph, "strikesTask"), TaskStatus.SATISFIED)
    stats = graph_stats(graph)
    _expect(checks, "object census", {k: stats[k] for k in ("concepts", "instances", "nodes")}, BIRDSTRIKES_CENSUS)
    _expect(checks, "zero validation violations", [str(v) for v in validate(graph)], [])

    notes = [
        f"precip[{label}] slope: {slope:+.2f} incidents/year" for label, slope in sorted(precip_slopes.items())
    ] + [
        f"sky[{label}] slope: {slope:+.2f} incidents/year" for label, slope in sorted(sky_slopes.items())
    ]
    return ScenarioResult(
        "birdstrikes",
        checks,
        graph,
        datasets,
        tables={"precip_by_year": precip_table, "sky_by_year": sky_table},
        extras={"precip_slopes": precip_slopes, "sky_slopes": sky_slopes},
        notes=notes,
    )


# ---------------------------------------------------------------------------
# Registry and artifacts

SCENARIO_RUNNERS: dict[str, Callable[[int], ScenarioResult]] = {
    "baltimore": run_baltimore,
    "movies": run_movies,
    "rents": run_rents,
    "birdstrikes": run_birdstrikes,
}

SCENARIO_SPECS: dict[str, Callable[[], dict]] = {
    "baltimore": baltimore_spec,
    "movies": movies_spec,
    "rents": rents_spec,
    "birdstrikes": birdstrikes_spec,
}


def run_scenario(scenario: str, seed: int = 0) -> ScenarioResult:
    try:
        runner = SCENARIO_RUNNERS[scenario]
    except KeyError:
        raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIO_IDS}") from None
    return runner(seed)


def write_artifacts(result: ScenarioResult, out_dir: str | Path) -> list[Path]:
    """Write the scenario's spec, graph, result CSVs, and figures.

    Figures land next to the delimited outputs so a report directory is
    self-contained.
    """
    from . import figures  # defer matplotlib until a report is actually written

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    prefix = result.scenario
    written: list[Path] = []

    spec_path = out_dir / f"{prefix}_spec.json"
    spec_path.write_text(json.dumps(SCENARIO_SPECS[result.scenario](), indent=2) + "\n", encoding="utf-8")
    written.append(spec_path)

    graph_path = out_dir / f"{prefix}_graph.json"
    graph_path.write_text(json.dumps(graph_to_json(result.graph), indent=2) + "\n", encoding="utf-8")
    written.append(graph_path)

    dot_path = out_dir / f"{prefix}_graph.dot"
    dot_path.write_text(graph_to_dot(result.graph, title=prefix), encoding="utf-8")
    written.append(dot_path)

    for label, table in result.tables.items():
        csv_path = out_dir / f"{prefix}_{label}.csv"
        write_csv(table, csv_path)
        written.append(csv_path)

    if result.scenario == "baltimore":
        written.append(
            figures.save_bars(
                result.tables["top_days"],
                out_dir / f"{prefix}_top_days.png",
                "Top reported-crime days",
                label_attr="CrimeDate",
            )
        )
    elif result.scenario == "movies":
        written.append(
            figures.save_scatter_fit(
                result.tables["award_winners"],
                out_dir / f"{prefix}_length_rating.png",
                "Recent winners: length vs rating",
                x_attr="length",
                y_attr="rating",
                slope=result.extras["slope"],
                intercept=result.extras["intercept"],
            )
        )
    elif result.scenario == "rents":
        written.append(
            figures.save_histogram(
                result.tables["histogram"],
                out_dir / f"{prefix}_histogram.png",
                "Rent distribution",
                start_attr="bin_start",
                end_attr="bin_end",
            )
        )
    elif result.scenario == "birdstrikes":
        written.append(
            figures.save_condition_trends(
                result.tables["precip_by_year"],
                "precip",
                out_dir / f"{prefix}_precip.png",
                "Strikes per year by precipitation",
            )
        )
        written.append(
            figures.save_condition_trends(
                result.tables["sky_by_year"],
                "sky",
                out_dir / f"{prefix}_sky.png",
                "Strikes per year by sky cover",
            )
        )
    return written
