"""Matplotlib renderings written next to the delimited scenario outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .tabular import Table


def save_condition_trends(
    table: Table, condition: str, out_path: str | Path, title: str, year_attr: str = "year", count_attr: str = "count"
) -> Path:
    """One line per condition of yearly counts, e.g. strikes per year by
    weather condition."""
    series: dict[str, list[tuple[float, float]]] = {}
    for row in table.iter_rows():
        series.setdefault(str(row[condition]), []).append((row[year_attr], row[count_attr]))
    fig, ax = plt.subplots(figsize=(6, 4))
    for label in sorted(series):
        points = sorted(series[label])
        ax.plot([p[0] for p in points], [p[1] for p in points], marker="o", label=label)
    ax.set_xlabel(year_attr)
    ax.set_ylabel(count_attr)
    ax.set_title(title)
    ax.legend(title=condition, fontsize=8)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def save_histogram(table: Table, out_path: str | Path, title: str, start_attr: str, end_attr: str, count_attr: str = "count") -> Path:
    """Bar chart of a binned rollup (start/end columns plus a count)."""
    rows = sorted(table.iter_rows(), key=lambda r: r[start_attr])
    fig, ax = plt.subplots(figsize=(6, 4))
    for row in rows:
        width = row[end_attr] - row[start_attr]
        ax.bar(row[start_attr], row[count_attr], width=width, align="edge", edgecolor="black", color="#4878b0")
    ax.set_ylabel(count_attr)
    ax.set_title(title)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def save_bars(table: Table, out_path: str | Path, title: str, label_attr: str, count_attr: str = "count") -> Path:
    """Labeled bar chart, e.g. top crime days by report count."""
    rows = list(table.iter_rows())
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([str(r[label_attr]) for r in rows], [r[count_attr] for r in rows], color="#c44e52")
    ax.set_ylabel(count_attr)
    ax.set_title(title)
    ax.tick_params(axis="x", labelrotation=30)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def save_scatter_fit(
    table: Table,
    out_path: str | Path,
    title: str,
    x_attr: str,
    y_attr: str,
    slope: float,
    intercept: float,
) -> Path:
    """Scatter plot with a fitted regression line."""
    xs = [r[x_attr] for r in table.iter_rows() if r[x_attr] is not None and r[y_attr] is not None]
    ys = [r[y_attr] for r in table.iter_rows() if r[x_attr] is not None and r[y_attr] is not None]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(xs, ys, s=18, alpha=0.8)
    if xs:
        lo, hi = min(xs), max(xs)
        ax.plot([lo, hi], [intercept + slope * lo, intercept + slope * hi], color="#c44e52")
    ax.set_xlabel(x_attr)
    ax.set_ylabel(y_attr)
    ax.set_title(title)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path
