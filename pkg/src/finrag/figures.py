"""Matplotlib figure rendering for report outputs.

Every report path that writes delimited data can also render the matching
figure next to it: accumulated-return curves for backtests, win/tie/lose
bars for preference evaluations.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .backtest import EquityCurve


def plot_equity_curves(
    curves: Mapping[str, EquityCurve],
    path: str | Path,
    title: str = "Accumulated return by month",
) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(9, 5))
    for name, curve in curves.items():
        ax.plot(curve.months, curve.ar, marker="o", markersize=3, label=name)
    ax.set_xlabel("month")
    ax.set_ylabel("accumulated return")
    ax.set_title(title)
    ax.axhline(0.0, color="grey", linewidth=0.8)
    if curves:
        ax.legend()
        step = max(1, len(next(iter(curves.values())).months) // 12)
        for label_index, tick in enumerate(ax.get_xticklabels()):
            tick.set_visible(label_index % step == 0)
        fig.autofmt_xdate(rotation=45)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_preference_counts(
    aggregates: Mapping[str, float],
    path: str | Path,
    title: str = "Pairwise preference outcomes",
) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    outcomes = ["win", "tie", "lose"]
    values = [aggregates.get(outcome, 0) for outcome in outcomes]
    ax.bar(outcomes, values, color=["#2a9d8f", "#e9c46a", "#e76f51"])
    ax.set_ylabel("items")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
