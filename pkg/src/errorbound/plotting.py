"""File-writing figure helpers behind the CLI's optional SVG output.

The CSV files remain the interface contract; these renderings are cosmetic
companions written next to them. Output is kept byte-deterministic: the Agg
backend, a fixed svg.hashsalt for element ids, and no embedded creation
date.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "errorbound"

import matplotlib.pyplot as plt
import numpy as np

from .bounds import BoundCurve
from .frontier import SweepRow
from .sequences import ChainReport, PplDemoRow
from .simulation import SimulationRecord

__all__ = [
    "render_bound_curves",
    "render_scatter",
    "render_frontier",
    "render_chain",
    "render_ppl",
]

_CURVE_STYLE = {
    "unconstrained_g": ("tab:gray", "--"),
    "refined_h": ("tab:blue", "-"),
    "linear": ("tab:orange", ":"),
}


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _plot_curves(ax, curves: Iterable[BoundCurve]) -> None:
    for curve in curves:
        color, style = _CURVE_STYLE.get(curve.kind, ("black", "-"))
        xs = [p[0] for p in curve.points]
        ys = [p[1] for p in curve.points]
        ax.plot(xs, ys, style, color=color, label=f"{curve.kind} (t={curve.t:g})")


def render_bound_curves(curves: Sequence[BoundCurve], path: str) -> str:
    """Draw the lower-bound curves over the mismatch axis."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    _plot_curves(ax, curves)
    ax.set_xlabel("error mismatch")
    ax.set_ylabel("divergence lower bound")
    ax.legend(fontsize=8)
    return _save(fig, path)


def render_scatter(
    records: Sequence[SimulationRecord], curves: Sequence[BoundCurve], path: str
) -> str:
    """Scatter sampled (mismatch, divergence) pairs over the bound curves.

    Infinite divergences cannot be drawn and are dropped; the bound claim
    concerns finite values only.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    by_strategy: dict[str, list[tuple[float, float]]] = {}
    for record in records:
        if math.isfinite(record.kl):
            by_strategy.setdefault(record.strategy, []).append((record.delta, record.kl))
    for strategy, points in sorted(by_strategy.items()):
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        ax.scatter(xs, ys, s=4, alpha=0.3, linewidths=0, label=f"{strategy} ({len(points)})")
    _plot_curves(ax, curves)
    ax.set_xlabel("error mismatch")
    ax.set_ylabel("divergence")
    ax.legend(fontsize=8, markerscale=3)
    return _save(fig, path)


def render_frontier(rows: Sequence[SweepRow], path: str) -> str:
    """Closed-form curve with finite-perturbation markers along the family sweep."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ordered = sorted(rows, key=lambda r: r.delta)
    deltas = [r.delta for r in ordered]
    ax.plot(deltas, [r.h_value for r in ordered], "-", color="tab:blue", label="refined bound")
    ax.plot(
        deltas,
        [r.kl_finite for r in ordered],
        "x",
        color="tab:red",
        markersize=4,
        label="family divergence",
    )
    ax.set_xlabel("error mismatch")
    ax.set_ylabel("divergence")
    ax.legend(fontsize=8)
    return _save(fig, path)


def render_chain(reports: Sequence[ChainReport], path: str) -> str:
    """Five chained quantities per task, tasks ordered by the joint divergence."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    order = sorted(range(len(reports)), key=lambda i: reports[i].kl_joint, reverse=True)
    names = ("kl_joint", "kl_conditional", "kl_marginal_avg", "h_avg", "h_of_mean")
    for level, name in enumerate(names):
        series = [reports[i].chain()[level] for i in order]
        ys = [v if math.isfinite(v) else math.nan for v in series]
        ax.plot(range(len(ys)), ys, "-", linewidth=1.0, label=name)
    ax.set_xlabel("task (sorted by joint divergence)")
    ax.set_ylabel("divergence")
    ax.legend(fontsize=8)
    return _save(fig, path)


def render_ppl(rows: Sequence[PplDemoRow], path: str) -> str:
    """Log-perplexity cloud against its linear lower bound in the Hamming error."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    finite = [r for r in rows if math.isfinite(r.log_ppl)]
    ax.scatter(
        [r.hamming_error for r in finite],
        [r.log_ppl for r in finite],
        s=12,
        alpha=0.7,
        linewidths=0,
        color="tab:blue",
        label="models",
    )
    ordered = sorted(rows, key=lambda r: r.hamming_error)
    ax.plot(
        [r.hamming_error for r in ordered],
        [r.bound_rhs for r in ordered],
        "--",
        color="tab:orange",
        label="lower bound",
    )
    ax.set_xlabel("expected Hamming error")
    ax.set_ylabel("log perplexity")
    ax.legend(fontsize=8)
    return _save(fig, path)
