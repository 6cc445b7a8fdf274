"""Closed-form lower bounds on KL divergence as a function of decision mismatch.

Three curves, each mapping a mismatch delta = E_q - E* to the least KL
divergence any model with that mismatch can have:

* ``unconstrained_bound`` assumes nothing about the true distribution.
* ``refined_bound`` additionally assumes the Bayes error is at most t < 0.5,
  which pushes the curve up wherever delta < 1 - 2t.
* ``linear_bound`` is the tangent of the refined curve at delta = 1 - 2t;
  being a tangent of a convex function it is a valid one-sided bound for
  every delta, and it is tight for small t.

All values are computed in nats and scaled to the requested log base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .distributions import log_scale
from .errors import DomainError

__all__ = [
    "BoundThreshold",
    "BoundCurve",
    "CURVE_KINDS",
    "unconstrained_bound",
    "refined_bound",
    "linear_bound",
    "linear_intercept",
    "sample_curve",
    "CURVE_HEADER",
    "curve_csv_lines",
    "format_log_base",
]

# Measured mismatches may overshoot [0, 1] by accumulated float error.
DELTA_DUST = 1e-9

CURVE_KINDS = ("unconstrained_g", "refined_h", "linear")


@dataclass(frozen=True)
class BoundThreshold:
    """Cap on the Bayes error; the refined bound only exists below one half."""

    t: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t) and 0.0 <= self.t < 0.5):
            raise DomainError(f"threshold must satisfy 0 <= t < 0.5, got {self.t}")


def _threshold_value(t: BoundThreshold | float) -> float:
    if isinstance(t, BoundThreshold):
        return t.t
    return BoundThreshold(float(t)).t


def _clamp_delta(delta: float) -> float:
    value = float(delta)
    if not math.isfinite(value):
        raise DomainError(f"mismatch must be finite, got {value}")
    if value < 0.0:
        if value < -DELTA_DUST:
            raise DomainError(f"mismatch {value} below 0 beyond float dust")
        return 0.0
    if value > 1.0:
        if value > 1.0 + DELTA_DUST:
            raise DomainError(f"mismatch {value} above 1 beyond float dust")
        return 1.0
    return value


def _xlogx(v: float) -> float:
    return 0.0 if v <= 0.0 else v * math.log(v)


def unconstrained_bound(delta: float, log_base: float = math.e) -> float:
    """Least KL divergence compatible with mismatch delta, no other assumption."""
    d = _clamp_delta(delta)
    nats = 0.5 * (_xlogx(1.0 + d) + _xlogx(1.0 - d))
    # The two terms cancel to O(d^2) near zero; clip the leftover dust.
    return max(0.0, nats) / log_scale(log_base)


def refined_bound(delta: float, t: BoundThreshold | float, log_base: float = math.e) -> float:
    """Least KL divergence under mismatch delta when the Bayes error is at most t.

    Piecewise: for delta < 1 - 2t the bound is the perspective form
    (delta + 2t) * unconstrained((delta) / (delta + 2t)); beyond that the
    unconstrained curve already cannot be improved. The degenerate corner
    delta = t = 0 is the continuous limit zero.
    """
    d = _clamp_delta(delta)
    cap = _threshold_value(t)
    if d >= 1.0 - 2.0 * cap:
        return unconstrained_bound(d, log_base)
    stretch = d + 2.0 * cap
    if stretch <= 0.0:
        return 0.0
    # Scale once after the perspective product so that a change of base is
    # a single exact division, the same contract the other bounds keep.
    nats = stretch * unconstrained_bound(d / stretch)
    return nats / log_scale(log_base)


def linear_intercept(t: BoundThreshold | float, log_base: float = math.e) -> float:
    """Intercept of the linear approximation; negative for every valid t."""
    cap = _threshold_value(t)
    if cap <= 0.0:
        raise DomainError("linear approximation needs t > 0, its intercept contains log t")
    nats = cap * (math.log1p(-cap) + math.log(cap) + 2.0 * math.log(2.0))
    return nats / log_scale(log_base)


def linear_bound(delta: float, t: BoundThreshold | float, log_base: float = math.e) -> float:
    """Tangent line log(2 - 2t) * delta + intercept; a valid lower bound everywhere."""
    d = _clamp_delta(delta)
    cap = _threshold_value(t)
    if cap <= 0.0:
        raise DomainError("linear approximation needs t > 0, its intercept contains log t")
    nats = math.log(2.0 - 2.0 * cap) * d + cap * (
        math.log1p(-cap) + math.log(cap) + 2.0 * math.log(2.0)
    )
    return nats / log_scale(log_base)


@dataclass(frozen=True)
class BoundCurve:
    """One bound evaluated on a uniform mismatch grid."""

    kind: str
    t: float
    log_base: float
    points: tuple[tuple[float, float], ...]


def sample_curve(
    kind: str,
    t: BoundThreshold | float,
    grid_size: int,
    log_base: float = math.e,
) -> BoundCurve:
    """Evaluate one curve kind on ``grid_size`` equispaced mismatches in [0, 1]."""
    if kind not in CURVE_KINDS:
        raise DomainError(f"unknown curve kind {kind!r}, expected one of {CURVE_KINDS}")
    if grid_size < 2:
        raise DomainError(f"grid needs at least 2 points, got {grid_size}")
    cap = _threshold_value(t)
    if kind == "unconstrained_g":
        evaluate = lambda d: unconstrained_bound(d, log_base)
    elif kind == "refined_h":
        evaluate = lambda d: refined_bound(d, cap, log_base)
    else:
        evaluate = lambda d: linear_bound(d, cap, log_base)
    grid = np.linspace(0.0, 1.0, grid_size)
    points = tuple((float(d), evaluate(float(d))) for d in grid)
    return BoundCurve(kind=kind, t=cap, log_base=float(log_base), points=points)


CURVE_HEADER = "delta,value,kind,t,log_base"


def format_log_base(log_base: float) -> str:
    return "e" if log_base == math.e else f"{log_base:.17g}"


def curve_csv_lines(curves: Iterable[BoundCurve]) -> list[str]:
    """Delimited rows for one or more curves, 17 significant digits per value."""
    lines = [CURVE_HEADER]
    for curve in curves:
        base = format_log_base(curve.log_base)
        for delta, value in curve.points:
            lines.append(f"{delta:.17g},{value:.17g},{curve.kind},{curve.t:.17g},{base}")
    return lines
