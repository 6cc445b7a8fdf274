"""Bayes and model decision rules and their global error rates.

The Bayes rule picks argmax_c pr(c|x); a model rule picks argmax_c q(c|x).
Ties always break toward the lowest class index. Observations with
pr(x) = 0 contribute nothing to any global sum and are skipped, so the
decision there never needs to be defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import JointDistribution, PosteriorModel
from .errors import ShapeMismatchError, ZeroMassObservationError

__all__ = [
    "ObservationDecision",
    "DecisionReport",
    "bayes_decision",
    "model_decision",
    "bayes_error",
    "model_error",
    "mismatch",
    "global_errors",
    "REPORT_HEADER",
    "report_csv_lines",
]

# Float slack for identities that hold exactly in real arithmetic.
_CONSISTENCY_TOL = 1e-12


def _model_columns(q: JointDistribution | PosteriorModel) -> np.ndarray:
    """Score table whose per-column argmax is the model's decision."""
    if isinstance(q, PosteriorModel):
        return q.columns
    if isinstance(q, JointDistribution):
        return q.weights
    raise TypeError(f"expected JointDistribution or PosteriorModel, got {type(q).__name__}")


def _check_shapes(pr: JointDistribution, q_cols: np.ndarray) -> None:
    if pr.weights.shape != q_cols.shape:
        raise ShapeMismatchError(f"shapes {pr.weights.shape} and {q_cols.shape} differ")


def bayes_decision(pr: JointDistribution, x: int) -> int:
    """Most probable class under the true posterior at observation x."""
    column = pr.weights[:, x]
    if float(column.sum()) <= 0.0:
        raise ZeroMassObservationError(f"observation {x} has zero true mass")
    return int(np.argmax(column))


def model_decision(q: JointDistribution | PosteriorModel, x: int) -> int:
    """Most probable class under the model's conditional at observation x."""
    column = _model_columns(q)[:, x]
    if float(column.sum()) <= 0.0:
        raise ZeroMassObservationError(f"observation {x} has zero model mass")
    return int(np.argmax(column))


def global_errors(pr_weights: np.ndarray, decision_weights: np.ndarray) -> tuple[float, float, float]:
    """Vectorized kernel returning (bayes_error, model_error, mismatch).

    ``decision_weights`` is any score table whose column argmax realizes the
    model's decision rule: a joint table or conditional columns both work
    because the positive factor pr(x) or q(x) cannot move an argmax.
    """
    px = pr_weights.sum(axis=0)
    live = px > 0.0
    num_observations = pr_weights.shape[1]
    column_max = pr_weights.max(axis=0)
    live_cols = np.flatnonzero(live)
    if live_cols.size and np.any(decision_weights[:, live_cols].max(axis=0) <= 0.0):
        raise ZeroMassObservationError(
            "model column has zero mass at an observation the true distribution reaches"
        )
    picks = np.argmax(decision_weights, axis=0)
    chosen = np.zeros(num_observations)
    chosen[live_cols] = pr_weights[picks[live_cols], live_cols]
    bayes = 1.0 - float(column_max.sum())
    model = 1.0 - float(chosen.sum())
    gap = float((column_max - chosen).sum())
    return bayes, model, gap


def bayes_error(pr: JointDistribution) -> float:
    """Expected error of the true-posterior argmax rule."""
    return 1.0 - float(pr.weights.max(axis=0).sum())


def model_error(pr: JointDistribution, q: JointDistribution | PosteriorModel) -> float:
    """Expected error when deciding with q but scoring against pr."""
    q_cols = _model_columns(q)
    _check_shapes(pr, q_cols)
    return global_errors(pr.weights, q_cols)[1]


@dataclass(frozen=True)
class ObservationDecision:
    """Per-observation breakdown of one (true, model) decision comparison."""

    x: int
    bayes_class: int
    model_class: int
    px: float
    post_bayes: float
    post_model: float

    @property
    def contribution(self) -> float:
        """Weighted posterior gap this observation adds to the mismatch."""
        return self.px * (self.post_bayes - self.post_model)


@dataclass(frozen=True)
class DecisionReport:
    """Global error rates plus per-observation detail for one model."""

    bayes_error: float
    model_error: float
    mismatch: float
    per_observation: tuple[ObservationDecision, ...]

    def __post_init__(self) -> None:
        if self.mismatch < -_CONSISTENCY_TOL:
            raise ValueError(f"negative mismatch {self.mismatch}")
        if self.bayes_error > self.model_error + _CONSISTENCY_TOL:
            raise ValueError("bayes error exceeds model error")
        if abs(self.mismatch - (self.model_error - self.bayes_error)) > _CONSISTENCY_TOL:
            raise ValueError("mismatch inconsistent with error difference")


def mismatch(pr: JointDistribution, q: JointDistribution | PosteriorModel) -> DecisionReport:
    """Error mismatch of q against pr with one detail row per live observation."""
    q_cols = _model_columns(q)
    _check_shapes(pr, q_cols)
    bayes, model, gap = global_errors(pr.weights, q_cols)
    px = pr.weights.sum(axis=0)
    rows = []
    for x in np.flatnonzero(px > 0.0):
        bayes_class = int(np.argmax(pr.weights[:, x]))
        model_class = int(np.argmax(q_cols[:, x]))
        rows.append(
            ObservationDecision(
                x=int(x),
                bayes_class=bayes_class,
                model_class=model_class,
                px=float(px[x]),
                post_bayes=float(pr.weights[bayes_class, x] / px[x]),
                post_model=float(pr.weights[model_class, x] / px[x]),
            )
        )
    return DecisionReport(bayes, model, gap, tuple(rows))


REPORT_HEADER = "x,bayes_class,model_class,px,post_bayes,post_model"


def report_csv_lines(report: DecisionReport) -> list[str]:
    """Delimited rows for one report, one line per live observation."""
    lines = [REPORT_HEADER]
    for row in report.per_observation:
        lines.append(
            f"{row.x},{row.bayes_class},{row.model_class},"
            f"{row.px!r},{row.post_bayes!r},{row.post_model!r}"
        )
    return lines
