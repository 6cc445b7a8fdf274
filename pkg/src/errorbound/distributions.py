"""Discrete joint, conditional, and prior distributions with entropy and KL metrics.

Probability tables are dense numpy arrays in linear space, classes along the
rows and observations along the columns. Construction validates and freezes
the data; afterwards every instance is immutable and every operation is pure,
so values can be shared freely across workers.

Conventions used throughout:

* ``0 * log 0`` is zero, so terms with no true mass never contribute.
* A divergence is ``+inf`` exactly when the second argument assigns zero
  mass somewhere the first has mass (absolute continuity fails).
* Logarithms default to base e; any base ``b > 0, b != 1`` scales every
  information quantity by ``1 / ln b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadShapeError,
    DomainError,
    NegativeMassError,
    NotNormalizedError,
    ShapeMismatchError,
    ZeroMassObservationError,
)

__all__ = [
    "NORM_TOL",
    "RENORM_LIMIT",
    "JointDistribution",
    "PosteriorModel",
    "PriorDistribution",
    "validate",
    "observation_marginal",
    "class_prior",
    "posterior",
    "joint_from_posterior",
    "compose_prior",
    "kl_divergence",
    "entropy",
    "cross_entropy",
    "log_scale",
    "to_text",
    "from_text",
]

# Mass must match one this closely once an object exists.
NORM_TOL = 1e-12
# Raw input mass further off than this is a construction bug, not float dust.
RENORM_LIMIT = 1e-9


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.setflags(write=False)
    return out


def _as_array(raw, ndim: int) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=float)
    except (ValueError, TypeError) as exc:
        raise BadShapeError(f"not a rectangular numeric array: {exc}") from exc
    if arr.ndim != ndim:
        raise BadShapeError(f"expected {ndim}-D data, got ndim={arr.ndim}")
    return arr


def _check_mass(arr: np.ndarray, tol: float, what: str) -> float:
    """Reject negatives and wildly wrong totals; return the total mass."""
    if np.any(arr < 0.0):
        raise NegativeMassError(f"{what} has negative entry {float(arr.min())}")
    total = float(arr.sum())
    if not math.isfinite(total) or abs(total - 1.0) > tol:
        raise NotNormalizedError(f"{what} has total mass {total}")
    return total


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Dense probability table over (class, observation) pairs."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_array(self.weights, 2)
        classes, observations = arr.shape
        if classes < 2:
            raise BadShapeError(f"need at least 2 classes, got {classes}")
        if observations < 1:
            raise BadShapeError("need at least 1 observation")
        _check_mass(arr, NORM_TOL, "joint table")
        object.__setattr__(self, "weights", _frozen(arr))

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def num_observations(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True, eq=False)
class PosteriorModel:
    """Per-observation conditional class distributions, one column per observation."""

    columns: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_array(self.columns, 2)
        if arr.shape[0] < 2:
            raise BadShapeError(f"need at least 2 classes, got {arr.shape[0]}")
        if arr.shape[1] < 1:
            raise BadShapeError("need at least 1 observation")
        if np.any(arr < 0.0):
            raise NegativeMassError(f"conditional has negative entry {float(arr.min())}")
        sums = arr.sum(axis=0)
        if np.any(~np.isfinite(sums)) or np.any(np.abs(sums - 1.0) > RENORM_LIMIT):
            raise NotNormalizedError(f"conditional columns sum to {sums.tolist()}")
        if np.any(np.abs(sums - 1.0) > NORM_TOL):
            arr = arr / sums
        object.__setattr__(self, "columns", _frozen(arr))

    @property
    def num_classes(self) -> int:
        return self.columns.shape[0]

    @property
    def num_observations(self) -> int:
        return self.columns.shape[1]


@dataclass(frozen=True, eq=False)
class PriorDistribution:
    """Probability vector over classes."""

    mass: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_array(self.mass, 1)
        if arr.shape[0] < 2:
            raise BadShapeError(f"need at least 2 classes, got {arr.shape[0]}")
        total = _check_mass(arr, RENORM_LIMIT, "prior")
        if abs(total - 1.0) > NORM_TOL:
            arr = arr / total
        object.__setattr__(self, "mass", _frozen(arr))

    @property
    def num_classes(self) -> int:
        return self.mass.shape[0]


def validate(raw_table) -> JointDistribution:
    """Check a raw table and wrap it as a joint distribution.

    Mass within ``RENORM_LIMIT`` of one is renormalized exactly; anything
    further off is rejected so construction bugs cannot hide behind a silent
    repair. Entries must be non-negative with no dust allowance.
    """
    arr = _as_array(raw_table, 2)
    if arr.shape[0] < 2:
        raise BadShapeError(f"need at least 2 classes, got {arr.shape[0]}")
    if arr.shape[1] < 1:
        raise BadShapeError("need at least 1 observation")
    total = _check_mass(arr, RENORM_LIMIT, "raw table")
    # Only repair what needs repair: tables already within the strict
    # tolerance pass through untouched, which makes validation idempotent
    # and text round trips bit-exact.
    if abs(total - 1.0) > NORM_TOL:
        arr = arr / total
    return JointDistribution(arr)


def observation_marginal(dist: JointDistribution) -> np.ndarray:
    """Column sums pr(x)."""
    return dist.weights.sum(axis=0)


def class_prior(dist: JointDistribution) -> PriorDistribution:
    """Row sums pr(c), wrapped as a prior."""
    return PriorDistribution(dist.weights.sum(axis=1))


def posterior(dist: JointDistribution, x: int) -> np.ndarray:
    """Conditional pr(c|x). The observation must carry mass."""
    column = dist.weights[:, x]
    px = float(column.sum())
    if px <= 0.0:
        raise ZeroMassObservationError(f"observation {x} has zero mass")
    return column / px


def joint_from_posterior(model: PosteriorModel, px) -> JointDistribution:
    """Compose conditional columns with an observation marginal: q(c,x) = q(c|x) px(x)."""
    marginal = _as_array(px, 1)
    if marginal.shape[0] != model.num_observations:
        raise ShapeMismatchError(
            f"marginal has {marginal.shape[0]} observations, model has {model.num_observations}"
        )
    total = _check_mass(marginal, RENORM_LIMIT, "observation marginal")
    return JointDistribution(model.columns * (marginal / total))


def compose_prior(joint_weights: np.ndarray, prior_mass: np.ndarray) -> np.ndarray:
    """Compose a class prior with the observation law of a joint table.

    Returns the table prior(c) * pr(x|c). Rows with zero prior mass stay
    zero; a positive prior on a class the joint never uses has no defined
    observation law and is rejected.
    """
    class_mass = joint_weights.sum(axis=1)
    needs = prior_mass > 0.0
    if np.any(needs & (class_mass <= 0.0)):
        raise DomainError("prior places mass on a class the joint distribution never uses")
    table = np.zeros_like(joint_weights)
    rows = np.flatnonzero(needs)
    table[rows] = prior_mass[rows, None] * (joint_weights[rows] / class_mass[rows, None])
    return table


def log_scale(log_base: float) -> float:
    """Divisor converting natural-log information values to the requested base."""
    base = float(log_base)
    if not math.isfinite(base) or base <= 0.0 or base == 1.0:
        raise DomainError(f"log base must be positive and != 1, got {log_base}")
    return 1.0 if base == math.e else math.log(base)


def _as_mass(dist) -> np.ndarray:
    if isinstance(dist, JointDistribution):
        return dist.weights
    if isinstance(dist, PriorDistribution):
        return dist.mass
    try:
        return np.asarray(dist, dtype=float)
    except (ValueError, TypeError) as exc:
        raise BadShapeError(f"not a probability array: {exc}") from exc


def kl_divergence(p, q, log_base: float = math.e) -> float:
    """Relative entropy sum(p log(p/q)); +inf when q misses part of p's support."""
    pm, qm = _as_mass(p), _as_mass(q)
    if pm.shape != qm.shape:
        raise ShapeMismatchError(f"shapes {pm.shape} and {qm.shape} differ")
    scale = log_scale(log_base)
    support = pm > 0.0
    ps = pm[support]
    qs = qm[support]
    if np.any(qs <= 0.0):
        return math.inf
    return float(np.sum(ps * (np.log(ps) - np.log(qs)))) / scale


def entropy(p, log_base: float = math.e) -> float:
    """Shannon entropy -sum(p log p)."""
    pm = _as_mass(p)
    scale = log_scale(log_base)
    ps = pm[pm > 0.0]
    return -float(np.sum(ps * np.log(ps))) / scale


def cross_entropy(p, q, log_base: float = math.e) -> float:
    """Cross entropy -sum(p log q); +inf when q misses part of p's support."""
    pm, qm = _as_mass(p), _as_mass(q)
    if pm.shape != qm.shape:
        raise ShapeMismatchError(f"shapes {pm.shape} and {qm.shape} differ")
    scale = log_scale(log_base)
    support = pm > 0.0
    ps = pm[support]
    qs = qm[support]
    if np.any(qs <= 0.0):
        return math.inf
    return -float(np.sum(ps * np.log(qs))) / scale


def to_text(dist: JointDistribution) -> str:
    """Serialize as a "C X" header plus one space-separated row per class.

    Values use the shortest decimal form that round-trips, so parsing the
    output reproduces the table bit for bit.
    """
    classes, observations = dist.weights.shape
    lines = [f"{classes} {observations}"]
    for row in dist.weights:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> JointDistribution:
    """Parse the format written by :func:`to_text`."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise BadShapeError("empty distribution text")
    header = lines[0].split()
    if len(header) != 2:
        raise BadShapeError(f"bad header {lines[0]!r}, expected 'C X'")
    try:
        classes, observations = int(header[0]), int(header[1])
    except ValueError as exc:
        raise BadShapeError(f"bad header {lines[0]!r}: {exc}") from exc
    if len(lines) != 1 + classes:
        raise BadShapeError(f"expected {classes} rows, got {len(lines) - 1}")
    table = []
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != observations:
            raise BadShapeError(f"expected {observations} columns, got {len(parts)}")
        try:
            table.append([float(v) for v in parts])
        except ValueError as exc:
            raise BadShapeError(f"bad probability value: {exc}") from exc
    return validate(table)
