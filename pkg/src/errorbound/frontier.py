"""Equality-achieving distribution family for the refined KL bound.

For every threshold t and lambda in [0.5, 1 - t] the family provides a
three-class, two-observation true distribution with Bayes error exactly t,
and a class prior whose induced model realizes mismatch
delta = t (2 lambda - 1) / (1 - lambda) while its prior KL equals the
refined bound at that mismatch in the epsilon -> 0 limit. The prior's
epsilon > 0 merely breaks the decision tie at the second observation; the
KL gap it opens is O(delta * epsilon).

Useful algebra, used by the closed forms below: delta + 2t = t / (1 - lambda)
and delta / (delta + 2t) = 2 lambda - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bounds import refined_bound
from .distributions import (
    JointDistribution,
    PriorDistribution,
    class_prior,
    kl_divergence,
    log_scale,
    validate,
)
from .errors import DomainError

__all__ = [
    "PriorFamilyPoint",
    "build_family_point",
    "family_mismatch_closed_form",
    "family_kl_closed_form",
    "model_joint",
    "lambda_grid",
    "sweep_frontier",
    "SweepRow",
    "SWEEP_HEADER",
    "sweep_csv_lines",
]


def _check_t_lambda(t: float, lam: float) -> None:
    if not (math.isfinite(t) and 0.0 < t < 0.5):
        raise DomainError(f"threshold must satisfy 0 < t < 0.5, got {t}")
    if not (math.isfinite(lam) and 0.5 <= lam <= 1.0 - t):
        raise DomainError(f"lambda must lie in [0.5, {1.0 - t}], got {lam}")


@dataclass(frozen=True)
class PriorFamilyPoint:
    """One family member: the true table and the near-tight class prior."""

    t: float
    lam: float
    epsilon: float
    pr: JointDistribution
    q_prior: PriorDistribution


def build_family_point(t: float, lam: float, epsilon: float) -> PriorFamilyPoint:
    """Construct the family member at (t, lambda, epsilon).

    True table: pr(c1,x1) = 1 - t/(1-lambda), pr(c2,x2) = t lambda/(1-lambda),
    pr(c3,x2) = t, all other cells zero. Prior: the same head mass on c1 and
    the remaining t/(1-lambda) split (0.5-epsilon, 0.5+epsilon) over c2, c3.
    """
    _check_t_lambda(t, lam)
    if not (math.isfinite(epsilon) and 0.0 < epsilon <= 0.5):
        raise DomainError(f"epsilon must lie in (0, 0.5], got {epsilon}")
    tail = t / (1.0 - lam)
    head = 1.0 - tail
    if head < 0.0:
        # lambda = 1 - t can leave -1 ulp of dust after the division.
        head = 0.0
    table = [[head, 0.0], [0.0, tail * lam], [0.0, t]]
    prior = np.array([head, tail * (0.5 - epsilon), tail * (0.5 + epsilon)])
    return PriorFamilyPoint(
        t=float(t),
        lam=float(lam),
        epsilon=float(epsilon),
        pr=validate(table),
        q_prior=PriorDistribution(prior),
    )


def family_mismatch_closed_form(t: float, lam: float) -> float:
    """Mismatch of the family member in the exact-tie limit."""
    _check_t_lambda(t, lam)
    return t * (2.0 * lam - 1.0) / (1.0 - lam)


def family_kl_closed_form(t: float, lam: float, log_base: float = math.e) -> float:
    """Prior KL of the family member as epsilon -> 0.

    Equals the refined bound at the family's own mismatch, which is what
    certifies the bound cannot be improved on delta in [0, 1 - 2t).
    """
    _check_t_lambda(t, lam)
    nats = (t * lam / (1.0 - lam)) * math.log(2.0 * lam) + t * math.log(2.0 * (1.0 - lam))
    return nats / log_scale(log_base)


def model_joint(point: PriorFamilyPoint) -> JointDistribution:
    """The family prior composed with the family's class-conditional observation law.

    Class c1 always emits x1; classes c2 and c3 always emit x2, so the induced
    joint places the prior mass directly on those cells.
    """
    q = point.q_prior.mass
    table = np.zeros((3, 2))
    table[0, 0] = q[0]
    table[1, 1] = q[1]
    table[2, 1] = q[2]
    return JointDistribution(table)


def lambda_grid(t: float, steps: int) -> np.ndarray:
    """Equispaced lambda values spanning the full family range [0.5, 1 - t]."""
    if steps < 1:
        raise DomainError(f"need at least 1 grid step, got {steps}")
    if not (math.isfinite(t) and 0.0 < t < 0.5):
        raise DomainError(f"threshold must satisfy 0 < t < 0.5, got {t}")
    return np.linspace(0.5, 1.0 - t, steps)


@dataclass(frozen=True)
class SweepRow:
    """One lambda sample: measured KL against both closed forms and the bound."""

    lam: float
    t: float
    epsilon: float
    delta: float
    kl_finite: float
    kl_closed: float
    h_value: float
    gap: float


def sweep_frontier(
    t: float,
    lambdas: Sequence[float] | np.ndarray,
    epsilon: float,
    log_base: float = math.e,
) -> list[SweepRow]:
    """Evaluate the family across a lambda grid at one finite epsilon.

    ``kl_finite`` is measured with the generic divergence on the actual prior
    vectors, independently of the closed forms, so the gap column is a live
    cross-check rather than algebra restated.
    """
    rows = []
    for lam in lambdas:
        point = build_family_point(t, float(lam), epsilon)
        delta = family_mismatch_closed_form(t, float(lam))
        kl_closed = family_kl_closed_form(t, float(lam), log_base)
        h_value = refined_bound(delta, t, log_base)
        kl_finite = kl_divergence(class_prior(point.pr), point.q_prior, log_base)
        rows.append(
            SweepRow(
                lam=float(lam),
                t=float(t),
                epsilon=float(epsilon),
                delta=delta,
                kl_finite=kl_finite,
                kl_closed=kl_closed,
                h_value=h_value,
                gap=kl_finite - h_value,
            )
        )
    return rows


SWEEP_HEADER = "lambda,t,epsilon,delta,kl_finite,kl_closed,h,gap"


def sweep_csv_lines(rows: Iterable[SweepRow]) -> list[str]:
    lines = [SWEEP_HEADER]
    for row in rows:
        lines.append(
            f"{row.lam!r},{row.t!r},{row.epsilon!r},{row.delta!r},"
            f"{row.kl_finite!r},{row.kl_closed!r},{row.h_value!r},{row.gap!r}"
        )
    return lines
