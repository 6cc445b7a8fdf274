"""Sequence classification under the averaged Hamming loss.

A sequence task couples a true distribution pr(s, x) over (class-sequence,
observation) pairs with a model q of the same shape, where s runs over all
``C**N`` length-N sequences in lexicographic order. Deciding each position
from its marginal distribution is optimal for the Hamming loss, so the
sequence-level Bayes and model errors are plain averages of N per-position
errors and every single-observation result applies position by position.

The module computes the five-quantity divergence chain

    kl_joint >= kl_conditional >= kl_marginal_avg >= h_avg >= h_of_mean

where the first drop conditions on the observation, the second applies the
log-sum inequality per position, the third applies the refined bound to each
position's mismatch, and the last uses convexity of that bound. Each link is
reported separately so a failure localizes the broken inequality.

On top of the chain sit two training-loss views: the cross-entropy bound
H(pr, q) >= log(2-2t)*E_q + const, and a perplexity/Hamming-error table for
families of sequence priors composed with the true observation law (for such
models the joint divergence collapses to the divergence between priors, so
log-perplexity obeys the same linear bound).

Everything enumerates the full sequence alphabet; the hard cap C**N <= 4096
keeps that honest brute force affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bounds import BoundThreshold, linear_intercept, refined_bound
from .decisions import global_errors
from .distributions import (
    JointDistribution,
    PosteriorModel,
    PriorDistribution,
    compose_prior,
    cross_entropy,
    entropy,
    kl_divergence,
    log_scale,
    posterior,
    validate,
)
from .errors import (
    BadShapeError,
    DomainError,
    EmptySampleError,
    LengthMismatchError,
    ShapeMismatchError,
    ZeroMassObservationError,
)
from .seeding import spawned_rng

__all__ = [
    "MAX_SEQUENCES",
    "LINK_TOL",
    "BOUND_TOL",
    "MODEL_FORMS",
    "SequenceTask",
    "SequenceErrorReport",
    "ChainReport",
    "CeBoundReport",
    "PplDemoRow",
    "index_to_sequence",
    "sequence_to_index",
    "hamming_loss",
    "position_table",
    "position_marginal",
    "expected_sequence_error",
    "expected_sequence_error_direct",
    "sequence_errors",
    "kl_chain",
    "empirical_joint",
    "ce_loss",
    "ce_error_bound_check",
    "with_sequence_prior",
    "ppl_wer_demo",
    "random_task",
    "write_task",
    "read_task",
    "CHAIN_HEADER",
    "DEMO_HEADER",
    "chain_csv_lines",
    "demo_csv_lines",
]

# Dense enumeration of C**N sequences is the whole point; cap it honestly.
MAX_SEQUENCES = 4096

LINK_TOL = 1e-10

BOUND_TOL = 1e-10

MODEL_FORMS = ("joint", "conditional", "matched", "prior")

# Per-position Bayes errors may exceed the threshold by float dust only.
_CAP_TOL = 1e-12

# Row-wise agreement required of a "prior composed with true observation law".
_COMPOSED_TOL = 1e-9


def index_to_sequence(index: int, length: int, num_classes: int) -> tuple[int, ...]:
    """Decode a lexicographic rank into a class sequence, first position most significant."""
    if length < 1 or num_classes < 2:
        raise DomainError(f"need length >= 1 and num_classes >= 2, got {length}, {num_classes}")
    if not 0 <= index < num_classes**length:
        raise DomainError(f"index {index} outside [0, {num_classes**length})")
    symbols = []
    rest = int(index)
    for _ in range(length):
        rest, symbol = divmod(rest, num_classes)
        symbols.append(symbol)
    return tuple(reversed(symbols))


def sequence_to_index(sequence: Sequence[int], num_classes: int) -> int:
    """Lexicographic rank of a class sequence; inverse of index_to_sequence."""
    if len(sequence) == 0:
        raise DomainError("empty sequence has no rank")
    rank = 0
    for symbol in sequence:
        s = int(symbol)
        if not 0 <= s < num_classes:
            raise DomainError(f"symbol {symbol} outside class alphabet of size {num_classes}")
        rank = rank * num_classes + s
    return rank


def hamming_loss(a: Sequence[int], b: Sequence[int]) -> float:
    """Fraction of positions where the two sequences disagree."""
    if len(a) != len(b):
        raise LengthMismatchError(f"sequence lengths differ: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise DomainError("empty sequences have no positions to compare")
    misses = sum(1 for x, y in zip(a, b) if int(x) != int(y))
    return misses / len(a)


def position_table(weights: np.ndarray, length: int, num_classes: int, position: int) -> np.ndarray:
    """Marginalize a (C**N, X) table onto one position, giving a (C, X) table.

    For length 1 the summation set is empty and the input values pass
    through untouched, which is what makes the single-observation modules a
    strict special case of this one.
    """
    if not 0 <= position < length:
        raise DomainError(f"position {position} outside [0, {length})")
    x_count = weights.shape[1]
    cube = weights.reshape((num_classes,) * length + (x_count,))
    others = tuple(axis for axis in range(length) if axis != position)
    return cube.sum(axis=others)


@dataclass(frozen=True, eq=False)
class SequenceTask:
    """A fixed-length sequence problem: true table, model table, error cap.

    ``true_joint`` has one row per length-``length`` class sequence in
    lexicographic order. ``model`` is either a joint table of the same shape
    or conditional columns q(s|x). Construction checks the enumeration cap
    and that every position's Bayes error respects the threshold, which is
    the hypothesis under which the refined bound applies per position.
    """

    length: int
    num_classes: int
    true_joint: JointDistribution
    model: JointDistribution | PosteriorModel
    threshold: BoundThreshold

    def __post_init__(self) -> None:
        if self.length < 1:
            raise DomainError(f"sequence length must be >= 1, got {self.length}")
        if self.num_classes < 2:
            raise DomainError(f"need at least 2 classes, got {self.num_classes}")
        if not isinstance(self.threshold, BoundThreshold):
            object.__setattr__(self, "threshold", BoundThreshold(float(self.threshold)))
        count = self.num_classes**self.length
        if count > MAX_SEQUENCES:
            raise DomainError(
                f"{self.num_classes}**{self.length} = {count} sequences exceeds the "
                f"enumeration cap {MAX_SEQUENCES}"
            )
        if self.true_joint.num_classes != count:
            raise ShapeMismatchError(
                f"true table has {self.true_joint.num_classes} rows, expected {count}"
            )
        model_shape = _model_table(self.model).shape
        if model_shape != self.true_joint.weights.shape:
            raise ShapeMismatchError(
                f"model shape {model_shape} != true shape {self.true_joint.weights.shape}"
            )
        cap = self.threshold.t
        for n in range(self.length):
            table = position_table(self.true_joint.weights, self.length, self.num_classes, n)
            position_bayes = 1.0 - float(table.max(axis=0).sum())
            if position_bayes > cap + _CAP_TOL:
                raise DomainError(
                    f"Bayes error {position_bayes} at position {n} exceeds threshold {cap}"
                )

    @property
    def num_sequences(self) -> int:
        return self.num_classes**self.length

    @property
    def x_count(self) -> int:
        return self.true_joint.num_observations


def _model_table(model: JointDistribution | PosteriorModel) -> np.ndarray:
    if isinstance(model, JointDistribution):
        return model.weights
    return model.columns


def _model_is_joint(model: JointDistribution | PosteriorModel) -> bool:
    return isinstance(model, JointDistribution)


def position_marginal(task: SequenceTask, x: int, position: int) -> np.ndarray:
    """True class distribution at one position given observation x (0-based position)."""
    table = position_table(task.true_joint.weights, task.length, task.num_classes, position)
    px = float(table[:, x].sum())
    if px <= 0.0:
        raise ZeroMassObservationError(f"observation {x} has zero mass")
    return table[:, x] / px


def expected_sequence_error(task: SequenceTask, x: int, sequence: Sequence[int]) -> float:
    """Expected Hamming loss of answering ``sequence`` at observation x.

    Uses the marginal form 1 - (1/N) sum_n pr_n(s_n | x); the direct
    enumeration over all sequences gives the same value and lives in
    expected_sequence_error_direct as an independent path.
    """
    if len(sequence) != task.length:
        raise LengthMismatchError(f"sequence length {len(sequence)} != task length {task.length}")
    terms = []
    for n, symbol in enumerate(sequence):
        s = int(symbol)
        if not 0 <= s < task.num_classes:
            raise DomainError(f"symbol {symbol} outside class alphabet")
        terms.append(float(position_marginal(task, x, n)[s]))
    return 1.0 - math.fsum(terms) / task.length


def expected_sequence_error_direct(task: SequenceTask, x: int, sequence: Sequence[int]) -> float:
    """Same quantity by brute force: sum over sequences of posterior times Hamming loss."""
    post = posterior(task.true_joint, x)
    terms = [
        float(post[i]) * hamming_loss(index_to_sequence(i, task.length, task.num_classes), sequence)
        for i in np.flatnonzero(post > 0.0)
    ]
    return math.fsum(terms)


@dataclass(frozen=True)
class SequenceErrorReport:
    """Sequence-level errors plus the per-position mismatches behind them."""

    bayes_error: float
    model_error: float
    per_position_delta: tuple[float, ...]
    mean_delta: float


def sequence_errors(task: SequenceTask) -> SequenceErrorReport:
    """Bayes and model errors of position-wise argmax decisions.

    Each position n is an ordinary decision problem on its marginal table;
    the sequence errors are the averages over positions, so the mismatch
    splits as mean_delta = mean of per-position deltas exactly.
    """
    model = _model_table(task.model)
    bayes_terms = []
    model_terms = []
    deltas = []
    for n in range(task.length):
        pr_n = position_table(task.true_joint.weights, task.length, task.num_classes, n)
        q_n = position_table(model, task.length, task.num_classes, n)
        bayes_n, model_n, delta_n = global_errors(pr_n, q_n)
        bayes_terms.append(bayes_n)
        model_terms.append(model_n)
        deltas.append(delta_n)
    return SequenceErrorReport(
        bayes_error=math.fsum(bayes_terms) / task.length,
        model_error=math.fsum(model_terms) / task.length,
        per_position_delta=tuple(deltas),
        mean_delta=math.fsum(deltas) / task.length,
    )


def _conditional_kl(
    pr_weights: np.ndarray, q_table: np.ndarray, q_is_joint: bool, scale: float
) -> float:
    """sum_x pr(x) KL(pr(.|x) || q(.|x)) in units of 1/scale nats.

    Joint model tables are conditioned column by column; zero-mass true
    observations are skipped; a q-column with no mass where pr has some
    yields +inf, like every divergence here.
    """
    px = pr_weights.sum(axis=0)
    contributions = []
    for x in np.flatnonzero(px > 0.0):
        p_col = pr_weights[:, x] / px[x]
        q_col = q_table[:, x]
        if q_is_joint:
            q_mass = float(q_col.sum())
            if q_mass <= 0.0:
                return math.inf
            q_col = q_col / q_mass
        support = p_col > 0.0
        ps = p_col[support]
        qs = q_col[support]
        if np.any(qs <= 0.0):
            return math.inf
        contributions.append(float(px[x]) * float(np.sum(ps * (np.log(ps) - np.log(qs)))))
    return math.fsum(contributions) / scale


@dataclass(frozen=True)
class ChainReport:
    """The five chained divergence quantities for one task.

    Mathematically kl_joint >= kl_conditional >= kl_marginal_avg >= h_avg
    >= h_of_mean; links() evaluates the four comparisons with a tolerance
    so a numerical report can localize any broken step. Infinities behave
    as expected: they appear leftmost first and satisfy their links.
    """

    kl_joint: float
    kl_conditional: float
    kl_marginal_avg: float
    h_avg: float
    h_of_mean: float
    per_position_delta: tuple[float, ...]
    mean_delta: float

    def chain(self) -> tuple[float, float, float, float, float]:
        return (
            self.kl_joint,
            self.kl_conditional,
            self.kl_marginal_avg,
            self.h_avg,
            self.h_of_mean,
        )

    def links(self, tol: float = LINK_TOL) -> tuple[bool, bool, bool, bool]:
        values = self.chain()
        return tuple(a >= b - tol for a, b in zip(values, values[1:]))


def kl_chain(task: SequenceTask, log_base: float = math.e) -> ChainReport:
    """Evaluate the divergence chain for one task by explicit summation.

    A conditional model is paired with the true observation marginal for
    the joint quantity, making the first link an equality up to rounding;
    a joint model with its own observation marginal pays an extra
    divergence there.
    """
    scale = log_scale(log_base)
    pr_w = task.true_joint.weights
    q_table = _model_table(task.model)
    q_is_joint = _model_is_joint(task.model)

    if q_is_joint:
        kl_joint = kl_divergence(pr_w, q_table, log_base)
    else:
        px = pr_w.sum(axis=0)
        kl_joint = kl_divergence(pr_w, q_table * px[None, :], log_base)
    kl_conditional = _conditional_kl(pr_w, q_table, q_is_joint, scale)

    marginal_terms = []
    deltas = []
    for n in range(task.length):
        pr_n = position_table(pr_w, task.length, task.num_classes, n)
        q_n = position_table(q_table, task.length, task.num_classes, n)
        marginal_terms.append(_conditional_kl(pr_n, q_n, q_is_joint, scale))
        deltas.append(global_errors(pr_n, q_n)[2])
    kl_marginal_avg = math.fsum(marginal_terms) / task.length
    mean_delta = math.fsum(deltas) / task.length
    h_avg = math.fsum(refined_bound(d, task.threshold, log_base) for d in deltas) / task.length
    h_of_mean = refined_bound(mean_delta, task.threshold, log_base)

    return ChainReport(
        kl_joint=kl_joint,
        kl_conditional=kl_conditional,
        kl_marginal_avg=kl_marginal_avg,
        h_avg=h_avg,
        h_of_mean=h_of_mean,
        per_position_delta=tuple(deltas),
        mean_delta=mean_delta,
    )


def empirical_joint(
    samples: Sequence[tuple[Sequence[int], int]], length: int, num_classes: int, x_count: int
) -> JointDistribution:
    """Empirical distribution count/M of (sequence, observation) samples."""
    if len(samples) == 0:
        raise EmptySampleError("cannot build an empirical distribution from no samples")
    count = num_classes**length
    if count > MAX_SEQUENCES:
        raise DomainError(f"{count} sequences exceeds the enumeration cap {MAX_SEQUENCES}")
    table = np.zeros((count, x_count))
    for sequence, x in samples:
        if len(sequence) != length:
            raise LengthMismatchError(f"sample sequence length {len(sequence)} != {length}")
        xi = int(x)
        if not 0 <= xi < x_count:
            raise DomainError(f"observation {x} outside [0, {x_count})")
        table[sequence_to_index(sequence, num_classes), xi] += 1.0
    return validate(table / len(samples))


def ce_loss(
    samples: Sequence[tuple[Sequence[int], int]],
    q: JointDistribution,
    length: int,
    num_classes: int,
    log_base: float = math.e,
) -> float:
    """Average negative log model mass of the samples; +inf on any unsupported sample.

    This is the standard cross-entropy training objective; it equals
    cross_entropy(empirical_joint(samples, ...), q) identically.
    """
    if len(samples) == 0:
        raise EmptySampleError("cross-entropy loss needs at least one sample")
    scale = log_scale(log_base)
    logs = []
    for sequence, x in samples:
        if len(sequence) != length:
            raise LengthMismatchError(f"sample sequence length {len(sequence)} != {length}")
        xi = int(x)
        if not 0 <= xi < q.num_observations:
            raise DomainError(f"observation {x} outside [0, {q.num_observations})")
        mass = float(q.weights[sequence_to_index(sequence, num_classes), xi])
        if mass <= 0.0:
            return math.inf
        logs.append(math.log(mass))
    return -math.fsum(logs) / (len(samples) * scale)


@dataclass(frozen=True)
class CeBoundReport:
    """Cross-entropy against its linear lower bound in the model error."""

    lhs: float
    rhs: float
    holds: bool


def ce_error_bound_check(task: SequenceTask, log_base: float = math.e) -> CeBoundReport:
    """Check H(pr, q) >= log(2-2t) * E_q + const on one task.

    The constant beta(t) - log(2-2t) * E_* + H(pr) is computed exactly from
    the task, so the check is the divergence chain restated in terms of the
    training loss.
    """
    t = task.threshold.t
    if t <= 0.0:
        raise DomainError("the linear cross-entropy bound needs t > 0")
    scale = log_scale(log_base)
    pr_w = task.true_joint.weights
    q_table = _model_table(task.model)
    if not _model_is_joint(task.model):
        q_table = q_table * pr_w.sum(axis=0)[None, :]
    lhs = cross_entropy(pr_w, q_table, log_base)
    errs = sequence_errors(task)
    slope = math.log(2.0 - 2.0 * t) / scale
    rhs = (
        slope * errs.model_error
        + linear_intercept(t, log_base)
        - slope * errs.bayes_error
        + entropy(pr_w, log_base)
    )
    return CeBoundReport(lhs=lhs, rhs=rhs, holds=lhs >= rhs - BOUND_TOL)


def with_sequence_prior(true_joint: JointDistribution, prior) -> JointDistribution:
    """Compose a sequence prior with the true observation law pr(x|s).

    The result q'(s, x) = q'(s) * pr(x|s) keeps the observation model
    perfect, so its joint divergence from the truth collapses to the
    divergence between the two priors.
    """
    mass = prior.mass if isinstance(prior, PriorDistribution) else PriorDistribution(prior).mass
    if mass.shape[0] != true_joint.num_classes:
        raise ShapeMismatchError(
            f"prior has {mass.shape[0]} entries, table has {true_joint.num_classes} rows"
        )
    return validate(compose_prior(true_joint.weights, mass))


@dataclass(frozen=True)
class PplDemoRow:
    """One model's perplexity, Hamming error, and linear-bound comparison."""

    model_id: str
    log_ppl: float
    log_ppl_per_token: float
    hamming_error: float
    bound_rhs: float
    holds: bool


def ppl_wer_demo(
    tasks: Sequence[SequenceTask],
    log_base: float = math.e,
    ids: Sequence[str] | None = None,
) -> list[PplDemoRow]:
    """Tabulate log-perplexity against the Hamming-error lower bound.

    All tasks must share the true distribution and threshold, and every
    model must be a sequence prior composed with the true observation law
    (checked row-wise). Under that composition log-perplexity is the prior
    cross-entropy H(pr(s), q'(s)), and the chain gives the one-sided bound
    log_ppl >= log(2-2t) * E_q + beta(t) - log(2-2t) * E_* + H(pr(s)).
    Nothing monotone is claimed about the (log_ppl, error) cloud itself.
    """
    if len(tasks) == 0:
        raise EmptySampleError("demo needs at least one task")
    if ids is not None and len(ids) != len(tasks):
        raise LengthMismatchError(f"{len(ids)} ids for {len(tasks)} tasks")
    first = tasks[0]
    t = first.threshold.t
    if t <= 0.0:
        raise DomainError("the perplexity bound needs t > 0")
    pr_w = first.true_joint.weights
    prior_true = pr_w.sum(axis=1)
    scale = log_scale(log_base)
    slope = math.log(2.0 - 2.0 * t) / scale
    intercept = linear_intercept(t, log_base)
    prior_entropy = entropy(prior_true, log_base)

    rows = []
    for i, task in enumerate(tasks):
        if task.true_joint.weights.shape != pr_w.shape or not np.array_equal(
            task.true_joint.weights, pr_w
        ):
            raise DomainError("demo tasks must share one true distribution")
        if task.threshold.t != t:
            raise DomainError("demo tasks must share one threshold")
        if not _model_is_joint(task.model):
            raise DomainError("demo models must be priors composed with the observation law")
        q_w = task.model.weights
        prior_model = q_w.sum(axis=1)
        live = prior_model > 0.0
        if np.any(live & (prior_true <= 0.0)):
            raise DomainError("model prior uses a sequence the true distribution never emits")
        rows_live = np.flatnonzero(live)
        cond_model = q_w[rows_live] / prior_model[rows_live, None]
        cond_true = pr_w[rows_live] / prior_true[rows_live, None]
        if not np.allclose(cond_model, cond_true, rtol=0.0, atol=_COMPOSED_TOL):
            raise DomainError("model is not a prior composed with the true observation law")

        errs = sequence_errors(task)
        log_ppl = cross_entropy(prior_true, prior_model, log_base)
        rhs = slope * errs.model_error + intercept - slope * errs.bayes_error + prior_entropy
        rows.append(
            PplDemoRow(
                model_id=ids[i] if ids is not None else f"model_{i}",
                log_ppl=log_ppl,
                log_ppl_per_token=log_ppl / task.length,
                hamming_error=errs.model_error,
                bound_rhs=rhs,
                holds=log_ppl >= rhs - BOUND_TOL,
            )
        )
    return rows


def random_task(
    seed: int,
    index: int,
    length: int,
    num_classes: int,
    x_count: int,
    threshold: BoundThreshold | float,
    model_form: str = "joint",
) -> SequenceTask:
    """Draw a random task whose every position respects the threshold.

    Each observation column concentrates 1 - u of its conditional mass on
    one dominant sequence with u drawn below t, so every position marginal
    has a majority class and per-position Bayes errors stay below t by
    construction. model_form picks the model: an unconstrained random
    "joint" table, random "conditional" columns, the true table itself
    ("matched"), or a random sequence "prior" composed with the true
    observation law.
    """
    if model_form not in MODEL_FORMS:
        raise DomainError(f"model form must be one of {MODEL_FORMS}, got {model_form!r}")
    thr = threshold if isinstance(threshold, BoundThreshold) else BoundThreshold(float(threshold))
    if length < 1 or num_classes < 2 or x_count < 1:
        raise DomainError("need length >= 1, num_classes >= 2, x_count >= 1")
    count = num_classes**length
    if count > MAX_SEQUENCES:
        raise DomainError(f"{count} sequences exceeds the enumeration cap {MAX_SEQUENCES}")

    rng = spawned_rng(seed, index)
    px = rng.dirichlet(np.ones(x_count))
    dominants = rng.integers(0, count, size=x_count)
    off_mass = rng.uniform(0.0, thr.t, size=x_count)
    table = np.zeros((count, x_count))
    for x in range(x_count):
        column = np.zeros(count)
        others = np.delete(np.arange(count), dominants[x])
        column[others] = off_mass[x] * rng.dirichlet(np.ones(count - 1))
        column[dominants[x]] = 1.0 - off_mass[x]
        table[:, x] = column * px[x]
    true_joint = validate(table)

    if model_form == "matched":
        model: JointDistribution | PosteriorModel = true_joint
    elif model_form == "joint":
        model = validate(rng.dirichlet(np.ones(count * x_count)).reshape(count, x_count))
    elif model_form == "conditional":
        model = PosteriorModel(rng.dirichlet(np.ones(count), size=x_count).T)
    else:
        used = np.flatnonzero(true_joint.weights.sum(axis=1) > 0.0)
        prior = np.zeros(count)
        prior[used] = rng.dirichlet(np.ones(used.size))
        model = with_sequence_prior(true_joint, prior)

    return SequenceTask(
        length=length,
        num_classes=num_classes,
        true_joint=true_joint,
        model=model,
        threshold=thr,
    )


def write_task(task: SequenceTask) -> str:
    """Serialize a task: "N C X t" header, true table, then the model table.

    Rows follow lexicographic sequence order; values round-trip exactly.
    A conditional model is written as its columns; readers tell the forms
    apart by total mass (a joint table sums to 1, conditional columns sum
    to 1 each). Prior-composed models serialize as the composed table.
    """
    lines = [f"{task.length} {task.num_classes} {task.x_count} {task.threshold.t!r}"]
    for row in task.true_joint.weights:
        lines.append(" ".join(repr(float(v)) for v in row))
    for row in _model_table(task.model):
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def read_task(text: str) -> SequenceTask:
    """Parse write_task output, or the "PRIOR" + vector form for the model.

    The cap C**N <= 4096 is checked straight after the header, before any
    table memory is touched.
    """
    lines = [line for line in text.splitlines() if line.strip() and not line.startswith("#")]
    if not lines:
        raise BadShapeError("empty task text")
    header = lines[0].split()
    if len(header) != 4:
        raise BadShapeError(f"header must be 'N C X t', got {lines[0]!r}")
    try:
        length, num_classes, x_count = (int(v) for v in header[:3])
        t = float(header[3])
    except ValueError as exc:
        raise BadShapeError(f"bad header {lines[0]!r}: {exc}") from exc
    if length < 1 or num_classes < 2 or x_count < 1:
        raise BadShapeError(f"bad dimensions in header {lines[0]!r}")
    count = num_classes**length
    if count > MAX_SEQUENCES:
        raise DomainError(f"{count} sequences exceeds the enumeration cap {MAX_SEQUENCES}")

    def parse_block(rows: list[str], what: str) -> np.ndarray:
        if len(rows) != count:
            raise BadShapeError(f"{what} needs {count} rows, got {len(rows)}")
        try:
            table = np.array([[float(v) for v in row.split()] for row in rows])
        except ValueError as exc:
            raise BadShapeError(f"unparseable {what} row: {exc}") from exc
        if table.ndim != 2 or table.shape[1] != x_count:
            raise BadShapeError(f"{what} rows must have {x_count} entries")
        return table

    body = lines[1:]
    true_joint = validate(parse_block(body[:count], "true table"))
    tail = body[count:]
    if tail and tail[0].strip().upper() == "PRIOR":
        if len(tail) != 2:
            raise BadShapeError("PRIOR form needs exactly one vector line")
        try:
            prior = np.array([float(v) for v in tail[1].split()])
        except ValueError as exc:
            raise BadShapeError(f"unparseable prior vector: {exc}") from exc
        if prior.shape[0] != count:
            raise BadShapeError(f"prior vector needs {count} entries, got {prior.shape[0]}")
        model: JointDistribution | PosteriorModel = with_sequence_prior(true_joint, prior)
    else:
        table = parse_block(tail, "model table")
        total = float(table.sum())
        if abs(total - 1.0) <= abs(total - x_count) or x_count == 1:
            model = validate(table)
        else:
            model = PosteriorModel(table)
    return SequenceTask(
        length=length,
        num_classes=num_classes,
        true_joint=true_joint,
        model=model,
        threshold=BoundThreshold(t),
    )


CHAIN_HEADER = (
    "task,kl_joint,kl_conditional,kl_marginal_avg,h_avg,h_of_mean,mean_delta,"
    "link1,link2,link3,link4"
)

DEMO_HEADER = "model_id,log_ppl,log_ppl_per_token,hamming_error,bound_rhs,holds"


def chain_csv_lines(reports: Iterable[ChainReport], ids: Sequence[str] | None = None) -> list[str]:
    """CSV rows matching CHAIN_HEADER; links render as lowercase booleans."""
    lines = [CHAIN_HEADER]
    for i, report in enumerate(reports):
        label = ids[i] if ids is not None else str(i)
        values = [*report.chain(), report.mean_delta]
        flags = report.links()
        lines.append(
            label
            + ","
            + ",".join(repr(v) for v in values)
            + ","
            + ",".join("true" if f else "false" for f in flags)
        )
    return lines


def demo_csv_lines(rows: Iterable[PplDemoRow]) -> list[str]:
    """CSV rows matching DEMO_HEADER."""
    lines = [DEMO_HEADER]
    for row in rows:
        lines.append(
            f"{row.model_id},{row.log_ppl!r},{row.log_ppl_per_token!r},"
            f"{row.hamming_error!r},{row.bound_rhs!r},{'true' if row.holds else 'false'}"
        )
    return lines
