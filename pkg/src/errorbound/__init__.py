"""Divergence lower bounds for classification error mismatch.

The package computes Bayes and model-based classification errors for
discrete joint distributions, evaluates information-theoretic lower bounds
on the KL divergence as a function of the error mismatch (including a
refined bound valid when the Bayes error is capped below one half and its
linear approximation), certifies tightness with an explicit equality-
approaching family, stress-tests the claims by seeded Monte Carlo, and
extends everything to fixed-length class sequences under the averaged
Hamming loss, up to cross-entropy/perplexity consequences.

Most callers want :mod:`errorbound.distributions` for the probability
objects, :mod:`errorbound.bounds` for the curves, and the ``errorbound``
command line for file outputs.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundCurve,
    BoundThreshold,
    linear_bound,
    linear_intercept,
    refined_bound,
    sample_curve,
    unconstrained_bound,
)
from .decisions import (
    DecisionReport,
    bayes_decision,
    bayes_error,
    global_errors,
    mismatch,
    model_decision,
    model_error,
)
from .distributions import (
    JointDistribution,
    PosteriorModel,
    PriorDistribution,
    class_prior,
    cross_entropy,
    entropy,
    kl_divergence,
    observation_marginal,
    posterior,
    validate,
)
from .errors import (
    BadShapeError,
    DomainError,
    EmptySampleError,
    ErrorBoundError,
    LengthMismatchError,
    NegativeMassError,
    NotNormalizedError,
    SamplerExhaustedError,
    ShapeMismatchError,
    ZeroMassObservationError,
)
from .frontier import (
    build_family_point,
    family_kl_closed_form,
    family_mismatch_closed_form,
    lambda_grid,
    sweep_frontier,
)
from .sequences import (
    ChainReport,
    SequenceTask,
    hamming_loss,
    kl_chain,
    ppl_wer_demo,
    random_task,
    sequence_errors,
)
from .simulation import SamplerConfig, evaluate_pair, run_scatter, run_scatter_parallel

__all__ = [
    "__version__",
    "BoundCurve",
    "BoundThreshold",
    "linear_bound",
    "linear_intercept",
    "refined_bound",
    "sample_curve",
    "unconstrained_bound",
    "DecisionReport",
    "bayes_decision",
    "bayes_error",
    "global_errors",
    "mismatch",
    "model_decision",
    "model_error",
    "JointDistribution",
    "PosteriorModel",
    "PriorDistribution",
    "class_prior",
    "cross_entropy",
    "entropy",
    "kl_divergence",
    "observation_marginal",
    "posterior",
    "validate",
    "BadShapeError",
    "DomainError",
    "EmptySampleError",
    "ErrorBoundError",
    "LengthMismatchError",
    "NegativeMassError",
    "NotNormalizedError",
    "SamplerExhaustedError",
    "ShapeMismatchError",
    "ZeroMassObservationError",
    "build_family_point",
    "family_kl_closed_form",
    "family_mismatch_closed_form",
    "lambda_grid",
    "sweep_frontier",
    "ChainReport",
    "SequenceTask",
    "hamming_loss",
    "kl_chain",
    "ppl_wer_demo",
    "random_task",
    "sequence_errors",
    "SamplerConfig",
    "evaluate_pair",
    "run_scatter",
    "run_scatter_parallel",
]
