"""Deterministic per-draw random generator construction.

Every stochastic routine in the package derives its generator from a
``(seed, draw_index)`` pair through ``SeedSequence`` spawn keys, so draw k of
a run is the same no matter how the indices are batched across workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RNG_ALGORITHM", "spawned_rng"]

RNG_ALGORITHM = (
    "numpy PCG64 via SeedSequence(entropy=seed, spawn_key=(draw_index,)), "
    f"numpy {np.__version__}"
)


def spawned_rng(seed: int, draw_index: int) -> np.random.Generator:
    """Generator for one draw, independent of every other draw's stream."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(draw_index,))
    return np.random.Generator(np.random.PCG64(sequence))
