"""Seeded Gaussian noise and the two private releases built from it.

Draw order is part of the contract: for every query the engine draws exactly
one scalar (count noise) followed by one length-c vector (vote noise), in that
order, from a single NoiseSource.  Any independent reimplementation that
consumes the same raw standard-normal tape in the same order reproduces a run
bit for bit, which is what the replay and equivalence tests rely on.
"""

from __future__ import annotations

import math

import numpy as np


class NoiseSource:
    """Deterministic standard-normal stream over a counter-based PRNG.

    Seeded by an int or a numpy SeedSequence (for derived per-run streams).
    """

    def __init__(self, seed):
        self.seed = seed if isinstance(seed, np.random.SeedSequence) else int(seed)
        self._gen = np.random.Generator(np.random.Philox(self.seed))
        self.draws = 0  # number of scalar standard normals consumed so far

    def standard_normal(self, size: int | None = None):
        """Next scalar (size=None) or vector of raw N(0, 1) draws."""
        if size is None:
            self.draws += 1
            return float(self._gen.standard_normal())
        self.draws += int(size)
        return self._gen.standard_normal(size)


def noisy_count(true_count: float, sigma: float, floor: float, src: NoiseSource) -> float:
    """Release a count with Gaussian noise, clamped from below.

    The clamp guards the downstream vote-noise variance (sigma_vote^2 * count)
    and the contribution caps against tiny or negative counts.  The clamped
    value is what gets published and reused everywhere; it stays a real.
    """
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if floor < 1.0:
        raise ValueError(f"floor must be >= 1, got {floor}")
    return max(float(true_count) + sigma * src.standard_normal(), float(floor))


def noisy_argmax(votes: np.ndarray, variance: float, src: NoiseSource) -> int:
    """Argmax of votes + N(0, variance) per coordinate; ties to lowest index."""
    votes = np.asarray(votes, dtype=np.float64)
    if votes.ndim != 1 or votes.shape[0] == 0:
        raise ValueError(f"votes must be a nonempty 1-D vector, got shape {votes.shape}")
    if not variance > 0.0:
        raise ValueError(f"variance must be positive, got {variance}")
    noisy = votes + math.sqrt(variance) * src.standard_normal(votes.shape[0])
    return int(np.argmax(noisy))
