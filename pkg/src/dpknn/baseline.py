"""Naive private kNN: noisy plurality over the exact top-k, uniform accounting.

Every query perturbs a histogram whose L2 sensitivity to one example is
sqrt(2) (moving a vote between classes changes two coordinates by 1), so T
queries compose to a linear RDP curve with coefficient T * 2 / (2 sigma^2) —
for every stored example, whether or not it ever entered a top-k.  That
uniform, worst-case growth in T is exactly what the per-example ledger of the
main engine avoids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .accounting import rdp_to_dp
from .engine import ExampleStore
from .kernels import kernel_weights
from .mechanisms import NoiseSource

HISTOGRAM_SENSITIVITY_SQ = 2.0


@dataclass(frozen=True)
class NaiveKnnConfig:
    """Number of neighbors and the per-class vote noise scale."""

    k: int
    sigma: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def naive_knn_predict(store: ExampleStore, query, cfg: NaiveKnnConfig,
                      src: NoiseSource) -> int:
    """Noisy argmax over the one-hot labels of the exact k nearest examples.

    Nearness is by kernel weight (on unit-norm features this orders the same
    as distance); ties go to the lower index.
    """
    q = np.asarray(query, dtype=np.float64)
    live = np.flatnonzero(store.alive)
    if live.shape[0] < cfg.k:
        raise ValueError(f"store has {live.shape[0]} examples but k={cfg.k}")
    weights = kernel_weights(store.config.kernel, store.features[live], q)
    # Stable sort on descending weight keeps ties in ascending index order.
    top = live[np.argsort(-weights, kind="stable")[: cfg.k]]
    votes = np.bincount(store.labels[top], minlength=store.num_classes).astype(np.float64)
    noisy = votes + cfg.sigma * src.standard_normal(store.num_classes)
    return int(np.argmax(noisy))


def naive_knn_rdp_coefficient(num_queries: int, sigma: float) -> float:
    """Linear RDP coefficient after ``num_queries`` releases: T * 2 / (2 sigma^2)."""
    if num_queries < 0:
        raise ValueError(f"num_queries must be nonnegative, got {num_queries}")
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return num_queries * HISTOGRAM_SENSITIVITY_SQ / (2.0 * sigma * sigma)


def naive_knn_accounting(num_queries: int, sigma: float, delta: float) -> float:
    """Tight epsilon at delta for the whole T-query interaction."""
    return rdp_to_dp(naive_knn_rdp_coefficient(num_queries, sigma), delta)
