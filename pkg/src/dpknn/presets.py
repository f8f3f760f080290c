"""Tuned (sigma_vote, weight_threshold) presets per dataset, kernel, and epsilon.

These reproduce the published best settings for the four embedding benchmarks
at delta = 1e-5 with T = 1000 planned queries and the default count-noise and
floor settings.  ``hash`` rows are for the sign-random-projection variant with
30 tables; text features use 9 bits per table, image features 8.
"""

from __future__ import annotations

DEFAULT_TABLES = 30
DEFAULT_BITS = {"image": 8, "text": 9}

# dataset -> kind -> epsilon -> {"sigma_vote": ..., "weight_threshold": ...}
PRESETS: dict[str, dict[str, dict[float, dict[str, float]]]] = {
    "cifar10": {
        "cosine": {
            0.5: {"sigma_vote": 0.7, "weight_threshold": 0.12},
            1.0: {"sigma_vote": 0.4, "weight_threshold": 0.12},
            1.5: {"sigma_vote": 0.4, "weight_threshold": 0.12},
            2.0: {"sigma_vote": 0.4, "weight_threshold": 0.12},
        },
        "rbf": {
            0.5: {"sigma_vote": 0.6, "weight_threshold": 0.8},
            1.0: {"sigma_vote": 0.5, "weight_threshold": 0.25},
            1.5: {"sigma_vote": 0.4, "weight_threshold": 0.26},
            2.0: {"sigma_vote": 0.2, "weight_threshold": 0.28},
        },
        "hash": {
            0.5: {"sigma_vote": 0.6, "weight_threshold": 0.25, "bits": 8},
            1.0: {"sigma_vote": 0.4, "weight_threshold": 0.50, "bits": 8},
            1.5: {"sigma_vote": 0.3, "weight_threshold": 0.52, "bits": 8},
            2.0: {"sigma_vote": 0.2, "weight_threshold": 0.53, "bits": 8},
        },
    },
    "fmnist": {
        "cosine": {
            0.5: {"sigma_vote": 1.3, "weight_threshold": 0.6},
            1.0: {"sigma_vote": 0.6, "weight_threshold": 0.6},
            1.5: {"sigma_vote": 0.3, "weight_threshold": 0.6},
            2.0: {"sigma_vote": 0.3, "weight_threshold": 0.6},
        },
        "rbf": {
            0.5: {"sigma_vote": 1.3, "weight_threshold": 0.83},
            1.0: {"sigma_vote": 0.7, "weight_threshold": 0.82},
            1.5: {"sigma_vote": 0.4, "weight_threshold": 0.84},
            2.0: {"sigma_vote": 0.3, "weight_threshold": 0.84},
        },
    },
    "agnews": {
        "cosine": {
            0.5: {"sigma_vote": 0.6, "weight_threshold": 0.35},
            1.0: {"sigma_vote": 0.4, "weight_threshold": 0.36},
            1.5: {"sigma_vote": 0.25, "weight_threshold": 0.37},
            2.0: {"sigma_vote": 0.2, "weight_threshold": 0.38},
        },
        "hash": {
            0.5: {"sigma_vote": 0.7, "weight_threshold": 0.35, "bits": 9},
            1.0: {"sigma_vote": 0.4, "weight_threshold": 0.36, "bits": 9},
            1.5: {"sigma_vote": 0.25, "weight_threshold": 0.36, "bits": 9},
            2.0: {"sigma_vote": 0.2, "weight_threshold": 0.36, "bits": 9},
        },
    },
    "dbpedia": {
        "cosine": {
            0.5: {"sigma_vote": 0.45, "weight_threshold": 0.35},
            1.0: {"sigma_vote": 0.3, "weight_threshold": 0.37},
            1.5: {"sigma_vote": 0.2, "weight_threshold": 0.37},
            2.0: {"sigma_vote": 0.1, "weight_threshold": 0.38},
        },
    },
}


def get_preset(dataset: str, kind: str, epsilon: float) -> dict[str, float]:
    """Look up one preset; raises KeyError naming what is missing."""
    try:
        return dict(PRESETS[dataset][kind][epsilon])
    except KeyError:
        raise KeyError(
            f"no preset for dataset={dataset!r}, kind={kind!r}, epsilon={epsilon}"
        ) from None
