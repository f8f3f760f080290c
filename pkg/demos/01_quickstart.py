"""Smallest end-to-end run: synthesize data, answer queries, read the ledger.

Usage: python3 demos/01_quickstart.py
"""

import numpy as np

from dpknn import (
    DpParams,
    EngineConfig,
    KernelSpec,
    NoiseSource,
    answer_stream,
    generate_synthetic,
    rdp_to_dp,
)

T = 100  # queries we plan to answer

data = generate_synthetic(num_classes=3, size=3000, dim=16, num_queries=T, seed=7)

config = EngineConfig(
    kernel=KernelSpec("cosine"),
    weight_threshold=0.85,
    sigma_vote=0.9,
    planned_queries=T,
    dp=DpParams(epsilon=1.0, delta=1e-5),  # converted to a per-example budget
)
store = data.store(config)

print(f"store: {store.features.shape[0]} examples, "
      f"per-example budget B = {config.per_example_budget:.5f}")
print(f"one count release costs {config.count_charge:.6f} "
      f"(sigma_count defaulted to {config.sigma_count:.3f})")

outcomes = answer_stream(store, data.query_features, NoiseSource(0))

answers = np.array([o.answer for o in outcomes])
accuracy = float(np.mean(answers == data.query_labels))
remaining = store.private_remaining()
retired = float(np.mean(remaining < config.count_charge))

print(f"\nanswered {T} queries, accuracy {accuracy:.3f}")
print(f"median budget remaining {np.median(remaining):.5f} of {config.per_example_budget:.5f}")
print(f"{retired:.1%} of examples retired by the filter")
print(f"guarantee after any number of queries: "
      f"epsilon = {rdp_to_dp(config.per_example_budget, 1e-5):.3f} at delta = 1e-05")
