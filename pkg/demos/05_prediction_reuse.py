"""Answer recycling under a starvation budget.

With a very tight budget most examples retire early and late queries face an
emptied store.  Feeding each (query, answer) pair back in as a new public
example — public entries vote for free and never retire — keeps late
accuracy up, paid for by the privacy already spent on those answers rather
than by new budget.

Usage: python3 demos/05_prediction_reuse.py
"""

import numpy as np

from dpknn import (
    EngineConfig,
    KernelSpec,
    NoiseSource,
    answer_stream,
    generate_synthetic,
)

T = 200
data = generate_synthetic(num_classes=3, size=1500, dim=16, num_queries=T, seed=101)


def run(reuse: bool):
    config = EngineConfig(kernel=KernelSpec("cosine"), weight_threshold=0.85,
                          sigma_vote=0.9, planned_queries=T, budget=0.035,
                          reuse_predictions=reuse)
    store = data.store(config)
    outs = answer_stream(store, data.query_features, NoiseSource(31))
    answers = np.array([o.answer for o in outs])
    correct = answers == data.query_labels
    retired = float(np.mean(store.private_remaining() < config.count_charge))
    grown = store.features.shape[0] - 1500
    return correct, retired, grown


for reuse in (False, True):
    correct, retired, grown = run(reuse)
    early = correct[: T // 2].mean()
    late = correct[T // 2:].mean()
    print(f"reuse {'on ' if reuse else 'off'}: "
          f"accuracy {early:.2f} on queries 1-{T//2}, {late:.2f} on {T//2 + 1}-{T}  "
          f"({retired:.0%} retired, store grew by {grown})")

print("\nthe private examples burn out either way; recycled answers keep "
      "voting after they do.")
