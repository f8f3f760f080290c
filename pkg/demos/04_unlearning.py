"""Deleting an example is local: nobody else's behavior changes.

Each example is charged only for queries it joins, and whether it joins
depends on its own weight and its own remaining budget — never on other
examples.  So removing one point mid-stream (a) stops it from influencing
anything afterwards, and (b) a full from-scratch replay without it makes
exactly the same selection decisions for everyone else.  No retraining,
no budget recomputation for the survivors.

Usage: python3 demos/04_unlearning.py
"""

import numpy as np

from dpknn import (
    EngineConfig,
    KernelSpec,
    NoiseSource,
    answer_query,
    answer_stream,
    generate_synthetic,
)

T = 40
data = generate_synthetic(num_classes=3, size=500, dim=16, num_queries=T, seed=19)
config = EngineConfig(kernel=KernelSpec("cosine"), weight_threshold=0.85,
                      sigma_vote=0.5, planned_queries=T, budget=50.0)

# ---- pass 1: full store, note who participates -------------------------------
store = data.store(config)
outs = answer_stream(store, data.query_features, NoiseSource(4))
participation = np.bincount(
    np.concatenate([o.selected for o in outs]), minlength=store.features.shape[0]
)
victim = int(np.argmax(participation))
print(f"example {victim} joined {participation[victim]} of {T} queries; deleting it")

# ---- pass 2: delete mid-stream ------------------------------------------------
half = T // 2
store2 = data.store(config)
src = NoiseSource(4)
seen_after = 0
for t in range(T):
    if t == half:
        store2.remove_example(victim)
    out = answer_query(store2, data.query_features[t], src)
    seen_after += t >= half and victim in out.selected
print(f"after removal at query {half}: selected {seen_after} more times "
      f"(budget frozen at z = {store2.ledger.z[victim]:.4f})")

# ---- pass 3: from-scratch replay without it, same noise tape ------------------
store3 = data.store(config)
store3.remove_example(victim)
outs3 = answer_stream(store3, data.query_features, NoiseSource(4))

unchanged = all(
    [i for i in a.selected if i != victim] == b.selected.tolist()
    for a, b in zip(outs, outs3)
)
print(f"replay without example {victim}: all other selections identical "
      f"on every query -> {unchanged}")

untouched = np.flatnonzero(participation == 0)
pristine = bool((store.ledger.z[untouched] == config.per_example_budget).all())
print(f"{untouched.size} examples were never selected; "
      f"all still hold exactly B = {config.per_example_budget} -> {pristine}")
