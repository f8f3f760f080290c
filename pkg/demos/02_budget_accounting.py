"""Follow one example's budget through its charges, down to retirement.

Every query that selects a private example leaves a charge record: a fixed
price for the noisy count release plus a data-dependent price for its vote.
Those records compose linearly, and the ledger must always equal the budget
minus their sum — we recompute that from scratch here and print the trail.

Usage: python3 demos/02_budget_accounting.py
"""

import numpy as np

from dpknn import (
    EngineConfig,
    KernelSpec,
    NoiseSource,
    answer_stream,
    budget_for_dp,
    classical_dp_bound,
    DpParams,
    oracle_compose,
    rdp_to_dp,
)
from dpknn.data import generate_synthetic

B = 0.06
data = generate_synthetic(num_classes=3, size=400, dim=8, num_queries=60, seed=3)
config = EngineConfig(
    kernel=KernelSpec("cosine"),
    weight_threshold=0.6,
    sigma_vote=0.6,
    planned_queries=60,
    budget=B,
)
store = data.store(config)
answer_stream(store, data.query_features, NoiseSource(12))

# ---- the charge trail of the single most-charged example --------------------
records = [r for out in store.released for r in out.charges]
totals = oracle_compose(records)
hungriest = max(totals, key=totals.get)

print(f"budget B = {B}, count release costs {config.count_charge:.5f} each")
print(f"example {hungriest} was charged the most:\n")
print(f"{'query':>5} {'count charge':>13} {'vote charge':>12} {'z after':>10}")
z = B
for r in records:
    if r.example != hungriest:
        continue
    z -= r.count_charge + r.label_charge
    print(f"{r.query_index:>5} {r.count_charge:>13.5f} {r.label_charge:>12.5f} {z:>10.5f}")

ledger_z = store.ledger.z[hungriest]
print(f"\nledger agrees: z = {ledger_z:.5f}, replayed sum gives {z:.5f}")
assert abs(ledger_z - (B - totals[hungriest])) < 1e-12

active = ledger_z >= config.count_charge
print(f"filter keeps it {'active' if active else 'retired'} "
      f"(needs {config.count_charge:.5f} for another count release)")

# ---- what the spent budget means as (epsilon, delta) -------------------------
delta = 1e-5
print(f"\nworst case spend across the store: {max(totals.values()):.5f}")
print(f"as a DP statement at delta={delta:g}:")
print(f"  optimized conversion : epsilon = {rdp_to_dp(B, delta):.4f}")
print(f"  classical conversion : epsilon = {classical_dp_bound(B, delta):.4f}")
target = DpParams(epsilon=1.0, delta=delta)
print(f"inverse: hitting epsilon=1.0 exactly needs B = {budget_for_dp(target):.6f}")
