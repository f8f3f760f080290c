"""Per-example Renyi-DP budgets and (epsilon, delta) conversions.

Every private example i carries a remaining budget z_i, initialized to a
common value B.  Releasing a Gaussian linear query in which example i's
contribution has L2 norm s costs alpha * s^2 / (2 sigma^2) Renyi divergence at
order alpha — linear in alpha — so the ledger only needs to track the
coefficient s^2 / (2 sigma^2).  An example whose coefficient spend reaches B
is retired by the filter and never touched again; the whole interaction then
satisfies (alpha, B * alpha)-RDP for every alpha >= 1 simultaneously.

Conversion of a linear RDP curve to (epsilon, delta)-DP minimizes

    epsilon(alpha) = B * alpha + log(1 / (alpha * delta)) / (alpha - 1)
                     + log(1 - 1 / alpha)

over a fixed dense grid of orders, and is additionally clamped by the
classical closed form B + 2 * sqrt(B * log(1 / delta)), which is itself a
valid (looser) conversion.  The optimizer for linear curves sits near
alpha* = 1 + sqrt(log(1 / delta) / B), which the grid covers for every
practical (B, delta) pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# 1.01 .. 10.00 in steps of 0.01, then even orders 10 .. 512.
ALPHA_GRID = np.unique(
    np.concatenate([1.0 + np.arange(1, 901) / 100.0, np.arange(10.0, 513.0, 2.0)])
)


class LedgerInvariantError(RuntimeError):
    """A budget went materially negative or a charge was malformed.

    Raised instead of silently continuing: a run that violates the ledger
    invariant has no privacy guarantee to report.
    """


@dataclass(frozen=True)
class DpParams:
    """An (epsilon, delta) differential-privacy target."""

    epsilon: float
    delta: float

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class ChargeRecord:
    """One example's spend at one query: the count charge and the label charge."""

    query_index: int
    example: int
    count_charge: float
    label_charge: float


def gaussian_individual_rdp(contribution_norm: float, sigma: float, alpha: float) -> float:
    """Order-alpha Renyi divergence of a Gaussian release for one example.

    ``contribution_norm`` is the L2 norm of the example's contribution to the
    released statistic; ``sigma`` the noise scale.
    """
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if alpha < 1.0:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if contribution_norm < 0.0:
        raise ValueError(f"contribution norm must be nonnegative, got {contribution_norm}")
    return alpha * contribution_norm * contribution_norm / (2.0 * sigma * sigma)


def classical_dp_bound(budget: float, delta: float) -> float:
    """The closed-form conversion B + 2 * sqrt(B * log(1 / delta))."""
    return budget + 2.0 * math.sqrt(budget * math.log(1.0 / delta))


def rdp_to_dp(budget: float, delta: float) -> float:
    """Convert a linear RDP curve alpha -> budget * alpha to an epsilon at delta."""
    if budget < 0.0:
        raise ValueError(f"budget must be nonnegative, got {budget}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if budget == 0.0:
        return 0.0
    a = ALPHA_GRID
    eps = budget * a + np.log(1.0 / (a * delta)) / (a - 1.0) + np.log1p(-1.0 / a)
    return float(min(eps.min(), classical_dp_bound(budget, delta)))


def budget_for_dp(target: DpParams) -> float:
    """Largest per-example budget whose conversion stays within the target.

    Bisection on B: rdp_to_dp is continuous and strictly increasing in B, and
    rdp_to_dp(eps) > eps, so [0, eps] brackets the answer.
    """
    lo, hi = 0.0, target.epsilon
    if rdp_to_dp(hi, target.delta) <= target.epsilon:  # pragma: no cover - defensive
        return hi
    while hi - lo > 1e-9 * hi:
        mid = 0.5 * (lo + hi)
        if rdp_to_dp(mid, target.delta) <= target.epsilon:
            lo = mid
        else:
            hi = mid
    return lo


class IndividualLedger:
    """Remaining per-example budgets, with unlimited markers for public entries.

    Entries are append-only and aligned with their store's example positions.
    ``z`` is meaningful only where ``unlimited`` is False.  Mutation happens
    exclusively through :meth:`spend`, which never lets a budget go below
    -1e-9 (accumulated float error) without aborting the run.
    """

    SLACK = 1e-9

    def __init__(self, size: int, budget: float):
        if budget < 0.0:
            raise ValueError(f"budget must be nonnegative, got {budget}")
        self.budget = float(budget)
        self.z = np.full(size, self.budget, dtype=np.float64)
        self.unlimited = np.zeros(size, dtype=bool)

    def __len__(self) -> int:
        return self.z.shape[0]

    def append(self, *, unlimited: bool = False) -> int:
        """Add one entry (fresh budget, or an unlimited public marker)."""
        self.z = np.append(self.z, self.budget)
        self.unlimited = np.append(self.unlimited, unlimited)
        return len(self) - 1

    def active_mask(self, threshold: float) -> np.ndarray:
        """Entries allowed to participate: unlimited, or z >= threshold."""
        return self.unlimited | (self.z >= threshold)

    def spend(self, indices: np.ndarray, amounts: np.ndarray) -> None:
        """Deduct nonnegative charges from private entries."""
        amounts = np.asarray(amounts, dtype=np.float64)
        if np.any(amounts < 0.0):
            raise LedgerInvariantError("negative charge")
        if np.any(self.unlimited[indices]):
            raise LedgerInvariantError("attempted to charge a public (unlimited) entry")
        self.z[indices] -= amounts
        if np.any(self.z[indices] < -self.SLACK):
            raise LedgerInvariantError("an example's budget went negative")

    def remaining(self, index: int) -> float:
        if self.unlimited[index]:
            return math.inf
        return float(self.z[index])


def filter_active(ledger: IndividualLedger, threshold: float) -> np.ndarray:
    """Indices still allowed to participate at the given per-query count cost.

    ``threshold`` is the count charge 1 / (2 sigma_count^2): an example whose
    remaining budget cannot cover one more count release is retired.  The
    boundary is inclusive.  Unlimited (public) entries always pass.
    """
    if threshold < 0.0:
        raise ValueError(f"threshold must be nonnegative, got {threshold}")
    return np.flatnonzero(ledger.active_mask(threshold))


def oracle_compose(records: list[ChargeRecord]) -> dict[int, float]:
    """Independent audit: total spend per example, recomputed from scratch.

    Deliberately naive (one full pass over the records per example) and
    accumulated with math.fsum so it shares no code path — and no float
    rounding schedule — with the engine's incremental ledger updates.
    """
    examples = sorted({r.example for r in records})
    return {
        i: math.fsum(
            r.count_charge + r.label_charge for r in records if r.example == i
        )
        for i in examples
    }
