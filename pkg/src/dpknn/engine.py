"""The private prediction engine: threshold selection, capped votes, charges.

One query is answered in five steps:

1. Filter: only examples whose remaining budget covers one more count release
   (z_i >= 1 / (2 sigma_count^2)) stay eligible; public reused entries always
   do.
2. Select: eligible examples whose kernel weight against the query reaches the
   weight threshold.
3. Release a noisy, floor-clamped count K of the selected set.  Every selected
   private example is charged 1 / (2 sigma_count^2) for it.
4. Each selected private example contributes a one-hot vote of magnitude
   min(weight, sigma_vote * sqrt(2 K z_i)) and is charged
   magnitude^2 / (2 sigma_vote^2 K) — the cap makes that charge never exceed
   what the example has left, so a saturated example lands on exactly zero.
   Public reused entries vote with their full weight, uncapped and uncharged.
5. Release the argmax of the summed votes plus N(0, sigma_vote^2 * K) per
   class.  Optionally the (query, answer) pair re-enters the store as a new
   public example.

The per-example work at steps 2-4 depends only on that example's own state
and the public quantities (query, K), never on other examples — removing a
point leaves everyone else's selection decisions untouched, which is what
makes the per-example accounting sound and unlearning cheap.

State layout: stores are append-only with an alive mask, so example indices
are stable across removals; charge records and LSH buckets can refer to them
without remapping.  All mutation of budgets goes through the ledger, queries
are answered strictly one at a time, and a fresh engine replay with the same
seed reproduces outcomes bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .accounting import (
    ChargeRecord,
    DpParams,
    IndividualLedger,
    LedgerInvariantError,
    budget_for_dp,
    filter_active,
)
from .kernels import IngestionError, KernelSpec, kernel_weights, normalize_rows
from .mechanisms import NoiseSource, noisy_argmax, noisy_count

DEFAULT_COUNT_FLOOR = 30


@dataclass(frozen=True)
class EngineConfig:
    """Everything fixed before the first query.

    Exactly one of ``dp`` (an (epsilon, delta) target, converted to a
    per-example budget) or ``budget`` (the budget itself) must be given.
    ``sigma_count`` defaults to sqrt(T / (6 B)), which prices the count
    releases so a point selected at every one of the T planned queries spends
    a bounded share of its budget on counts alone.
    """

    kernel: KernelSpec
    weight_threshold: float
    sigma_vote: float
    planned_queries: int
    dp: DpParams | None = None
    budget: float | None = None
    sigma_count: float | None = None
    reuse_predictions: bool = False
    count_floor: float = DEFAULT_COUNT_FLOOR
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.weight_threshold <= 1.0:
            raise ValueError(f"weight threshold must lie in [0, 1], got {self.weight_threshold}")
        if not self.sigma_vote > 0.0:
            raise ValueError(f"sigma_vote must be positive, got {self.sigma_vote}")
        if self.planned_queries < 0:
            raise ValueError(f"planned_queries must be nonnegative, got {self.planned_queries}")
        if self.count_floor < 1.0:
            raise ValueError(f"count_floor must be >= 1, got {self.count_floor}")
        if (self.dp is None) == (self.budget is None):
            raise ValueError("exactly one of dp or budget must be set")
        if self.budget is not None and not self.budget > 0.0:
            raise ValueError(f"budget must be positive, got {self.budget}")
        object.__setattr__(self, "_budget", self.budget if self.budget is not None else budget_for_dp(self.dp))
        if self.sigma_count is None:
            sc = math.sqrt(max(self.planned_queries, 1) / (6.0 * self._budget))
            object.__setattr__(self, "sigma_count", sc)
        if not self.sigma_count > 0.0:
            raise ValueError(f"sigma_count must be positive, got {self.sigma_count}")

    @property
    def per_example_budget(self) -> float:
        """The budget B each private example starts with."""
        return self._budget

    @property
    def count_charge(self) -> float:
        """Spend per count release, 1 / (2 sigma_count^2); also the filter threshold."""
        return 1.0 / (2.0 * self.sigma_count * self.sigma_count)


@dataclass(frozen=True)
class QueryOutcome:
    """Everything released by one query, plus the audit trail of its charges."""

    query_index: int
    answer: int
    released_count: float
    selected: np.ndarray
    charges: list[ChargeRecord] = field(default_factory=list)


class ExampleStore:
    """Labeled unit-norm feature vectors with one budget entry per example.

    Arrays are append-only; removal flips the alive flag, so an example's
    index is stable for its whole life and afterwards.  ``public`` marks
    reused predictions, which carry no budget.
    """

    def __init__(self, features, labels, num_classes: int, config: EngineConfig):
        feats = normalize_rows(features)
        labs = np.asarray(labels, dtype=np.int64)
        if labs.ndim != 1 or labs.shape[0] != feats.shape[0]:
            raise IngestionError(
                f"labels shape {labs.shape} does not match {feats.shape[0]} feature rows"
            )
        if num_classes < 1:
            raise IngestionError(f"num_classes must be >= 1, got {num_classes}")
        bad = np.flatnonzero((labs < 0) | (labs >= num_classes))
        if bad.size:
            raise IngestionError(
                f"label {int(labs[bad[0]])} at row {int(bad[0])} outside [0, {num_classes})"
            )
        self.config = config
        self.num_classes = int(num_classes)
        self.features = feats
        self.labels = labs
        self.public = np.zeros(feats.shape[0], dtype=bool)
        self.alive = np.ones(feats.shape[0], dtype=bool)
        self.ledger = IndividualLedger(feats.shape[0], config.per_example_budget)
        self.released: list[QueryOutcome] = []
        self.queries_answered = 0

    # -- shape ---------------------------------------------------------------

    @property
    def dimension(self) -> int:
        return self.features.shape[1]

    @property
    def size(self) -> int:
        """Number of live examples, public entries included."""
        return int(self.alive.sum())

    def private_indices(self) -> np.ndarray:
        return np.flatnonzero(self.alive & ~self.public)

    def private_remaining(self) -> np.ndarray:
        """Remaining budgets of live private examples (the logical ledger)."""
        return self.ledger.z[self.alive & ~self.public]

    # -- mutation ------------------------------------------------------------

    def add_example(self, feature, label: int, *, public: bool = False) -> int:
        """Insert one example with a fresh budget; returns its (stable) index."""
        feat = normalize_rows(np.asarray(feature, dtype=np.float64)[None, :])[0]
        if feat.shape[0] != self.dimension:
            raise IngestionError(
                f"feature dimension {feat.shape[0]} does not match store dimension {self.dimension}"
            )
        if not 0 <= int(label) < self.num_classes:
            raise IngestionError(f"label {label} outside [0, {self.num_classes})")
        self.features = np.vstack([self.features, feat[None, :]])
        self.labels = np.append(self.labels, int(label))
        self.public = np.append(self.public, bool(public))
        self.alive = np.append(self.alive, True)
        self.ledger.append(unlimited=public)
        return self.features.shape[0] - 1

    def remove_example(self, index: int) -> None:
        """Retire one example immediately; its ledger entry goes with it."""
        if not 0 <= index < self.features.shape[0] or not self.alive[index]:
            raise IndexError(f"no live example at index {index}")
        self.alive[index] = False


# -- per-example vote arithmetic (scalar surface) ------------------------------


def contribution(weight: float, label: int, released_count: float, remaining: float,
                 sigma_vote: float, num_classes: int) -> np.ndarray:
    """One private example's vote: one-hot at its label, magnitude capped.

    The cap sigma_vote * sqrt(2 K z) is exactly the magnitude whose label
    charge would consume the example's whole remaining budget z.
    """
    if remaining < -IndividualLedger.SLACK:
        raise LedgerInvariantError(f"negative remaining budget {remaining}")
    cap = sigma_vote * math.sqrt(2.0 * released_count * max(remaining, 0.0))
    vec = np.zeros(num_classes, dtype=np.float64)
    vec[label] = min(weight, cap)
    return vec

def charge_label(remaining: float, vote: np.ndarray, sigma_vote: float,
                 released_count: float) -> float:
    """Budget left after paying ||vote||^2 / (2 sigma_vote^2 K).

    By the cap construction the charge never exceeds ``remaining``; a cap-
    saturated vote lands on exactly zero (any sub-1e-12 residual is float
    round-trip error from the sqrt in the cap, not real budget).
    """
    denom = 2.0 * sigma_vote * sigma_vote * released_count
    sq = float(np.dot(vote, vote))
    if sq >= denom * remaining * (1.0 - 1e-12):
        return 0.0
    new = remaining - sq / denom
    if new < -IndividualLedger.SLACK:
        raise LedgerInvariantError(f"label charge exceeded remaining budget ({new})")
    return max(new, 0.0)


def _accumulate_votes(labels: np.ndarray, magnitudes: np.ndarray, num_classes: int) -> np.ndarray:
    """Index-ordered per-class sums; compensated above 1e5 contributors."""
    if labels.shape[0] > 100_000:
        votes = np.zeros(num_classes, dtype=np.float64)
        for c in range(num_classes):
            votes[c] = math.fsum(magnitudes[labels == c])
        return votes
    # bincount returns int64 for empty input even with float weights
    counts = np.bincount(labels, weights=magnitudes, minlength=num_classes)
    return counts.astype(np.float64, copy=False)


# -- the query path ------------------------------------------------------------


def select_neighbors(store: ExampleStore, query: np.ndarray,
                     candidates: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Indices and weights of eligible examples at or above the weight threshold.

    Eligible = alive, and either public or budgeted for one more count
    release.  ``candidates`` (from an index) restricts the scan.  The decision
    for an example depends only on its own feature, budget, and the query.
    """
    cfg = store.config
    mask = store.alive & store.ledger.active_mask(cfg.count_charge)
    if candidates is not None:
        restricted = np.zeros_like(mask)
        restricted[candidates] = True
        mask &= restricted
    active = np.flatnonzero(mask)
    weights = kernel_weights(cfg.kernel, store.features[active], query)
    keep = weights >= cfg.weight_threshold
    return active[keep], weights[keep]


def answer_query(store: ExampleStore, query, src: NoiseSource,
                 candidates: np.ndarray | None = None) -> QueryOutcome:
    """Answer one query, charging every selected private example.

    Draws exactly 1 + num_classes standard normals from ``src`` regardless of
    how many examples are selected, so noise tapes line up across replays.
    """
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != store.dimension:
        raise ValueError(f"query shape {q.shape} does not match store dimension {store.dimension}")
    if abs(float(np.linalg.norm(q)) - 1.0) > 1e-6:
        raise IngestionError("query must be unit-normalized")
    cfg = store.config
    t = store.queries_answered

    selected, weights = select_neighbors(store, q, candidates)
    released = noisy_count(selected.shape[0], cfg.sigma_count, cfg.count_floor, src)

    is_public = store.public[selected]
    priv = selected[~is_public]
    priv_w = weights[~is_public]

    # Count charge first; caps and label charges see the post-count budget.
    count_charge = cfg.count_charge
    store.ledger.spend(priv, np.full(priv.shape[0], count_charge))
    z = store.ledger.z[priv]

    denom = 2.0 * cfg.sigma_vote * cfg.sigma_vote * released
    saturated = priv_w * priv_w >= denom * z
    magnitudes = np.where(saturated, cfg.sigma_vote * np.sqrt(2.0 * released * z), priv_w)
    label_charges = np.where(saturated, z, priv_w * priv_w / denom)
    store.ledger.spend(priv, label_charges)

    votes = _accumulate_votes(store.labels[priv], magnitudes, store.num_classes)
    votes += _accumulate_votes(
        store.labels[selected[is_public]], weights[is_public], store.num_classes
    )

    answer = noisy_argmax(votes, cfg.sigma_vote * cfg.sigma_vote * released, src)

    charges = [
        ChargeRecord(t, int(i), count_charge, float(c))
        for i, c in zip(priv, label_charges)
    ]
    outcome = QueryOutcome(t, answer, released, selected, charges)
    store.released.append(outcome)
    store.queries_answered += 1
    if cfg.reuse_predictions:
        store.add_example(q, answer, public=True)
    return outcome


def answer_stream(store: ExampleStore, queries, src: NoiseSource) -> list[QueryOutcome]:
    """Answer queries strictly in order; budgets carry over between them."""
    return [answer_query(store, q, src) for q in np.asarray(queries, dtype=np.float64)]
