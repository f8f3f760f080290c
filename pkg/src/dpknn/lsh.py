"""Sign-random-projection index for sub-linear candidate retrieval.

Each of L tables hashes a vector to b bits: bit j is 1 exactly when the
vector's dot product with that table's j-th Gaussian hyperplane is >= 0.
Retrieval returns the union (deduplicated) of the query's exact-collision
buckets across tables.  Codes depend only on (seed, tables, bits, dimension)
and the hashed vector itself — never on the rest of the data — so inserting
or deleting one example can never move another example's bucket.

Candidate restriction changes nothing about privacy: the engine applies the
same filtering, capping, and charging to whatever candidate set it is handed.
Missed true neighbors cost accuracy only.
"""

from __future__ import annotations

import numpy as np

from .engine import ExampleStore, QueryOutcome, answer_query
from .mechanisms import NoiseSource


class LshIndex:
    """Bucketed sign-random-projection codes over a store's live examples."""

    def __init__(self, store: ExampleStore, tables: int, bits: int, seed: int):
        if tables < 1:
            raise ValueError(f"tables must be >= 1, got {tables}")
        if not 1 <= bits <= 63:
            raise ValueError(f"bits must lie in [1, 63], got {bits}")
        self.store = store
        self.tables = int(tables)
        self.bits = int(bits)
        self.seed = int(seed)
        gen = np.random.Generator(np.random.Philox(self.seed))
        # (tables, bits, d) hyperplanes, fixed for the life of the index.
        self.hyperplanes = gen.standard_normal((self.tables, self.bits, store.dimension))
        self._weights = (1 << np.arange(self.bits, dtype=np.int64))
        self._buckets: list[dict[int, np.ndarray]] = [dict() for _ in range(self.tables)]
        live = np.flatnonzero(store.alive)
        if live.size:
            codes = self.codes_for(store.features[live])
            for table in range(self.tables):
                order = np.argsort(codes[:, table], kind="stable")
                sorted_codes = codes[order, table]
                boundaries = np.flatnonzero(np.diff(sorted_codes)) + 1
                for group in np.split(order, boundaries):
                    self._buckets[table][int(codes[group[0], table])] = live[group]

    def codes_for(self, vectors: np.ndarray) -> np.ndarray:
        """(n, tables) bucket codes; each packs ``bits`` sign bits."""
        single = vectors.ndim == 1
        mat = vectors[None, :] if single else vectors
        projections = mat @ self.hyperplanes.reshape(-1, mat.shape[1]).T
        bits = (projections >= 0.0).reshape(mat.shape[0], self.tables, self.bits)
        codes = bits @ self._weights
        return codes[0] if single else codes

    def add(self, index: int) -> None:
        """Index one newly inserted store example."""
        codes = self.codes_for(self.store.features[index])
        for table in range(self.tables):
            key = int(codes[table])
            bucket = self._buckets[table].get(key)
            self._buckets[table][key] = (
                np.array([index], dtype=np.int64)
                if bucket is None
                else np.append(bucket, index)
            )

    def retrieve(self, query: np.ndarray) -> np.ndarray:
        """Union of the query's collision buckets, live examples only, sorted."""
        codes = self.codes_for(np.asarray(query, dtype=np.float64))
        hits = [
            bucket
            for table in range(self.tables)
            if (bucket := self._buckets[table].get(int(codes[table]))) is not None
        ]
        if not hits:
            return np.empty(0, dtype=np.int64)
        candidates = np.unique(np.concatenate(hits))
        return candidates[self.store.alive[candidates]]

    def occupancy(self) -> list[dict[str, float]]:
        """Per-table bucket statistics, for tuning bits/tables."""
        stats = []
        for table in range(self.tables):
            sizes = np.array([b.shape[0] for b in self._buckets[table].values()])
            stats.append(
                {
                    "buckets": int(sizes.shape[0]),
                    "min": int(sizes.min()),
                    "median": float(np.median(sizes)),
                    "max": int(sizes.max()),
                }
            )
        return stats


def build_index(store: ExampleStore, tables: int, bits: int, seed: int) -> LshIndex:
    """Hash every live example of ``store`` into ``tables`` x ``bits`` buckets."""
    return LshIndex(store, tables, bits, seed)


def answer_query_hashed(store: ExampleStore, index: LshIndex, query,
                        src: NoiseSource) -> QueryOutcome:
    """answer_query restricted to the index's candidates for this query.

    A reused prediction appended by the engine is indexed immediately so it is
    retrievable from the very next query on.
    """
    before = store.features.shape[0]
    outcome = answer_query(store, query, src, candidates=index.retrieve(query))
    for new in range(before, store.features.shape[0]):
        index.add(new)
    return outcome
