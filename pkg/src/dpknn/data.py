"""Dataset serialization and the clustered synthetic benchmark generator.

Binary feature files: magic ``IKN1``, then two little-endian uint32 (count n,
dimension d), then n*d little-endian float32 row-major.  Binary label files:
magic ``IKL1``, then uint32 count and class count, then n uint32 class
indices.  CSV alternatives hold one feature row (comma-separated floats) or
one label per line.  Loaders reject malformed input with the byte offset or
row where it went wrong rather than guessing.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import EngineConfig, ExampleStore
from .kernels import IngestionError, normalize_rows

FEATURE_MAGIC = b"IKN1"
LABEL_MAGIC = b"IKL1"

DEFAULT_SEPARATION = 1.0  # minimum pairwise angle between class means, radians
DEFAULT_SPREAD = 0.12  # per-coordinate Gaussian scatter around each mean


class DataFormatError(ValueError):
    """A dataset file does not match its declared format."""


# -- binary format --------------------------------------------------------------


def write_features(path, features) -> None:
    feats = np.ascontiguousarray(np.asarray(features), dtype="<f4")
    if feats.ndim != 2:
        raise DataFormatError(f"expected an (n, d) feature matrix, got shape {feats.shape}")
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<II", feats.shape[0], feats.shape[1]))
        fh.write(feats.tobytes())


def read_features(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != FEATURE_MAGIC:
        raise DataFormatError(f"{path}: bad magic {raw[:4]!r} at byte 0, expected {FEATURE_MAGIC!r}")
    if len(raw) < 12:
        raise DataFormatError(f"{path}: truncated header, {len(raw)} bytes < 12")
    n, d = struct.unpack("<II", raw[4:12])
    expected = 12 + 4 * n * d
    if len(raw) != expected:
        raise DataFormatError(
            f"{path}: payload size mismatch at byte 12: header promises {expected - 12} bytes "
            f"({n}x{d} float32), file carries {len(raw) - 12}"
        )
    return np.frombuffer(raw, dtype="<f4", offset=12).reshape(n, d).astype(np.float64)


def write_labels(path, labels, num_classes: int) -> None:
    labs = np.ascontiguousarray(np.asarray(labels), dtype="<u4")
    if labs.ndim != 1:
        raise DataFormatError(f"expected a 1-D label vector, got shape {labs.shape}")
    with open(path, "wb") as fh:
        fh.write(LABEL_MAGIC)
        fh.write(struct.pack("<II", labs.shape[0], int(num_classes)))
        fh.write(labs.tobytes())


def read_labels(path) -> tuple[np.ndarray, int]:
    raw = Path(path).read_bytes()
    if raw[:4] != LABEL_MAGIC:
        raise DataFormatError(f"{path}: bad magic {raw[:4]!r} at byte 0, expected {LABEL_MAGIC!r}")
    if len(raw) < 12:
        raise DataFormatError(f"{path}: truncated header, {len(raw)} bytes < 12")
    n, num_classes = struct.unpack("<II", raw[4:12])
    expected = 12 + 4 * n
    if len(raw) != expected:
        raise DataFormatError(
            f"{path}: payload size mismatch at byte 12: header promises {expected - 12} bytes "
            f"({n} uint32), file carries {len(raw) - 12}"
        )
    labels = np.frombuffer(raw, dtype="<u4", offset=12).astype(np.int64)
    bad = np.flatnonzero(labels >= num_classes)
    if bad.size:
        row = int(bad[0])
        raise DataFormatError(
            f"{path}: label {int(labels[row])} at row {row} (byte {12 + 4 * row}) "
            f"outside [0, {num_classes})"
        )
    return labels, int(num_classes)


# -- csv alternative -------------------------------------------------------------


def _read_features_csv(path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise DataFormatError(f"{path}: unparseable float at row {lineno}: {exc}") from None
    if not rows:
        raise DataFormatError(f"{path}: no feature rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DataFormatError(f"{path}: inconsistent row widths {sorted(widths)}")
    return np.asarray(rows, dtype=np.float64)


def _read_labels_csv(path, num_classes: int | None) -> tuple[np.ndarray, int]:
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(int(line))
            except ValueError:
                raise DataFormatError(f"{path}: unparseable label at row {lineno}: {line!r}") from None
    if not values:
        raise DataFormatError(f"{path}: no labels")
    labels = np.asarray(values, dtype=np.int64)
    if labels.min() < 0:
        raise DataFormatError(f"{path}: negative label at row {int(np.argmin(labels))}")
    c = int(labels.max()) + 1 if num_classes is None else int(num_classes)
    bad = np.flatnonzero(labels >= c)
    if bad.size:
        raise DataFormatError(
            f"{path}: label {int(labels[bad[0]])} at row {int(bad[0])} outside [0, {c})"
        )
    return labels, c


def load_features(path) -> np.ndarray:
    """Read a feature file, choosing the decoder by extension."""
    if str(path).endswith(".csv"):
        return _read_features_csv(path)
    return read_features(path)


def load_labels(path, num_classes: int | None = None) -> tuple[np.ndarray, int]:
    if str(path).endswith(".csv"):
        return _read_labels_csv(path, num_classes)
    return read_labels(path)


def load_dataset(features_path, labels_path, config: EngineConfig,
                 num_classes: int | None = None) -> ExampleStore:
    """Read features and labels (binary or CSV) into a fresh store."""
    feats = load_features(features_path)
    labels, c = load_labels(labels_path, num_classes)
    if labels.shape[0] != feats.shape[0]:
        raise DataFormatError(
            f"{labels_path} holds {labels.shape[0]} labels but {features_path} holds "
            f"{feats.shape[0]} feature rows"
        )
    return ExampleStore(feats, labels, c, config)


# -- synthetic benchmark ----------------------------------------------------------


@dataclass(frozen=True)
class SyntheticData:
    """A generated training set plus a disjoint labeled query pool."""

    features: np.ndarray
    labels: np.ndarray
    query_features: np.ndarray
    query_labels: np.ndarray
    means: np.ndarray

    def store(self, config: EngineConfig) -> ExampleStore:
        return ExampleStore(self.features, self.labels, self.means.shape[0], config)


def _sample_means(num_classes: int, dim: int, separation: float,
                  gen: np.random.Generator) -> np.ndarray:
    """Unit-norm class means with pairwise angle >= separation.

    Rejection sampling covers the easy regimes; when the angle demand is too
    tight for random draws (near-antipodal pairs), a subgradient push away
    from the worst violator finds a feasible point or proves there is none to
    find within the iteration budget.
    """
    # Dots compare against this with a hair of slack so exactly-critical
    # packings (three means at 120 degrees in a plane) remain constructible.
    max_dot = math.cos(separation) + 1e-9
    means: list[np.ndarray] = []
    while len(means) < num_classes:
        placed = None
        for _ in range(2000):
            candidate = gen.standard_normal(dim)
            candidate /= np.linalg.norm(candidate)
            if all(float(np.dot(candidate, m)) <= max_dot for m in means):
                placed = candidate
                break
        if placed is None:
            existing = np.asarray(means)
            v = -existing.sum(axis=0) + 1e-3 * gen.standard_normal(dim)
            v /= np.linalg.norm(v)
            for _ in range(5000):
                dots = existing @ v
                worst = int(np.argmax(dots))
                if dots[worst] <= max_dot:
                    placed = v
                    break
                v = v - 0.25 * (dots[worst] - max_dot + 1e-3) * existing[worst]
                v /= np.linalg.norm(v)
        if placed is None:
            raise ValueError(
                f"could not place {num_classes} class means at pairwise angle >= "
                f"{separation:.4f} in dimension {dim}"
            )
        means.append(placed)
    return np.asarray(means)


def _sample_points(means: np.ndarray, labels: np.ndarray, spread: float,
                   gen: np.random.Generator) -> np.ndarray:
    points = means[labels] + spread * gen.standard_normal((labels.shape[0], means.shape[1]))
    return normalize_rows(points)


def generate_synthetic(num_classes: int = 3, size: int = 6000, dim: int = 16,
                       separation: float = DEFAULT_SEPARATION,
                       spread: float = DEFAULT_SPREAD, num_queries: int = 2400,
                       seed: int = 0) -> SyntheticData:
    """Clustered unit-sphere data with a held-out labeled query pool.

    Every draw comes from streams spawned off ``seed``, so the same arguments
    always produce the same arrays.  Labels are balanced round-robin.
    """
    if num_classes < 2:
        raise ValueError(f"num_classes must be >= 2, got {num_classes}")
    if size < num_classes:
        raise ValueError(f"size {size} cannot cover {num_classes} classes")
    if not 0.0 < separation < math.pi + 1e-9:
        raise ValueError(f"separation must lie in (0, pi], got {separation}")
    if spread < 0.0:
        raise ValueError(f"spread must be nonnegative, got {spread}")
    mean_seed, point_seed, query_seed = np.random.SeedSequence(seed).spawn(3)
    means = _sample_means(num_classes, dim, separation, np.random.Generator(np.random.Philox(mean_seed)))
    labels = np.arange(size, dtype=np.int64) % num_classes
    features = _sample_points(means, labels, spread, np.random.Generator(np.random.Philox(point_seed)))
    query_labels = np.arange(num_queries, dtype=np.int64) % num_classes
    query_features = _sample_points(
        means, query_labels, spread, np.random.Generator(np.random.Philox(query_seed))
    )
    return SyntheticData(features, labels, query_features, query_labels, means)
