"""Synthetic stream generators, dataset file I/O, and splitting.

Every generator and loader guarantees features in [0,1]^dims and is a
deterministic function of its parameters and seed.

File format (UTF-8 text):

    #mpart-dataset v1 dims=<n> classes=<k> normalized=<true|false>
    #calibration <n>                       (optional)
    <f1>,<f2>,...,<f_dims>,<label-int>     (one sample per line)

The optional calibration line declares that the first n rows define the
min-max normalization applied to the whole file.  An optional sidecar
`<path>.names.json` maps class ids to display names.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Dataset",
    "DataSpec",
    "IngestionError",
    "apportion",
    "gen_blobs",
    "gen_imbalanced",
    "calibration_first",
    "save_dataset",
    "load_embeddings",
    "split_and_shuffle",
    "materialize",
]

HEADER_PREFIX = "#mpart-dataset v1 "


class IngestionError(ValueError):
    """Malformed dataset file; message carries the 1-based line number."""


@dataclass
class Dataset:
    """In-memory labeled set; labels are contiguous ints from 0."""

    X: np.ndarray                       # (n, dims) float64 in [0,1]
    y: np.ndarray                       # (n,) int64
    class_names: dict[int, str] | None = None
    n_calibration: int = 0              # leading rows that defined min-max

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X must be (n, dims) with one label per row")

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def dims(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.y.max()) + 1 if len(self) else 0


def _normalize_unit(X: np.ndarray) -> np.ndarray:
    """Per-dimension min-max onto [0,1]; constant dims map to 0."""
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    span[span == 0.0] = 1.0
    return (X - lo) / span


def gen_blobs(k: int, n: int, spread: float, dims: int, seed: int) -> Dataset:
    """k isotropic Gaussian clusters, one class each, near-even sizes.

    Centers are drawn uniformly from [0.15, 0.85]^dims; samples are clipped
    to the unit cube and then min-max normalized per dimension.
    """
    if k < 1 or dims < 1:
        raise ValueError("need k >= 1 and dims >= 1")
    counts = [n // k + (1 if i < n % k else 0) for i in range(k)]
    return _blobs_with_counts(counts, spread, dims, seed)


def _blobs_with_counts(counts: Sequence[int], spread: float, dims: int, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    k = len(counts)
    centers = rng.uniform(0.15, 0.85, size=(k, dims))
    parts, labels = [], []
    for c, (count, center) in enumerate(zip(counts, centers)):
        parts.append(rng.normal(center, spread, size=(count, dims)))
        labels.append(np.full(count, c, dtype=np.int64))
    X = np.clip(np.vstack(parts), 0.0, 1.0)
    if X.shape[0]:
        X = _normalize_unit(X)
    return Dataset(X=X, y=np.concatenate(labels))


def apportion(n: int, ratios: Sequence[float]) -> list[int]:
    """Integer class sizes proportional to ratios (largest remainder).

    Deterministic: remainder ties go to the lower class index.  When
    n >= len(ratios), every class is guaranteed at least one sample by
    taking from the currently largest class.
    """
    ratios = list(ratios)
    if any(r < 0 for r in ratios) or not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise ValueError("ratios must be non-negative and sum to 1")
    quotas = [n * r for r in ratios]
    counts = [int(q) for q in quotas]
    leftover = n - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (counts[i] - quotas[i], i))
    for i in order[:leftover]:
        counts[i] += 1
    if n >= len(ratios):
        for i, c in enumerate(counts):
            if c == 0:
                counts[int(np.argmax(counts))] -= 1
                counts[i] = 1
    return counts


def gen_imbalanced(
    k: int, n: int, ratios: Sequence[float], seed: int, dims: int = 4, spread: float = 0.06
) -> Dataset:
    """Gaussian clusters with class sizes apportioned to `ratios`."""
    if len(ratios) != k:
        raise ValueError(f"expected {k} ratios, got {len(ratios)}")
    return _blobs_with_counts(apportion(n, ratios), spread, dims, seed)


def calibration_first(dataset: Dataset, n: int) -> Dataset:
    """Reorder rows so the first n span each dimension's min and max.

    A declared calibration split fits the min-max scaler that every later
    row passes through, so it must contain each dimension's extreme rows or
    the file will fail range validation on load. Swaps the extreme rows
    into the prefix, leaving all other rows in place.
    """
    if not 1 <= n <= len(dataset):
        raise ValueError(f"calibration size {n} outside 1..{len(dataset)}")
    needed = set(np.argmin(dataset.X, axis=0).tolist()) | set(
        np.argmax(dataset.X, axis=0).tolist()
    )
    if len(needed) > n:
        raise ValueError(
            f"calibration split of {n} cannot span {len(needed)} extreme rows"
        )
    order = np.arange(len(dataset))
    free = [i for i in range(n) if i not in needed]
    for row in sorted(i for i in needed if i >= n):
        slot = free.pop(0)
        order[slot], order[row] = order[row], order[slot]
    return Dataset(
        X=dataset.X[order],
        y=dataset.y[order],
        class_names=dataset.class_names,
        n_calibration=n,
    )


def save_dataset(
    path: str | Path,
    dataset: Dataset,
    normalized: bool = True,
    calibration: int = 0,
) -> None:
    """Write the text format; floats use repr for exact round-trips."""
    path = Path(path)
    if calibration and len(dataset):
        prefix = dataset.X[:calibration]
        if not (
            np.array_equal(prefix.min(axis=0), dataset.X.min(axis=0))
            and np.array_equal(prefix.max(axis=0), dataset.X.max(axis=0))
        ):
            raise ValueError(
                "calibration split does not span each dimension's range; "
                "the file would fail range validation on load — reorder "
                "with calibration_first()"
            )
    k = dataset.n_classes
    lines = [
        f"#mpart-dataset v1 dims={dataset.dims} classes={k} "
        f"normalized={'true' if normalized else 'false'}"
    ]
    if calibration:
        lines.append(f"#calibration {calibration}")
    for row, label in zip(dataset.X, dataset.y):
        lines.append(",".join(repr(float(v)) for v in row) + f",{int(label)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    if dataset.class_names:
        sidecar = Path(str(path) + ".names.json")
        sidecar.write_text(
            json.dumps({str(c): name for c, name in dataset.class_names.items()}),
            encoding="utf-8",
        )


def _parse_header(line: str) -> tuple[int, int, bool]:
    if not line.startswith(HEADER_PREFIX):
        raise IngestionError("line 1: missing '#mpart-dataset v1' header")
    fields = dict(
        token.split("=", 1) for token in line[len(HEADER_PREFIX):].split() if "=" in token
    )
    try:
        dims = int(fields["dims"])
        classes = int(fields["classes"])
        normalized = {"true": True, "false": False}[fields["normalized"]]
    except (KeyError, ValueError) as exc:
        raise IngestionError(f"line 1: bad header field ({exc})") from exc
    if dims < 1 or classes < 0:
        raise IngestionError("line 1: dims must be >= 1 and classes >= 0")
    return dims, classes, normalized


def load_embeddings(path: str | Path) -> Dataset:
    """Parse a dataset file; errors carry the offending line number.

    When a calibration line is present, min-max bounds are fitted on the
    declared leading rows only and applied to every row; all features must
    land in [0,1] afterwards.  The calibration rows stay part of the set.
    """
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise IngestionError("line 1: empty file")
    dims, classes, _normalized = _parse_header(lines[0])
    body_start = 1
    n_cal = 0
    if len(lines) > 1 and lines[1].startswith("#calibration"):
        try:
            n_cal = int(lines[1].split()[1])
        except (IndexError, ValueError) as exc:
            raise IngestionError(f"line 2: bad calibration count") from exc
        if n_cal < 1:
            raise IngestionError("line 2: calibration count must be >= 1")
        body_start = 2

    rows: list[np.ndarray] = []
    labels: list[int] = []
    line_nos: list[int] = []
    for i, line in enumerate(lines[body_start:], start=body_start + 1):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != dims + 1:
            raise IngestionError(
                f"line {i}: expected {dims} features + label, got {len(parts)} fields"
            )
        try:
            feats = np.array([float(v) for v in parts[:-1]])
            label = int(parts[-1])
        except ValueError as exc:
            raise IngestionError(f"line {i}: unparseable value ({exc})") from exc
        if not np.all(np.isfinite(feats)):
            raise IngestionError(f"line {i}: non-finite feature value")
        if not 0 <= label < classes:
            raise IngestionError(
                f"line {i}: label {label} outside declared range [0, {classes})"
            )
        rows.append(feats)
        labels.append(label)
        line_nos.append(i)

    if n_cal > len(rows):
        raise IngestionError(
            f"line 2: calibration count {n_cal} exceeds {len(rows)} data rows"
        )
    X = np.vstack(rows) if rows else np.zeros((0, dims))
    if n_cal:
        lo = X[:n_cal].min(axis=0)
        span = X[:n_cal].max(axis=0) - lo
        span[span == 0.0] = 1.0
        X = (X - lo) / span
    for j in range(X.shape[0]):
        if np.any(X[j] < 0.0) or np.any(X[j] > 1.0):
            raise IngestionError(
                f"line {line_nos[j]}: feature outside [0,1]"
                + (" after calibration" if n_cal else " and no calibration header")
            )
    names = None
    sidecar = Path(str(path) + ".names.json")
    if sidecar.exists():
        names = {int(c): str(v) for c, v in json.loads(sidecar.read_text()).items()}
    return Dataset(X=X, y=np.array(labels, dtype=np.int64), class_names=names, n_calibration=n_cal)


def split_and_shuffle(
    dataset: Dataset, n_train: int, n_test: int, seed: int, shuffle: bool = True
) -> tuple[Iterator[tuple[np.ndarray, int]], tuple[np.ndarray, np.ndarray]]:
    """Disjoint seeded train/test split; train comes back as a one-shot stream."""
    if n_train < 0 or n_test < 0 or n_train + n_test > len(dataset):
        raise ValueError(
            f"cannot take {n_train}+{n_test} samples from a set of {len(dataset)}"
        )
    idx = np.arange(len(dataset))
    if shuffle:
        idx = np.random.default_rng(seed).permutation(idx)
    train_idx = idx[:n_train]
    test_idx = idx[n_train : n_train + n_test]
    test = (dataset.X[test_idx].copy(), dataset.y[test_idx].copy())
    stream = ((dataset.X[i], int(dataset.y[i])) for i in train_idx)
    return stream, test


@dataclass
class DataSpec:
    """Recipe for one trial's data: a generator or file, plus the split."""

    source: str = "blobs"        # "blobs" | "imbalanced" | path to a dataset file
    k: int = 2
    dims: int = 4
    spread: float = 0.06
    ratios: list[float] = field(default_factory=list)
    n_train: int = 1000
    n_test: int = 200
    seed: int = 0
    shuffle: bool = True

    def total(self) -> int:
        return self.n_train + self.n_test


def materialize(spec: DataSpec) -> tuple[Iterator[tuple[np.ndarray, int]], tuple[np.ndarray, np.ndarray], int]:
    """Produce (train stream, test set, dims) for one trial."""
    if spec.source == "blobs":
        data = gen_blobs(spec.k, spec.total(), spec.spread, spec.dims, spec.seed)
    elif spec.source == "imbalanced":
        ratios = spec.ratios or [1.0 / spec.k] * spec.k
        data = gen_imbalanced(spec.k, spec.total(), ratios, spec.seed, spec.dims, spec.spread)
    else:
        data = load_embeddings(spec.source)
    stream, test = split_and_shuffle(data, spec.n_train, spec.n_test, spec.seed, spec.shuffle)
    return stream, test, data.dims
