"""Loading, min-max normalization and stratified fold plans for binary tables."""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

POSITIVE = 1
NEGATIVE = -1


class DataError(ValueError):
    """Malformed input data. Messages carry the row/column location."""


@dataclass(frozen=True)
class FuzzyDecisionTable:
    """Samples (n x m), labels in {+1, -1} (+1 is class A) and column metadata."""

    samples: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    source_ranges: tuple = ()
    positive_label: str = "A"
    negative_label: str = "B"
    normalized: bool = False

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        if samples.ndim != 2:
            raise DataError("samples must be a 2-D matrix")
        n, m = samples.shape
        if n < 2:
            raise DataError(f"need at least 2 rows, got {n}")
        if labels.shape != (n,):
            raise DataError(f"labels length {labels.shape[0]} != row count {n}")
        if not np.isin(labels, (POSITIVE, NEGATIVE)).all():
            raise DataError("labels must be +1 / -1")
        if not ((labels == POSITIVE).any() and (labels == NEGATIVE).any()):
            raise DataError("both classes must occur at least once")
        if len(self.feature_names) != m:
            raise DataError(f"{len(self.feature_names)} feature names for {m} columns")
        if not np.isfinite(samples).all():
            r, c = np.argwhere(~np.isfinite(samples))[0]
            raise DataError(f"non-finite value at row {r}, column {c}")
        if self.normalized and (samples.min(initial=0.0) < 0.0 or samples.max(initial=0.0) > 1.0):
            raise DataError("normalized samples must lie in [0, 1]")
        samples.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "source_ranges", tuple(tuple(map(float, r)) for r in self.source_ranges))

    @property
    def n_samples(self):
        return self.samples.shape[0]

    @property
    def n_features(self):
        return self.samples.shape[1]

    def subset(self, rows):
        rows = np.asarray(rows)
        return FuzzyDecisionTable(
            self.samples[rows], self.labels[rows], self.feature_names, self.source_ranges,
            self.positive_label, self.negative_label, self.normalized,
        )

    def fingerprint(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.samples).tobytes())
        h.update(np.ascontiguousarray(self.labels).tobytes())
        h.update("\x1f".join(self.feature_names).encode())
        return {
            "n_samples": self.n_samples,
            "n_features": self.n_features,
            "n_positive": int((self.labels == POSITIVE).sum()),
            "source_ranges": [list(r) for r in self.source_ranges],
            "sha256": h.hexdigest(),
        }


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray = field(repr=False)
    seed: int

    def folds(self):
        """Yield ``(train_idx, test_idx)`` for each fold in order."""
        for f in range(self.k):
            test = np.flatnonzero(self.assignments == f)
            train = np.flatnonzero(self.assignments != f)
            yield train, test


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_table(path, label_column=-1, positive_label=None, delimiter=","):
    """Read a delimiter-separated file into a raw (unnormalized) table.

    ``label_column`` is a header name or an integer index (negative counts from
    the end). The header row is optional and detected by a non-numeric cell in
    a feature position. Without ``positive_label`` the first label seen becomes
    class A.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty table")
    width = len(rows[0])
    if width < 2:
        raise DataError(f"{path}: need at least one feature column and a label column")

    header = None
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        header = [c.strip() for c in rows[0]]
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not in header")
        label_idx = header.index(label_column)
        rows = rows[1:]
    else:
        label_idx = int(label_column) % width
        first_features = [c for i, c in enumerate(rows[0]) if i != label_idx]
        if not all(_is_number(c) for c in first_features):
            header = [c.strip() for c in rows[0]]
            rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: empty table")

    feature_idx = [i for i in range(width) if i != label_idx]
    names = [header[i] for i in feature_idx] if header else [f"a{i + 1}" for i in range(len(feature_idx))]
    offset = 2 if header else 1
    data = np.empty((len(rows), len(feature_idx)))
    raw_labels = []
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: row {r + offset} has {len(row)} fields, expected {width}")
        raw_labels.append(row[label_idx].strip())
        for j, i in enumerate(feature_idx):
            cell = row[i].strip()
            try:
                data[r, j] = float(cell)
            except ValueError:
                raise DataError(f"{path}: non-numeric cell {cell!r} at row {r + offset}, column {names[j]!r}") from None
            if not np.isfinite(data[r, j]):
                raise DataError(f"{path}: missing/non-finite value at row {r + offset}, column {names[j]!r}")

    distinct = list(dict.fromkeys(raw_labels))
    if len(distinct) != 2:
        raise DataError(f"{path}: labels not binary, found {len(distinct)} distinct values {distinct[:5]}")
    if positive_label is None:
        positive_label = distinct[0]
    positive_label = str(positive_label)
    if positive_label not in distinct:
        raise DataError(f"{path}: positive label {positive_label!r} not among {distinct}")
    negative_label = distinct[1] if distinct[0] == positive_label else distinct[0]
    labels = np.where(np.array(raw_labels) == positive_label, POSITIVE, NEGATIVE)
    return FuzzyDecisionTable(data, labels, names, (), positive_label, negative_label, False)


def minmax_ranges(samples):
    return np.column_stack([samples.min(axis=0), samples.max(axis=0)])


def apply_ranges(samples, ranges):
    """Map raw values onto [0, 1] with stored (min, max) pairs, clipping out-of-range values."""
    samples = np.asarray(samples, dtype=np.float64)
    ranges = np.asarray(ranges, dtype=np.float64).reshape(-1, 2)
    lo, hi = ranges[:, 0], ranges[:, 1]
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (samples - lo) / safe, 0.0)
    return np.clip(out, 0.0, 1.0)


def normalize_minmax(table):
    """Min-max scale every column to [0, 1]; constant columns become all zeros."""
    ranges = minmax_ranges(table.samples)
    scaled = apply_ranges(table.samples, ranges)
    # a table that is already normalized keeps its original provenance
    source = table.source_ranges if table.normalized and table.source_ranges else [tuple(r) for r in ranges]
    return FuzzyDecisionTable(
        scaled, table.labels, table.feature_names, source,
        table.positive_label, table.negative_label, True,
    )


def stratified_folds(table, k, seed):
    """Deterministic stratified k-fold assignment.

    Each class is shuffled with a seeded permutation and dealt round-robin.
    The dealing continues across classes, so fold sizes differ by at most one.
    """
    labels = np.asarray(table.labels if hasattr(table, "labels") else table)
    if k < 2:
        raise DataError(f"fold count must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    assignments = np.empty(labels.shape[0], dtype=np.int64)
    cursor = 0
    for cls in (POSITIVE, NEGATIVE):
        members = np.flatnonzero(labels == cls)
        if members.size < k:
            raise DataError(f"class {cls:+d} has {members.size} samples, fewer than k={k}")
        members = rng.permutation(members)
        assignments[members] = (cursor + np.arange(members.size)) % k
        cursor = (cursor + members.size) % k
    assignments.setflags(write=False)
    return FoldPlan(k=k, assignments=assignments, seed=seed)
