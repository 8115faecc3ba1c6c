"""Entropy-scored biclustering: per-column single-linkage seeds grown by greedy deletion."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dataset import POSITIVE

DEFAULT_T = 0.005
DEFAULT_EPS_MES = 0.2
DEFAULT_MIN_COLS = 4
JACCARD_DUPLICATE = 0.8
# candidate MES values closer than this count as tied
TIE_TOL = 1e-12


def default_min_rows(n_samples):
    return max(2, math.ceil(0.05 * n_samples))


@dataclass(frozen=True)
class ColumnClustering:
    column: int
    clusters: tuple
    threshold_t: float


@dataclass(frozen=True)
class Seed:
    rows: tuple
    column: int


@dataclass(frozen=True)
class Bicluster:
    rows: tuple
    cols: tuple
    representatives: tuple
    mes: float
    support: float
    n_a: int
    n_b: int

    @property
    def majority(self):
        return POSITIVE if self.n_a > self.n_b else -POSITIVE

    def to_record(self, feature_names=None):
        rec = {
            "rows": list(self.rows),
            "cols": list(self.cols),
            "representatives": list(self.representatives),
            "mes": self.mes,
            "support": self.support,
            "n_a": self.n_a,
            "n_b": self.n_b,
        }
        if feature_names is not None:
            rec["features"] = [feature_names[c] for c in self.cols]
        return rec

    @classmethod
    def from_record(cls, rec):
        return cls(tuple(rec["rows"]), tuple(rec["cols"]), tuple(rec["representatives"]),
                   float(rec["mes"]), float(rec["support"]), int(rec["n_a"]), int(rec["n_b"]))


def cluster_column(values, t, column=0):
    """1-D single linkage on absolute differences; merging stops once every gap exceeds t."""
    if t <= 0:
        raise ValueError("t must be positive")
    labels = kernels.cluster_labels_1d(values, t)
    clusters = tuple(tuple(int(i) for i in np.flatnonzero(labels == c)) for c in range(int(labels.max(initial=-1)) + 1))
    return ColumnClustering(column, clusters, float(t))


def column_entropy(values, t):
    """Entropy (bits) of the single-linkage partition of one column's values."""
    values = np.asarray(values, dtype=np.float64)
    return float(kernels.column_entropies(values.reshape(-1, 1), t)[0])


def mean_entropy_score(submatrix, t):
    """Mean of the column entropies of ``submatrix``."""
    sub = np.asarray(submatrix, dtype=np.float64)
    if sub.ndim != 2 or sub.shape[1] == 0:
        raise ValueError("submatrix needs at least one column")
    return float(kernels.column_entropies(sub, t).mean())


def support_degree(n_a, n_b):
    if n_a < 0 or n_b < 0 or n_a + n_b < 1:
        raise ValueError("counts must be non-negative with a positive total")
    return max(n_a, n_b) / (n_a + n_b)


def extract_seeds(samples, t, min_rows, columns=None):
    """Every single-linkage cluster with at least ``min_rows`` members, column by column."""
    if min_rows < 2:
        raise ValueError("min_rows must be >= 2")
    samples = np.asarray(samples, dtype=np.float64)
    columns = range(samples.shape[1]) if columns is None else columns
    seeds = []
    for col in columns:
        clusters = [c for c in cluster_column(samples[:, col], t, col).clusters if len(c) >= min_rows]
        clusters.sort(key=lambda c: (-len(c), c[0]))
        seeds.extend(Seed(c, int(col)) for c in clusters)
    return seeds


def make_bicluster(samples, labels, rows, cols, t):
    rows = tuple(int(r) for r in rows)
    cols = tuple(int(c) for c in cols)
    sub = np.asarray(samples, dtype=np.float64)[np.ix_(rows, cols)]
    lab = np.asarray(labels)[list(rows)]
    n_a = int((lab == POSITIVE).sum())
    n_b = len(rows) - n_a
    return Bicluster(rows, cols, tuple(float(v) for v in sub.mean(axis=0)),
                     mean_entropy_score(sub, t), support_degree(n_a, n_b), n_a, n_b)


def grow_from_seed(samples, labels, seed, eps_mes=DEFAULT_EPS_MES, t=DEFAULT_T, min_rows=2,
                   min_cols=DEFAULT_MIN_COLS, columns=None, trace=None):
    """Shrink (seed rows x all columns) by the single deletion that minimizes MES.

    Stops when MES < eps_mes, when both size floors are reached, or when no
    deletion would keep MES from rising. Ties prefer rows over columns, then the
    lowest index. Each accepted deletion is appended to ``trace`` as
    ``("row" | "col", index, new_mes)`` when a list is given.
    """
    samples = np.asarray(samples, dtype=np.float64)
    rows = np.array(sorted(seed.rows if isinstance(seed, Seed) else seed), dtype=np.int64)
    cols = np.array(range(samples.shape[1]) if columns is None else columns, dtype=np.int64)
    if rows.size < min_rows:
        raise ValueError(f"seed has {rows.size} rows, fewer than min_rows={min_rows}")
    sub = samples[np.ix_(rows, cols)]
    ent = kernels.column_entropies(sub, t)
    mes = float(ent.mean())
    while mes >= eps_mes:
        can_row = rows.size > min_rows
        can_col = cols.size > min_cols
        if not (can_row or can_col):
            break
        row_mes = kernels.row_deletion_entropies(sub, t).mean(axis=1) if can_row else np.empty(0)
        col_mes = (ent.sum() - ent) / (cols.size - 1) if can_col else np.empty(0)
        best = min(row_mes.min(initial=np.inf), col_mes.min(initial=np.inf))
        if best > mes + TIE_TOL:
            break
        near_rows = np.flatnonzero(row_mes <= best + TIE_TOL)
        if near_rows.size:
            k = int(near_rows[0])
            if trace is not None:
                trace.append(("row", int(rows[k]), float(row_mes[k])))
            rows = np.delete(rows, k)
            sub = np.delete(sub, k, axis=0)
        else:
            k = int(np.flatnonzero(col_mes <= best + TIE_TOL)[0])
            if trace is not None:
                trace.append(("col", int(cols[k]), float(col_mes[k])))
            cols = np.delete(cols, k)
            sub = np.delete(sub, k, axis=1)
        ent = kernels.column_entropies(sub, t)
        mes = float(ent.mean())
    return make_bicluster(samples, labels, rows, cols, t)


def _jaccard(a, b):
    a, b = set(a), set(b)
    return len(a & b) / len(a | b) if a or b else 1.0


def integrate_biclusters(biclusters, threshold=JACCARD_DUPLICATE):
    """Drop near-duplicates (row and column Jaccard both >= threshold), keeping the better one.

    Better means lower MES, then higher support, then earlier in the list.
    """
    items = list(biclusters)
    dropped = [False] * len(items)
    for i, bi in enumerate(items):
        if dropped[i]:
            continue
        for j in range(i + 1, len(items)):
            if dropped[j]:
                continue
            bj = items[j]
            if _jaccard(bi.rows, bj.rows) >= threshold and _jaccard(bi.cols, bj.cols) >= threshold:
                if (bj.mes, -bj.support) < (bi.mes, -bi.support):
                    dropped[i] = True
                    break
                dropped[j] = True
    return [b for b, d in zip(items, dropped) if not d]
