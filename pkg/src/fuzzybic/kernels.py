"""Hot numeric kernels, each with a numba loop form and a vectorized numpy form.

The public wrappers dispatch on :data:`fuzzybic._accel.BACKEND`; every wrapper
also takes an explicit ``backend`` so tests and the benchmark can compare both
paths on identical inputs.
"""
import numpy as np

from ._accel import BACKEND, njit

__all__ = [
    "covering_memberships",
    "cross_relation",
    "cluster_labels_1d",
    "entropy_from_counts",
    "column_entropies",
    "row_deletion_entropies",
]


def covering_memberships(values, centers, delta):
    """Triangular covering memberships, shape ``(n_values, n_centers)``."""
    values = np.asarray(values, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    dist = np.abs(values[:, None] - centers[None, :])
    return np.where(dist <= delta, (delta - dist) / delta, 0.0)


# ---------------------------------------------------------------------------
# sample-centered covering relation between two sample groups


@njit(cache=True)
def _cross_relation_loops(va, vb, delta):
    na = va.shape[0]
    nb = vb.shape[0]
    out = np.zeros((na, nb))
    for i in range(na):
        for j in range(nb):
            d = abs(va[i] - vb[j])
            if d <= delta:
                out[i, j] = (delta - d) / delta
    return out


def _cross_relation_np(va, vb, delta):
    d = np.abs(va[:, None] - vb[None, :])
    return np.where(d <= delta, (delta - d) / delta, 0.0)


def cross_relation(va, vb, delta, backend=None):
    """R(x, u) = membership of u in the covering element of radius delta centered at x."""
    va = np.ascontiguousarray(va, dtype=np.float64)
    vb = np.ascontiguousarray(vb, dtype=np.float64)
    if (backend or BACKEND) == "numba":
        return _cross_relation_loops(va, vb, float(delta))
    return _cross_relation_np(va, vb, delta)


# ---------------------------------------------------------------------------
# 1-D single linkage


@njit(cache=True)
def _cluster_labels_loops(values, t):
    n = values.shape[0]
    labels = np.empty(n, dtype=np.int64)
    if n == 0:
        return labels
    order = np.argsort(values, kind="mergesort")
    cid = 0
    labels[order[0]] = 0
    for k in range(1, n):
        if values[order[k]] - values[order[k - 1]] > t:
            cid += 1
        labels[order[k]] = cid
    return labels


def _cluster_labels_np(values, t):
    n = values.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    order = np.argsort(values, kind="stable")
    breaks = np.diff(values[order]) > t
    ids = np.concatenate(([0], np.cumsum(breaks)))
    labels = np.empty(n, dtype=np.int64)
    labels[order] = ids
    return labels


def cluster_labels_1d(values, t, backend=None):
    """Single-linkage cluster ids for 1-D values, numbered in ascending value order.

    In one dimension single linkage reduces to cutting the sorted sequence at
    every gap larger than ``t``.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    if (backend or BACKEND) == "numba":
        return _cluster_labels_loops(values, float(t))
    return _cluster_labels_np(values, t)


# ---------------------------------------------------------------------------
# entropy of cluster-size distributions


@njit(cache=True)
def _plogp(p):
    if p <= 1.0:
        return 0.0
    return p * np.log2(p)


def entropy_from_counts(counts):
    """Entropy in bits of a cluster-size vector: log2 n - (1/n) sum p log2 p."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    if n <= 1:
        return 0.0
    big = counts[counts > 1]
    return float(max(np.log2(n) - np.sum(big * np.log2(big)) / n, 0.0))


@njit(cache=True)
def _column_entropies_loops(sub, t):
    n, c = sub.shape
    out = np.zeros(c)
    if n <= 1:
        return out
    for j in range(c):
        col = sub[:, j].copy()
        col.sort()
        s = 0.0
        run = 1
        for k in range(1, n):
            if col[k] - col[k - 1] > t:
                s += _plogp(float(run))
                run = 1
            else:
                run += 1
        s += _plogp(float(run))
        out[j] = max(np.log2(n) - s / n, 0.0)
    return out


def _plogp_np(p):
    p = np.asarray(p, dtype=np.float64)
    safe = np.where(p > 1.0, p, 1.0)
    return np.where(p > 1.0, safe * np.log2(safe), 0.0)


def _sorted_runs_np(sub, t):
    """Per sorted position: run start, run end (inclusive) and the sorted values."""
    n, c = sub.shape
    sv = np.sort(sub, axis=0, kind="stable")
    brk = np.diff(sv, axis=0) > t
    starts_mask = np.vstack([np.ones((1, c), bool), brk])
    ends_mask = np.vstack([brk, np.ones((1, c), bool)])
    idx = np.arange(n)[:, None]
    start = np.maximum.accumulate(np.where(starts_mask, idx, 0), axis=0)
    end = np.minimum.accumulate(np.where(ends_mask, idx, n - 1)[::-1], axis=0)[::-1]
    return sv, start, end


def _column_entropies_np(sub, t):
    n, c = sub.shape
    if n <= 1:
        return np.zeros(c)
    sv, start, end = _sorted_runs_np(sub, t)
    size = (end - start + 1).astype(np.float64)
    # each run counted once, at its start position
    s = np.where(start == np.arange(n)[:, None], _plogp_np(size), 0.0).sum(axis=0)
    return np.maximum(np.log2(n) - s / n, 0.0)


def column_entropies(sub, t, backend=None):
    """Entropy of each column of ``sub`` under 1-D single linkage at threshold ``t``."""
    sub = np.ascontiguousarray(sub, dtype=np.float64)
    if sub.ndim != 2:
        raise ValueError("expected a 2-D submatrix")
    if (backend or BACKEND) == "numba":
        return _column_entropies_loops(sub, float(t))
    return _column_entropies_np(sub, t)


@njit(cache=True)
def _row_deletion_loops(sub, t):
    n, c = sub.shape
    out = np.zeros((n, c))
    if n <= 2:
        return out
    m = n - 1
    logm = np.log2(m)
    for j in range(c):
        order = np.argsort(sub[:, j], kind="mergesort")
        sv = sub[order, j]
        start = np.empty(n, dtype=np.int64)
        end = np.empty(n, dtype=np.int64)
        s = 0
        for k in range(n):
            if k > 0 and sv[k] - sv[k - 1] > t:
                s = k
            start[k] = s
        e = n - 1
        for k in range(n - 1, -1, -1):
            if k < n - 1 and sv[k + 1] - sv[k] > t:
                e = k
            end[k] = e
        total = 0.0
        for k in range(n):
            if start[k] == k:
                total += _plogp(float(end[k] - start[k] + 1))
        for k in range(n):
            p = float(end[k] - start[k] + 1)
            if start[k] < k < end[k] and sv[k + 1] - sv[k - 1] > t:
                new = total - _plogp(p) + _plogp(float(k - start[k])) + _plogp(float(end[k] - k))
            else:
                new = total - _plogp(p) + _plogp(p - 1.0)
            val = logm - new / m
            out[order[k], j] = val if val > 0.0 else 0.0
    return out


def _row_deletion_np(sub, t):
    n, c = sub.shape
    if n <= 2:
        return np.zeros((n, c))
    m = n - 1
    order = np.argsort(sub, axis=0, kind="stable")
    sv, start, end = _sorted_runs_np(sub, t)
    pos = np.arange(n)[:, None]
    size = (end - start + 1).astype(np.float64)
    plp = _plogp_np(size)
    total = np.where(start == pos, plp, 0.0).sum(axis=0)
    interior = (start < pos) & (pos < end)
    bridge = np.zeros_like(interior)
    if n > 2:
        bridge[1:-1] = (sv[2:] - sv[:-2]) > t
    split = interior & bridge
    shrink = total - plp + _plogp_np(size - 1.0)
    split_val = total - plp + _plogp_np((pos - start).astype(np.float64)) + _plogp_np((end - pos).astype(np.float64))
    new = np.where(split, split_val, shrink)
    ent_sorted = np.maximum(np.log2(m) - new / m, 0.0)
    out = np.empty((n, c))
    np.put_along_axis(out, order, ent_sorted, axis=0)
    return out


def row_deletion_entropies(sub, t, backend=None):
    """Column entropies after deleting each single row: ``out[r, j]``.

    Removing one point only touches the run that contains it, so each column
    costs one sort plus a linear pass instead of ``n`` re-clusterings.
    """
    sub = np.ascontiguousarray(sub, dtype=np.float64)
    if (backend or BACKEND) == "numba":
        return _row_deletion_loops(sub, float(t))
    return _row_deletion_np(sub, t)
