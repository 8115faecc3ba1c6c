"""Fuzzy coverings, fuzzy-rough approximations and related-family attribute reduction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dataset import NEGATIVE, POSITIVE

TOL = 1e-9
DEFAULT_DELTA = 0.26
DEFAULT_BETA = 0.5


class ReductError(RuntimeError):
    """No admissible attribute subset preserves the positive region."""

    def __init__(self, message, failing_samples=()):
        super().__init__(message)
        self.failing_samples = tuple(int(i) for i in failing_samples)


@dataclass(frozen=True)
class CenterGrid:
    delta: float
    centers: tuple

    def as_array(self):
        return np.asarray(self.centers, dtype=np.float64)


def build_center_grid(delta, grid_size=None):
    """Centers 0, delta, 2*delta, ... up to 1, with 1 appended when the steps miss it.

    ``grid_size`` replaces the stepped grid by that many evenly spaced centers.
    """
    delta = float(delta)
    if not 0.0 < delta <= 0.5:
        raise ValueError(f"delta must lie in (0, 0.5], got {delta}")
    if grid_size is not None:
        if grid_size < 2:
            raise ValueError("grid_size must be >= 2")
        return CenterGrid(delta, tuple(float(c) for c in np.linspace(0.0, 1.0, int(grid_size))))
    centers = []
    k = 0
    while True:
        c = round(k * delta, 12)
        if c > 1.0:
            break
        centers.append(c)
        k += 1
    if centers[-1] != 1.0:
        centers.append(1.0)
    return CenterGrid(delta, tuple(centers))


def covering_membership(value, center, delta):
    """Membership of ``value`` in the covering element centered at ``center``."""
    d = abs(value - center)
    if d <= delta:
        return (delta - d) / delta
    return 0.0


@dataclass(frozen=True)
class FuzzyCoveringFamily:
    """Per-attribute membership matrices, each of shape (n_samples, n_centers)."""

    grid: CenterGrid
    memberships: tuple
    beta: float = DEFAULT_BETA

    def is_beta_covering(self):
        """Every sample reaches membership >= beta in some element of every attribute."""
        return all(bool((m.max(axis=1) >= self.beta - TOL).all()) for m in self.memberships)


def build_covering_family(samples, delta, beta=DEFAULT_BETA, grid_size=None):
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    samples = np.asarray(getattr(samples, "samples", samples), dtype=np.float64)
    grid = build_center_grid(delta, grid_size)
    centers = grid.as_array()
    mem = tuple(kernels.covering_memberships(samples[:, a], centers, grid.delta) for a in range(samples.shape[1]))
    return FuzzyCoveringFamily(grid, mem, beta)


def relation_matrix(table, attrs, delta):
    """Full n x n relation R_B = min over a in B of R_a.

    R_a(x, y) is the membership of y in the covering element of radius delta
    centered at a(x): 1 when the values coincide, 0 once they are delta apart.
    """
    attrs = list(attrs)
    n = table.n_samples
    rel = np.ones((n, n))
    for a in attrs:
        col = table.samples[:, a]
        np.minimum(rel, kernels.cross_relation(col, col, delta), out=rel)
    return rel


def fuzzy_similarity(table, attrs, i, j, delta):
    attrs = list(attrs)
    if not attrs:
        raise ValueError("attrs must be non-empty")
    return min(covering_membership(table.samples[j, a], table.samples[i, a], delta) for a in attrs)


def lower_approximation(relation, fuzzy_set):
    """inf_u max(1 - R(x, u), F(u)) for every x."""
    relation = np.asarray(relation, dtype=np.float64)
    fuzzy_set = np.asarray(fuzzy_set, dtype=np.float64)
    return np.maximum(1.0 - relation, fuzzy_set[None, :]).min(axis=1)


def upper_approximation(relation, fuzzy_set):
    """sup_u min(R(x, u), F(u)) for every x."""
    relation = np.asarray(relation, dtype=np.float64)
    fuzzy_set = np.asarray(fuzzy_set, dtype=np.float64)
    return np.minimum(relation, fuzzy_set[None, :]).max(axis=1)


@dataclass(frozen=True)
class PositiveRegion:
    degrees: np.ndarray

    def preserves(self, reference, tol=TOL):
        return bool((self.degrees >= np.asarray(getattr(reference, "degrees", reference)) - tol).all())


class CoveringRelations:
    """Cross-class relation blocks per attribute for one table and radius.

    For a crisp decision the lower approximation of x's own class only looks at
    samples of the other class, so POS(x) = 1 - max_{u in other class} R(x, u)
    and only the class-A x class-B block of each R_a is ever needed.
    """

    def __init__(self, table, delta, beta=DEFAULT_BETA, grid_size=None):
        self.table = table
        self.family = build_covering_family(table.samples, delta, beta, grid_size)
        self.delta = float(delta)
        self.beta = beta
        self.idx_a = np.flatnonzero(table.labels == POSITIVE)
        self.idx_b = np.flatnonzero(table.labels == NEGATIVE)
        self._values = np.asarray(table.samples, dtype=np.float64)
        self._blocks = {}

    @property
    def n_attributes(self):
        return len(self.family.memberships)

    def block(self, a):
        blk = self._blocks.get(a)
        if blk is None:
            col = self._values[:, a]
            blk = kernels.cross_relation(col[self.idx_a], col[self.idx_b], self.delta)
            self._blocks[a] = blk
        return blk

    def relation_block(self, attrs):
        attrs = list(attrs)
        if not attrs:
            return np.ones((self.idx_a.size, self.idx_b.size))
        rel = self.block(attrs[0]).copy()
        for a in attrs[1:]:
            np.minimum(rel, self.block(a), out=rel)
        return rel

    def degrees_from_block(self, rel):
        out = np.empty(self.table.n_samples)
        out[self.idx_a] = 1.0 - rel.max(axis=1)
        out[self.idx_b] = 1.0 - rel.max(axis=0)
        return out

    def positive_region(self, attrs):
        return PositiveRegion(self.degrees_from_block(self.relation_block(attrs)))


def positive_region(table, attrs, delta=DEFAULT_DELTA, grid_size=None):
    attrs = list(attrs)
    if not attrs:
        raise ValueError("attrs must be non-empty")
    return CoveringRelations(table, delta, grid_size=grid_size).positive_region(attrs)


def related_family(table, delta=DEFAULT_DELTA, attrs=None, relations=None):
    """Per sample, the attributes that alone keep its full-set positive-region degree."""
    rel = relations or CoveringRelations(table, delta)
    attrs = list(range(rel.n_attributes)) if attrs is None else list(attrs)
    full = rel.positive_region(attrs).degrees
    ok = np.column_stack([rel.positive_region([a]).degrees >= full - TOL for a in attrs])
    return [frozenset(attrs[k] for k in np.flatnonzero(row)) for row in ok]


@dataclass(frozen=True)
class Reduct:
    attributes: tuple
    preserved_positive_region: PositiveRegion
    reference_positive_region: PositiveRegion
    delta: float
    beta: float

    def feature_names(self, table):
        return [table.feature_names[a] for a in self.attributes]


def greedy_reduct(table, excluded=(), delta=DEFAULT_DELTA, beta=DEFAULT_BETA, grid_size=None, relations=None):
    """Reduct of the admissible attributes (all minus ``excluded``).

    1. greedy set cover of the per-sample related families (most uncovered
       samples first, lowest index on ties);
    2. samples whose family is empty need attribute combinations: keep adding
       the attribute that preserves the most samples until all are preserved;
    3. prune in reverse insertion order while preservation still holds.
    """
    rel = relations or CoveringRelations(table, delta, beta, grid_size)
    excluded = set(excluded)
    admissible = [a for a in range(rel.n_attributes) if a not in excluded]
    if not admissible:
        raise ReductError("no admissible attributes left", range(table.n_samples))
    ref = rel.positive_region(admissible).degrees

    def preserved(degrees):
        return degrees >= ref - TOL

    singles = {a: preserved(rel.positive_region([a]).degrees) for a in admissible}
    chosen = []
    uncovered = np.zeros(table.n_samples, bool)
    for a in admissible:
        uncovered |= singles[a]
    while uncovered.any():
        gains = [int((singles[a] & uncovered).sum()) if a not in chosen else -1 for a in admissible]
        best = admissible[int(np.argmax(gains))]
        chosen.append(best)
        uncovered &= ~singles[best]

    block = rel.relation_block(chosen)
    ok = preserved(rel.degrees_from_block(block))
    while not ok.all():
        best, best_key = None, None
        for a in admissible:
            if a in chosen:
                continue
            deg = rel.degrees_from_block(np.minimum(block, rel.block(a)))
            key = (int(preserved(deg).sum()), float(deg.sum()))
            if best_key is None or key > best_key:
                best, best_key = a, key
        if best is None:
            raise ReductError("admissible attributes cannot preserve the positive region", np.flatnonzero(~ok))
        chosen.append(best)
        np.minimum(block, rel.block(best), out=block)
        ok = preserved(rel.degrees_from_block(block))

    for a in list(reversed(chosen)):
        if len(chosen) == 1:
            break
        trial = [b for b in chosen if b != a]
        if preserved(rel.positive_region(trial).degrees).all():
            chosen = trial

    attrs = tuple(sorted(chosen))
    return Reduct(attrs, rel.positive_region(attrs), PositiveRegion(ref), rel.delta, rel.beta)
