"""AdaBoost over a fixed pool of rule-pair weak classifiers, with membership-weighted voting."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import NEGATIVE, POSITIVE
from .rules import WeakClassifier, pool_predictions

DEFAULT_ROUNDS = 50
EPS_CLAMP = 1e-10


class BoostingError(RuntimeError):
    pass


@dataclass(frozen=True)
class RoundRecord:
    classifier_id: int
    epsilon: float
    alpha: float
    z: float
    weight_sum: float
    min_weight: float


@dataclass(frozen=True)
class StrongClassifier:
    members: tuple  # (WeakClassifier, alpha) pairs in selection order
    training_meta: tuple  # RoundRecord per retained round
    tau: float
    tie_default: int = POSITIVE

    def __post_init__(self):
        if not self.members:
            raise ValueError("a strong classifier needs at least one member")
        if any(alpha <= 0 for _, alpha in self.members):
            raise ValueError("member weights must be positive")

    @property
    def alphas(self):
        return np.array([a for _, a in self.members])

    def error_bound(self):
        """Product over rounds of 2 sqrt(eps (1 - eps))."""
        eps = np.array([r.epsilon for r in self.training_meta])
        return float(np.prod(2.0 * np.sqrt(eps * (1.0 - eps))))

    def to_record(self):
        return {
            "tau": self.tau,
            "tie_default": "A" if self.tie_default == POSITIVE else "B",
            "members": [{"alpha": alpha, "classifier": wc.to_record()} for wc, alpha in self.members],
            "rounds": [vars(r) for r in self.training_meta],
        }

    @classmethod
    def from_record(cls, rec):
        members = tuple((WeakClassifier.from_record(m["classifier"]), float(m["alpha"])) for m in rec["members"])
        meta = tuple(RoundRecord(**r) for r in rec["rounds"])
        tie = POSITIVE if rec["tie_default"] == "A" else NEGATIVE
        return cls(members, meta, float(rec["tau"]), tie)


def alpha_from_error(epsilon):
    eps = min(max(epsilon, EPS_CLAMP), 1.0 - EPS_CLAMP)
    return 0.5 * np.log((1.0 - eps) / eps)


def adaboost_train(pool, samples, labels, rounds=DEFAULT_ROUNDS, tau=0.1, tie_default=None):
    """Discrete AdaBoost that selects each round's weak classifier from ``pool`` without replacement.

    Ties in weighted error go to the lowest pool position. Training stops early
    when the best remaining error reaches 0.5 or the pool runs out.
    """
    pool = list(pool)
    if not pool:
        raise BoostingError("empty weak-classifier pool")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    labels = np.asarray(labels)
    n = labels.shape[0]
    if tie_default is None:
        tie_default = POSITIVE if (labels == POSITIVE).sum() >= (labels == NEGATIVE).sum() else NEGATIVE
    votes, _ = pool_predictions(pool, samples, tau)
    wrong = (votes != labels[None, :]).astype(np.float64)
    agree = votes * labels[None, :]
    available = np.ones(len(pool), bool)
    w = np.full(n, 1.0 / n)
    members, meta = [], []
    for _ in range(rounds):
        if not available.any():
            break
        errs = np.where(available, wrong @ w, np.inf)
        k = int(np.argmin(errs))
        eps = float(errs[k])
        if eps >= 0.5:
            break
        alpha = float(alpha_from_error(eps))
        w = w * np.exp(-alpha * agree[k])
        z = float(w.sum())
        w = w / z
        available[k] = False
        members.append((pool[k], alpha))
        meta.append(RoundRecord(pool[k].id, eps, alpha, z, float(w.sum()), float(w.min())))
    if not members:
        raise BoostingError("no better-than-chance classifier in the pool")
    return StrongClassifier(tuple(members), tuple(meta), float(tau), int(tie_default))


def decision_margin(strong, samples, use_membership=True):
    """Sum over members of alpha * c * h, c being the matched rule's class membership.

    Returns a float for a single sample and an array for a matrix of samples.
    """
    arr = np.asarray(samples, dtype=np.float64)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    votes, mems = pool_predictions([wc for wc, _ in strong.members], arr, strong.tau)
    weight = strong.alphas[:, None] * (mems if use_membership else 1.0)
    margin = (weight * votes).sum(axis=0)
    return float(margin[0]) if single else margin


def strong_classify(strong, samples, tie_default=None, use_membership=True):
    """Sign of the decision margin; an exact zero goes to ``tie_default``."""
    tie = strong.tie_default if tie_default is None else tie_default
    margin = decision_margin(strong, samples, use_membership)
    out = np.where(margin > 0, POSITIVE, np.where(margin < 0, NEGATIVE, tie))
    return int(out) if np.ndim(margin) == 0 else out
