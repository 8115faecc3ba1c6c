"""Fuzzy rules extracted from biclusters and the rule-pair weak classifiers built on them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import NEGATIVE, POSITIVE

DEFAULT_PAIR_CAP = 500
MATCH_TIE_TOL = 1e-12


class RuleError(RuntimeError):
    pass


@dataclass(frozen=True)
class FuzzyRule:
    cols: tuple
    values: tuple
    membership_a: float
    membership_b: float
    n_source_rows: int

    def __post_init__(self):
        if len(self.cols) != len(self.values):
            raise ValueError("cols and values differ in length")
        if abs(self.membership_a + self.membership_b - 1.0) > 1e-9:
            raise ValueError("rule memberships must sum to 1")

    @property
    def label(self):
        return assign_rule_class(self)

    @property
    def dominant_membership(self):
        return self.membership_a if self.label == POSITIVE else self.membership_b

    def to_record(self, feature_names=None):
        rec = {
            "cols": list(self.cols),
            "values": list(self.values),
            "membership_a": self.membership_a,
            "membership_b": self.membership_b,
            "n_source_rows": self.n_source_rows,
            "class": "A" if self.label == POSITIVE else "B",
        }
        if feature_names is not None:
            rec["features"] = [feature_names[c] for c in self.cols]
        return rec

    @classmethod
    def from_record(cls, rec):
        return cls(tuple(int(c) for c in rec["cols"]), tuple(float(v) for v in rec["values"]),
                   float(rec["membership_a"]), float(rec["membership_b"]), int(rec["n_source_rows"]))


def extract_rule(bicluster, harden=False):
    """Rule with class memberships N_A/N and N_B/N of the bicluster's rows.

    ``harden`` collapses memberships to (1, 0) or (0, 1) by majority, which
    gives crisp rules.
    """
    n = bicluster.n_a + bicluster.n_b
    mem_a = bicluster.n_a / n
    mem_b = bicluster.n_b / n
    if harden:
        mem_a, mem_b = (1.0, 0.0) if mem_a > mem_b else (0.0, 1.0)
    return FuzzyRule(tuple(bicluster.cols), tuple(bicluster.representatives), mem_a, mem_b, n)


def assign_rule_class(rule):
    """A when C_RA > C_RB, otherwise B."""
    return POSITIVE if rule.membership_a > rule.membership_b else NEGATIVE


@dataclass(frozen=True)
class WeakClassifier:
    rule_a: FuzzyRule
    rule_b: FuzzyRule
    id: int

    def __post_init__(self):
        if assign_rule_class(self.rule_a) != POSITIVE or assign_rule_class(self.rule_b) != NEGATIVE:
            raise ValueError("rule_a must be a class-A rule and rule_b a class-B rule")

    @property
    def membership_a(self):
        return self.rule_a.membership_a

    @property
    def membership_b(self):
        return self.rule_b.membership_b

    def to_record(self):
        return {"id": self.id, "rule_a": self.rule_a.to_record(), "rule_b": self.rule_b.to_record()}

    @classmethod
    def from_record(cls, rec):
        return cls(FuzzyRule.from_record(rec["rule_a"]), FuzzyRule.from_record(rec["rule_b"]), int(rec["id"]))


def build_weak_classifiers(rules, cap=DEFAULT_PAIR_CAP):
    """Pair every class-A rule with every class-B rule.

    Above ``cap`` pairs, keep those with the largest
    n_a_rows * C_A + n_b_rows * C_B, ties by (A-rule id, B-rule id).
    """
    rules = list(rules)
    a_rules = [(i, r) for i, r in enumerate(rules) if assign_rule_class(r) == POSITIVE]
    b_rules = [(i, r) for i, r in enumerate(rules) if assign_rule_class(r) == NEGATIVE]
    if not a_rules:
        raise RuleError("class A has no rules")
    if not b_rules:
        raise RuleError("class B has no rules")
    pairs = [(ia, ra, ib, rb) for ia, ra in a_rules for ib, rb in b_rules]
    if len(pairs) > cap:
        def rank(p):
            _, ra, _, rb = p
            score = ra.n_source_rows * ra.membership_a + rb.n_source_rows * rb.membership_b
            return (-score, p[0], p[2])

        pairs = sorted(pairs, key=rank)[:cap]
    return [WeakClassifier(ra, rb, k) for k, (_, ra, _, rb) in enumerate(pairs)]


def rule_scores(rule, samples, tau):
    """Mean triangular match of every sample against the rule's values, radius ``tau``."""
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    dist = np.abs(samples[:, list(rule.cols)] - np.asarray(rule.values)[None, :])
    return np.where(dist <= tau, (tau - dist) / tau, 0.0).mean(axis=1)


def _decide(score_a, score_b, mem_a, mem_b):
    diff = score_a - score_b
    tie = np.abs(diff) <= MATCH_TIE_TOL
    if mem_a >= mem_b:
        tie_label = POSITIVE
    else:
        tie_label = NEGATIVE
    labels = np.where(tie, tie_label, np.where(diff > 0, POSITIVE, NEGATIVE))
    return labels, np.where(labels == POSITIVE, mem_a, mem_b)


def weak_classify(classifier, sample, tau):
    """Predict the class of the better-matching rule and return its dominant membership.

    Equal scores go to the rule with the larger dominant membership, then to A.
    """
    sa = rule_scores(classifier.rule_a, sample, tau)
    sb = rule_scores(classifier.rule_b, sample, tau)
    labels, mems = _decide(sa, sb, classifier.membership_a, classifier.membership_b)
    return int(labels[0]), float(mems[0])


def pool_predictions(classifiers, samples, tau):
    """Votes and matched memberships for a whole pool, both shaped (n_classifiers, n_samples)."""
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    cache = {}

    def scores(rule):
        key = id(rule)
        if key not in cache:
            cache[key] = rule_scores(rule, samples, tau)
        return cache[key]

    votes = np.empty((len(classifiers), samples.shape[0]), dtype=np.int64)
    mems = np.empty((len(classifiers), samples.shape[0]))
    for k, wc in enumerate(classifiers):
        votes[k], mems[k] = _decide(scores(wc.rule_a), scores(wc.rule_b), wc.membership_a, wc.membership_b)
    return votes, mems
