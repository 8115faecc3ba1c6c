import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fuzzybic.biclustering import Bicluster
from fuzzybic.dataset import NEGATIVE, POSITIVE
from fuzzybic.rules import (
    FuzzyRule,
    RuleError,
    WeakClassifier,
    assign_rule_class,
    build_weak_classifiers,
    extract_rule,
    pool_predictions,
    rule_scores,
    weak_classify,
)


def bic(n_a, n_b, cols=(0, 1), reps=(0.2, 0.4)):
    return Bicluster(tuple(range(n_a + n_b)), tuple(cols), tuple(reps), 0.1, max(n_a, n_b) / (n_a + n_b), n_a, n_b)


def rule(ma, cols=(0,), values=(0.5,), n=10):
    return FuzzyRule(tuple(cols), tuple(values), ma, 1.0 - ma, n)


def test_extract_rule_examples():
    r = extract_rule(bic(8, 2))
    assert (r.membership_a, r.membership_b) == (0.8, 0.2)
    assert r.cols == (0, 1) and r.values == (0.2, 0.4) and r.n_source_rows == 10
    assert (extract_rule(bic(5, 0)).membership_a, extract_rule(bic(5, 0)).membership_b) == (1.0, 0.0)


def test_hardened_rule():
    r = extract_rule(bic(3, 7), harden=True)
    assert (r.membership_a, r.membership_b) == (0.0, 1.0)


@given(st.integers(0, 200), st.integers(0, 200), st.booleans())
def test_memberships_sum_to_one(a, b, harden):
    if a + b < 2:
        return
    r = extract_rule(bic(a, b), harden=harden)
    assert abs(r.membership_a + r.membership_b - 1.0) <= 1e-9
    assert 0 <= r.membership_a <= 1 and 0 <= r.membership_b <= 1


@given(st.integers(0, 30), st.integers(0, 30), st.integers(1, 9))
def test_rule_class_scale_invariant(a, b, k):
    if a + b < 2:
        return
    assert assign_rule_class(extract_rule(bic(a, b))) == assign_rule_class(extract_rule(bic(k * a, k * b)))


@pytest.mark.parametrize("ma, expected", [(0.8, POSITIVE), (0.5, NEGATIVE), (0.2, NEGATIVE)])
def test_assign_rule_class(ma, expected):
    assert assign_rule_class(rule(ma)) == expected


def test_rule_validation():
    with pytest.raises(ValueError):
        FuzzyRule((0, 1), (0.1,), 0.5, 0.5, 2)
    with pytest.raises(ValueError):
        FuzzyRule((0,), (0.1,), 0.5, 0.6, 2)


def test_build_pairs():
    rules = [rule(0.9), rule(0.7), rule(0.1), rule(0.3), rule(0.5)]
    pool = build_weak_classifiers(rules, cap=10)
    assert len(pool) == 6
    assert [p.id for p in pool] == list(range(6))
    one = build_weak_classifiers([rule(0.9), rule(0.2)])
    assert len(one) == 1 and (one[0].membership_a, one[0].membership_b) == (0.9, 0.8)
    with pytest.raises(RuleError, match="class B has no rules"):
        build_weak_classifiers([rule(0.9), rule(0.8)])
    with pytest.raises(RuleError, match="class A has no rules"):
        build_weak_classifiers([rule(0.1)])


def test_build_pairs_cap_ranking():
    rules = [rule(0.9, n=10), rule(1.0, n=30), rule(0.0, n=5), rule(0.2, n=40)]
    pool = build_weak_classifiers(rules, cap=2)
    # scores: (30, 40) = 62, (10*0.9, 40*0.8) = 41, (30, 5) = 35, ...
    assert [(p.rule_a.n_source_rows, p.rule_b.n_source_rows) for p in pool] == [(30, 40), (10, 40)]


def test_weak_classifier_requires_classes():
    with pytest.raises(ValueError):
        WeakClassifier(rule(0.2), rule(0.1), 0)


def test_weak_classify_examples():
    ra = rule(0.7, cols=(0, 1), values=(0.2, 0.2))
    rb = rule(0.1, cols=(0, 1), values=(0.8, 0.8))
    wc = WeakClassifier(ra, rb, 0)
    assert weak_classify(wc, np.array([0.2, 0.2]), 0.1) == (POSITIVE, 0.7)
    # equidistant, equal memberships: final tie goes to A
    eq = WeakClassifier(rule(0.6, values=(0.3,)), rule(0.4, values=(0.7,)), 1)
    assert weak_classify(eq, np.array([0.5]), 0.3) == (POSITIVE, 0.6)
    # score 0.5 vs 0.5, rule_b membership 0.9 > rule_a 0.7
    ha = rule(0.7, cols=(0, 1), values=(0.3, 0.3))
    hb = rule(0.1, cols=(0, 1), values=(0.35, 0.9))
    assert weak_classify(WeakClassifier(ha, hb, 2), np.array([0.35, 0.25]), 0.1) == (NEGATIVE, 0.9)


def test_rule_scores_and_pool_predictions_agree():
    rng = np.random.default_rng(2)
    rules = [rule(m, cols=(0, 2), values=tuple(rng.random(2))) for m in (0.9, 0.6, 0.2, 0.4)]
    pool = build_weak_classifiers(rules)
    x = rng.random((15, 3))
    votes, mems = pool_predictions(pool, x, 0.3)
    for k, wc in enumerate(pool):
        for i in range(15):
            assert weak_classify(wc, x[i], 0.3) == (votes[k, i], mems[k, i])
    s = rule_scores(rules[0], x, 0.3)
    assert ((s >= 0) & (s <= 1)).all()


def test_rule_record_round_trip():
    r = rule(0.75, cols=(1, 3), values=(0.1, 0.9))
    rec = r.to_record(["a", "b", "c", "d"])
    assert rec["features"] == ["b", "d"] and rec["class"] == "A"
    assert FuzzyRule.from_record(rec) == r
