import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fuzzybic.dataset import NEGATIVE, POSITIVE, FuzzyDecisionTable, stratified_folds
from fuzzybic.evaluation import (
    ConfusionCounts,
    confusion_metrics,
    cross_validate,
    friedman_ranks,
    roc_curve,
)
from fuzzybic.pipeline import Ablation, PipelineConfig


def test_confusion_metrics_examples():
    assert confusion_metrics(ConfusionCounts(50, 0, 50, 0)) == dict.fromkeys(
        ["accuracy", "precision", "recall", "specificity"], 1.0)
    m = confusion_metrics(ConfusionCounts(tp=40, fp=5, tn=45, fn=10))
    assert m["accuracy"] == pytest.approx(0.85)
    assert m["precision"] == pytest.approx(8 / 9)
    assert m["recall"] == pytest.approx(0.8)
    assert m["specificity"] == pytest.approx(0.9)
    m = confusion_metrics(ConfusionCounts(0, 0, 7, 3))
    assert m["precision"] is None and m["recall"] == 0.0 and m["accuracy"] == 0.7


@given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40), st.integers(0, 40))
def test_accuracy_is_weighted_recall_and_specificity(tp, fp, tn, fn):
    p, n = tp + fn, tn + fp
    if p == 0 or n == 0:
        return
    m = confusion_metrics(ConfusionCounts(tp, fp, tn, fn))
    assert m["accuracy"] == pytest.approx((m["recall"] * p + m["specificity"] * n) / (p + n), abs=1e-12)


def test_counts_from_predictions():
    c = ConfusionCounts.from_predictions([1, 1, -1, -1, 1], [1, -1, -1, 1, 1])
    assert (c.tp, c.fp, c.tn, c.fn) == (2, 1, 1, 1) and c.total == 5


def test_roc_examples():
    assert roc_curve([3, 2, 1, 0], [1, 1, -1, -1]).auc == 1.0
    flat = roc_curve([0.5] * 4, [1, -1, 1, -1])
    assert flat.auc == 0.5 and flat.points == [(0.0, 0.0), (1.0, 1.0)]
    assert roc_curve([0.9, 0.8, 0.3], [1, -1, 1]).auc == 0.5
    with pytest.raises(ValueError):
        roc_curve([0.1, 0.2], [1, 1])


@given(st.lists(st.tuples(st.integers(-5, 5), st.booleans()), min_size=2, max_size=40))
@settings(max_examples=150, deadline=None)
def test_roc_matches_pairwise_statistic(pairs):
    scores = [s / 2 for s, _ in pairs]
    labels = [POSITIVE if b else NEGATIVE for _, b in pairs]
    if len(set(labels)) < 2:
        return
    roc = roc_curve(scores, labels)
    assert abs(roc.auc - oracles.auc_pairwise(scores, labels)) <= 1e-12
    assert roc.points[0] == (0.0, 0.0) and roc.points[-1] == (1.0, 1.0)
    assert (np.diff(roc.fpr) >= 0).all() and (np.diff(roc.tpr) >= 0).all()


def test_roc_csv(tmp_path):
    path = tmp_path / "roc.csv"
    roc_curve([0.9, 0.8, 0.3], [1, -1, 1]).write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "fpr,tpr" and lines[1] == "0.0,0.0" and lines[-1] == "1.0,1.0"


def test_friedman_examples():
    res = friedman_ranks([[0.9, 0.8, 0.95], [0.5, 0.4, 0.3], [0.7, 0.6, 0.2]], ["x", "y", "z"])
    assert res.average_ranks["x"] == 1.0
    tied = friedman_ranks([[0.8], [0.8], [0.1]])
    assert tied.average_ranks == {"m0": 1.5, "m1": 1.5, "m2": 3.0}
    with pytest.raises(ValueError):
        friedman_ranks([[0.5, 0.6]])


@given(st.integers(2, 6), st.integers(1, 8), st.integers(0, 1000))
@settings(max_examples=50, deadline=None)
def test_friedman_rank_sum_and_chi_square(k, n, seed):
    scores = np.random.default_rng(seed).integers(0, 4, size=(k, n)) / 4
    res = friedman_ranks(scores)
    ranks = np.array(list(res.average_ranks.values()))
    assert ranks.sum() == pytest.approx(k * (k + 1) / 2)
    # chi-square from the textbook form sum_j (R_j - (k+1)/2)^2
    expected = 12 * n / (k * (k + 1)) * np.sum((ranks - (k + 1) / 2) ** 2)
    assert res.chi_square == pytest.approx(expected, abs=1e-9)


def separable_table():
    rng = np.random.default_rng(0)
    a = 0.05 + 0.3 * rng.random((10, 3))
    b = 0.65 + 0.3 * rng.random((10, 3))
    samples = np.vstack([a, b])
    labels = np.array([POSITIVE] * 10 + [NEGATIVE] * 10)
    return FuzzyDecisionTable(samples, labels, ["x", "y", "z"], normalized=True)


FAST = PipelineConfig(t=0.05, tau=0.5, min_rows=2, min_good_biclusters=2, rounds_T=5, max_iterations=5)


def test_cross_validation_on_separable_table():
    table = separable_table()
    plan = stratified_folds(table, 2, 0)
    rep = cross_validate(table, FAST, Ablation(), plan)
    assert rep.n_failed == 0
    assert [f.metrics["accuracy"] for f in rep.folds] == [1.0, 1.0]
    for name, mean in rep.means.items():
        assert mean == pytest.approx(np.mean([f.metrics[name] for f in rep.folds]), abs=1e-12)
    assert rep.roc.auc == 1.0
    again = cross_validate(table, FAST, Ablation(), plan)
    assert again.metrics_section() == rep.metrics_section()


def test_cross_validation_reports_failed_folds(monkeypatch, caplog):
    import fuzzybic.pipeline as pipeline

    real = pipeline.train_pipeline
    calls = []

    def flaky(table, config, ablation):
        calls.append(table.n_samples)
        if len(calls) == 1:
            raise pipeline.PipelineError("ensemble", "forced failure")
        return real(table, config, ablation)

    monkeypatch.setattr(pipeline, "train_pipeline", flaky)
    table = separable_table()
    rep = cross_validate(table, FAST, Ablation(), stratified_folds(table, 2, 0))
    assert rep.n_failed == 1
    assert "forced failure" in rep.folds[0].to_dict()["error"]
    assert rep.means["accuracy"] == rep.folds[1].metrics["accuracy"]
    assert "fold 0 failed" in caplog.text
