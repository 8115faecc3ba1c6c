"""Confusion metrics, ROC/AUC, k-fold cross-validation and Friedman average ranks."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .dataset import NEGATIVE, POSITIVE

log = logging.getLogger(__name__)

METRICS = ("accuracy", "precision", "recall", "specificity")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_predictions(cls, y_true, y_pred):
        y_true = np.asarray(y_true)
        y_pred = np.asarray(y_pred)
        return cls(
            tp=int(((y_pred == POSITIVE) & (y_true == POSITIVE)).sum()),
            fp=int(((y_pred == POSITIVE) & (y_true == NEGATIVE)).sum()),
            tn=int(((y_pred == NEGATIVE) & (y_true == NEGATIVE)).sum()),
            fn=int(((y_pred == NEGATIVE) & (y_true == POSITIVE)).sum()),
        )


def _ratio(num, den):
    return num / den if den > 0 else None


def confusion_metrics(counts):
    """Accuracy, precision, recall, specificity; ``None`` where a denominator is zero."""
    c = counts
    return {
        "accuracy": _ratio(c.tp + c.tn, c.tp + c.fn + c.fp + c.tn),
        "precision": _ratio(c.tp, c.tp + c.fp),
        "recall": _ratio(c.tp, c.tp + c.fn),
        "specificity": _ratio(c.tn, c.tn + c.fp),
    }


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("fpr,tpr\n")
            for x, y in self.points:
                fh.write(f"{x!r},{y!r}\n")


def roc_curve(scores, labels):
    """ROC from a descending threshold sweep; tied scores form one diagonal step."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == POSITIVE
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both classes")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    p = pos[order]
    last_of_group = np.r_[s[1:] != s[:-1], True]
    tps = np.cumsum(p)[last_of_group]
    fps = np.cumsum(~p)[last_of_group]
    tpr = np.r_[0, tps] / n_pos
    fpr = np.r_[0, fps] / n_neg
    # integer trapezoid sum keeps the area exact up to one final division
    area2 = np.sum(np.diff(np.r_[0, fps]) * (np.r_[0, tps][1:] + np.r_[0, tps][:-1]))
    return RocCurve(fpr, tpr, float(area2) / (2.0 * n_pos * n_neg))


@dataclass
class FoldResult:
    fold: int
    n_train: int
    n_test: int
    counts: ConfusionCounts | None = None
    metrics: dict = field(default_factory=dict)
    auc: float | None = None
    error: str | None = None
    test_index: np.ndarray | None = None
    margins: np.ndarray | None = None
    # per-round boosting records and rule memberships of the fold's model
    diagnostics: dict | None = None

    @property
    def ok(self):
        return self.error is None

    def to_dict(self):
        d = {"fold": self.fold, "n_train": self.n_train, "n_test": self.n_test}
        if self.ok:
            d.update(counts=vars(self.counts), metrics=self.metrics, auc=self.auc)
        else:
            d["error"] = self.error
        return d


@dataclass
class CvReport:
    folds: list
    means: dict
    roc: RocCurve | None
    mean_auc: float | None

    @property
    def n_failed(self):
        return sum(not f.ok for f in self.folds)

    def metrics_section(self):
        return {
            "folds": [f.to_dict() for f in self.folds],
            "means": self.means,
            "mean_auc": self.mean_auc,
            "pooled_auc": None if self.roc is None else self.roc.auc,
            "failed_folds": self.n_failed,
        }


def _run_fold(args):
    from .ensemble import decision_margin, strong_classify
    from .pipeline import PipelineError, train_pipeline

    table, config, ablation, fold, train_idx, test_idx = args
    res = FoldResult(fold, len(train_idx), len(test_idx), test_index=test_idx)
    try:
        trained = train_pipeline(table.subset(train_idx), config, ablation)
    except PipelineError as exc:
        res.error = str(exc)
        return res
    model = trained.model
    strong = model.strong
    res.diagnostics = {
        "training": trained.manifest["training"],
        "rounds": [vars(r) for r in strong.training_meta],
        "rule_memberships": [(r.membership_a, r.membership_b) for r in trained.rules],
    }
    # raw tables are scaled with the training fold's ranges only
    x_test = table.samples[test_idx] if table.normalized else model.normalize(table.samples[test_idx])
    y_test = table.labels[test_idx]
    res.margins = decision_margin(strong, x_test)
    pred = strong_classify(strong, x_test)
    res.counts = ConfusionCounts.from_predictions(y_test, pred)
    res.metrics = confusion_metrics(res.counts)
    if len(set(y_test.tolist())) == 2:
        res.auc = roc_curve(res.margins, y_test).auc
    return res


def cross_validate(table, config, ablation, fold_plan, workers=1):
    """Train on k-1 folds, test on the held-out one; failed folds are reported and skipped."""
    jobs = [(table, config, ablation, f, tr, te) for f, (tr, te) in enumerate(fold_plan.folds())]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            folds = list(pool.map(_run_fold, jobs))
    else:
        folds = [_run_fold(j) for j in jobs]
    done = [f for f in folds if f.ok]
    for f in folds:
        if not f.ok:
            log.warning("fold %d failed: %s", f.fold, f.error)
    means = {}
    for name in METRICS:
        vals = [f.metrics[name] for f in done if f.metrics[name] is not None]
        means[name] = float(np.mean(vals)) if vals else None
    aucs = [f.auc for f in done if f.auc is not None]
    roc = None
    if done:
        idx = np.concatenate([f.test_index for f in done])
        scores = np.concatenate([f.margins for f in done])
        y = table.labels[idx]
        if len(set(y.tolist())) == 2:
            roc = roc_curve(scores, y)
    return CvReport(folds, means, roc, float(np.mean(aucs)) if aucs else None)


@dataclass(frozen=True)
class FriedmanResult:
    methods: tuple
    average_ranks: dict
    chi_square: float
    n_datasets: int


def friedman_ranks(scores, methods=None):
    """Average rank per method (1 = best score per dataset, ties averaged) and the Friedman statistic.

    ``scores`` is methods x datasets, higher is better.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] < 2 or scores.shape[1] < 1:
        raise ValueError("need a methods x datasets table with >= 2 methods and >= 1 dataset")
    k, n = scores.shape
    methods = tuple(methods) if methods is not None else tuple(f"m{i}" for i in range(k))
    ranks = np.column_stack([rankdata(-scores[:, d]) for d in range(n)])
    avg = ranks.mean(axis=1)
    chi2 = 12.0 * n / (k * (k + 1)) * np.sum(avg ** 2) - 3.0 * n * (k + 1)
    return FriedmanResult(methods, dict(zip(methods, avg.tolist())), float(chi2), n)
