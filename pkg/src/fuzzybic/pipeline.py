"""Iterative feature selection loop and end-to-end training."""
from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import biclustering as bc
from .dataset import NEGATIVE, POSITIVE, FuzzyDecisionTable, apply_ranges, normalize_minmax
from .ensemble import DEFAULT_ROUNDS, BoostingError, StrongClassifier, adaboost_train, strong_classify, decision_margin
from .fuzzy_rough import DEFAULT_BETA, DEFAULT_DELTA, CoveringRelations, PositiveRegion, Reduct, ReductError, greedy_reduct
from .rules import DEFAULT_PAIR_CAP, RuleError, build_weak_classifiers, extract_rule


def _default_delta_grid():
    return tuple(round(0.02 * k, 2) for k in range(1, 26))


class PipelineError(RuntimeError):
    """A pipeline stage failed. ``stage`` names it; ``log`` holds the iterations run so far."""

    def __init__(self, stage, message, log=()):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.log = list(log)


@dataclass(frozen=True)
class PipelineConfig:
    delta: float = DEFAULT_DELTA
    delta_grid: tuple = field(default_factory=_default_delta_grid)
    beta: float = DEFAULT_BETA
    support_threshold: float = 0.65
    max_iterations: int = 100
    t: float = bc.DEFAULT_T
    # rule match radius; None reuses t
    tau: float | None = 1.0
    eps_mes: float = bc.DEFAULT_EPS_MES
    min_rows: int | None = None
    min_cols: int = bc.DEFAULT_MIN_COLS
    pair_cap: int = DEFAULT_PAIR_CAP
    rounds_T: int = DEFAULT_ROUNDS
    seed: int = 0
    min_good_biclusters: int = 10
    # neighborhood radius of the fuzzy beta-neighborhood; recorded, not used
    e_radius: float | None = None
    grid_size_override: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "delta_grid", tuple(float(d) for d in self.delta_grid))
        if not 0.5 < self.support_threshold <= 1.0:
            raise ValueError("support_threshold must lie in (0.5, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.delta_grid or any(not 0.0 < d <= 0.5 for d in self.delta_grid):
            raise ValueError("delta_grid values must lie in (0, 0.5]")
        if not 0.0 < self.delta <= 0.5:
            raise ValueError("delta must lie in (0, 0.5]")
        if self.t <= 0 or (self.tau is not None and self.tau <= 0):
            raise ValueError("t and tau must be positive")
        if self.min_cols < 1 or self.rounds_T < 1 or self.pair_cap < 1:
            raise ValueError("min_cols, rounds_T and pair_cap must be >= 1")

    @property
    def match_tau(self):
        return self.t if self.tau is None else self.tau

    def resolved_min_rows(self, n_samples):
        return bc.default_min_rows(n_samples) if self.min_rows is None else self.min_rows

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["delta_grid"] = list(self.delta_grid)
        return d

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "delta_grid" in data:
            data["delta_grid"] = tuple(data["delta_grid"])
        return cls(**data)

    def next_delta(self, delta):
        """The grid value after ``delta``, wrapping to the start of the grid."""
        later = [d for d in self.delta_grid if d > delta + 1e-12]
        return later[0] if later else self.delta_grid[0]


@dataclass(frozen=True)
class Ablation:
    use_fcf: bool = True
    use_fr: bool = True

    @property
    def name(self):
        return {(True, True): "full", (True, False): "fcf_only", (False, True): "fr_only",
                (False, False): "neither"}[(self.use_fcf, self.use_fr)]


@dataclass
class IterationRecord:
    iteration: int
    delta: float
    attributes: list
    excluded: list
    n_biclusters: int
    n_good: int
    mean_support: float
    stop_reason: str = ""

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass
class SelectionResult:
    reduct: Reduct
    biclusters: list
    log: list
    best_iteration: int


def _good_classes(biclusters):
    return {b.majority for b in biclusters}


def _bicluster_pass(table, attributes, config):
    samples = table.samples
    min_rows = config.resolved_min_rows(table.n_samples)
    seeds = bc.extract_seeds(samples, config.t, min_rows, columns=attributes)
    grown = [bc.grow_from_seed(samples, table.labels, s, config.eps_mes, config.t, min_rows,
                               config.min_cols, columns=attributes) for s in seeds]
    return bc.integrate_biclusters(grown)


def _full_reduct(table, config):
    attrs = tuple(range(table.n_features))
    ones = PositiveRegion(np.ones(table.n_samples))
    return Reduct(attrs, ones, ones, config.delta, config.beta)


def iterate_feature_selection(table, config=PipelineConfig()):
    """Alternate reduction and biclustering until enough high-support biclusters appear.

    Feedback after a failed iteration excludes the attribute that occurs most
    often in below-threshold biclusters; when that would leave fewer than
    ``min_cols`` attributes, or nothing can be blamed, exclusions are cleared
    and the covering radius moves to the next grid value.
    """
    delta = config.delta
    excluded = []
    relations = {}
    log, results = [], []
    for it in range(config.max_iterations):
        if delta not in relations:
            relations[delta] = CoveringRelations(table, delta, config.beta, config.grid_size_override)
        try:
            reduct = greedy_reduct(table, excluded, delta, config.beta, relations=relations[delta])
        except ReductError as exc:
            rec = IterationRecord(it, delta, [], list(excluded), 0, 0, 0.0, f"reduct failed: {exc}")
            log.append(rec)
            results.append(None)
            excluded, delta = [], config.next_delta(delta)
            continue
        found = _bicluster_pass(table, list(reduct.attributes), config)
        good = [b for b in found if b.support >= config.support_threshold]
        rec = IterationRecord(it, delta, list(reduct.attributes), list(excluded), len(found), len(good),
                              float(np.mean([b.support for b in good])) if good else 0.0)
        log.append(rec)
        results.append((reduct, good))
        if len(good) >= config.min_good_biclusters and _good_classes(good) == {POSITIVE, NEGATIVE}:
            rec.stop_reason = "success"
            break
        counts = {}
        for b in found:
            if b.support < config.support_threshold:
                for c in b.cols:
                    counts[c] = counts.get(c, 0) + 1
        n_admissible = table.n_features - len(excluded)
        if counts and n_admissible - 1 >= config.min_cols:
            worst = min(counts, key=lambda c: (-counts[c], c))
            excluded = sorted(excluded + [worst])
            rec.stop_reason = f"exclude attribute {worst}"
        else:
            old = delta
            excluded, delta = [], config.next_delta(delta)
            rec.stop_reason = f"advance delta {old} -> {delta}"
    else:
        log[-1].stop_reason += "; max_iterations reached"

    scored = [(i, r) for i, r in enumerate(results) if r is not None and r[1]]
    if not scored:
        raise PipelineError("feature_selection", "no iteration produced a bicluster above the support threshold", log)
    if log[-1].stop_reason == "success":
        best = len(results) - 1
    else:
        best = max(scored, key=lambda ir: (log[ir[0]].n_good, log[ir[0]].mean_support, -ir[0]))[0]
    reduct, good = results[best]
    return SelectionResult(reduct, good, log, best)


def select_features(table, config=PipelineConfig(), ablation=Ablation()):
    """Iterative selection, or one biclustering pass over every attribute when FCF is off."""
    if ablation.use_fcf:
        return iterate_feature_selection(table, config)
    reduct = _full_reduct(table, config)
    found = _bicluster_pass(table, list(reduct.attributes), config)
    good = [b for b in found if b.support >= config.support_threshold]
    rec = IterationRecord(0, config.delta, list(reduct.attributes), [], len(found), len(good),
                          float(np.mean([b.support for b in good])) if good else 0.0, "single pass")
    if not good:
        raise PipelineError("biclustering", "no bicluster above the support threshold", [rec])
    return SelectionResult(reduct, good, [rec], 0)


@dataclass(frozen=True)
class FittedModel:
    """Strong classifier plus what is needed to score raw feature rows."""

    strong: StrongClassifier
    attributes: tuple
    feature_names: tuple
    source_ranges: tuple
    positive_label: str = "A"
    negative_label: str = "B"

    def normalize(self, raw):
        return apply_ranges(raw, self.source_ranges)

    def margin(self, samples):
        return decision_margin(self.strong, samples)

    def predict(self, samples):
        return strong_classify(self.strong, samples)

    def to_record(self):
        return {
            "format": "fuzzybic-model/1",
            "feature_names": list(self.feature_names),
            "source_ranges": [list(r) for r in self.source_ranges],
            "positive_label": self.positive_label,
            "negative_label": self.negative_label,
            "attributes": list(self.attributes),
            "strong": self.strong.to_record(),
        }

    @classmethod
    def from_record(cls, rec):
        if rec.get("format") != "fuzzybic-model/1":
            raise ValueError("not a fuzzybic model record")
        return cls(StrongClassifier.from_record(rec["strong"]), tuple(rec["attributes"]),
                   tuple(rec["feature_names"]), tuple(tuple(r) for r in rec["source_ranges"]),
                   rec["positive_label"], rec["negative_label"])

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_record(), fh, indent=1)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_record(json.load(fh))


@dataclass
class TrainResult:
    model: FittedModel
    selection: SelectionResult
    rules: list
    manifest: dict


def train_pipeline(table: FuzzyDecisionTable, config=PipelineConfig(), ablation=Ablation()):
    """Feature selection (or not), rule extraction, weak-classifier pairing, AdaBoost.

    A raw table is min-max scaled first; the fitted model keeps the ranges.
    """
    if not table.normalized:
        table = normalize_minmax(table)
    timings = {}
    t0 = time.perf_counter()
    selection = select_features(table, config, ablation)
    timings["feature_selection"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    rules = [extract_rule(b, harden=not ablation.use_fr) for b in selection.biclusters]
    try:
        pool = build_weak_classifiers(rules, config.pair_cap)
    except RuleError as exc:
        raise PipelineError("rules", str(exc), selection.log) from exc
    timings["rules"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        strong = adaboost_train(pool, table.samples, table.labels, config.rounds_T, config.match_tau)
    except BoostingError as exc:
        raise PipelineError("ensemble", str(exc), selection.log) from exc
    timings["ensemble"] = time.perf_counter() - t0

    model = FittedModel(strong, selection.reduct.attributes, table.feature_names, table.source_ranges,
                        table.positive_label, table.negative_label)
    names = table.feature_names
    manifest = {
        "config": config.to_dict(),
        "ablation": dataclasses.asdict(ablation) | {"name": ablation.name},
        "dataset": table.fingerprint(),
        "iterations": [r.to_dict() for r in selection.log],
        "reduct": {
            "attributes": list(selection.reduct.attributes),
            "features": selection.reduct.feature_names(table),
            "delta": selection.reduct.delta,
            "beta": selection.reduct.beta,
        },
        "biclusters": [b.to_record(names) for b in selection.biclusters],
        "rules": [r.to_record(names) for r in rules],
        "model": model.to_record(),
        "training": {
            "rounds": len(strong.members),
            "error_bound": strong.error_bound(),
            "training_error": float(np.mean(strong_classify(strong, table.samples) != table.labels)),
        },
        "timings": timings,
    }
    return TrainResult(model, selection, rules, manifest)
