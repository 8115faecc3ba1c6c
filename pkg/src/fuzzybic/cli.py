"""Command-line driver: ``fuzzybic {reduce,bicluster,train,crossval,ranks}``.

Exit status 0 on success, 1 on usage or input errors, 2 when a pipeline stage
fails (a best-effort manifest with the iteration log is still written).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import DataError, load_table, normalize_minmax, stratified_folds
from .evaluation import cross_validate, friedman_ranks
from .pipeline import (
    Ablation,
    PipelineConfig,
    PipelineError,
    select_features,
    train_pipeline,
)

EXIT_OK, EXIT_USAGE, EXIT_PIPELINE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _label_col(text):
    try:
        return int(text)
    except ValueError:
        return text


def build_parser():
    parser = _Parser(prog="fuzzybic", description="Fuzzy rule-based binary classification.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    data = _Parser(add_help=False)
    data.add_argument("--data", required=True, help="delimited data file")
    data.add_argument("--label-col", type=_label_col, default=-1, help="label column name or index (default: last)")
    data.add_argument("--positive", help="label value treated as class A (default: first seen)")
    data.add_argument("--config", help="JSON or YAML file with PipelineConfig fields")
    data.add_argument("--out", help="output directory for the run manifest")
    data.add_argument("--seed", type=int, help="overrides the config seed")
    data.add_argument("--no-fcf", action="store_true", help="skip feature selection, use every attribute")
    data.add_argument("--no-fr", action="store_true", help="crisp (0/1) rule memberships")

    dumps = _Parser(add_help=False)
    dumps.add_argument("--dump-biclusters", help="write biclusters as JSON lines")
    dumps.add_argument("--dump-rules", help="write rules as JSON lines")

    sub.add_parser("reduce", parents=[data], help="feature selection only")
    sub.add_parser("bicluster", parents=[data, dumps], help="feature selection and biclustering")
    sub.add_parser("train", parents=[data, dumps], help="full pipeline and model export")
    cv = sub.add_parser("crossval", parents=[data], help="stratified k-fold report")
    cv.add_argument("--folds", type=int, default=10)
    cv.add_argument("--roc-out", help="write pooled ROC points as CSV")
    cv.add_argument("--workers", type=int, default=1, help="folds evaluated in parallel")
    ranks = sub.add_parser("ranks", help="Friedman average ranks of a score table")
    ranks.add_argument("--scores", required=True,
                       help="CSV: header 'dataset,<method>,...', one row per dataset, higher is better")
    ranks.add_argument("--out", help="output directory")
    return parser


def read_config(path):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {path}")
    text = p.read_text(encoding="utf-8")
    try:
        if p.suffix.lower() in (".yaml", ".yml"):
            import yaml

            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
    except Exception as exc:  # parse errors from either format
        raise UsageError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a flat key-value mapping")
    return data


def resolve_config(args):
    values = read_config(args.config) if args.config else {}
    if args.seed is not None:
        values["seed"] = args.seed
    try:
        return PipelineConfig.from_dict(values)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config: {exc}") from exc


def _dumps(obj):
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=False)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _write_manifest(out, manifest, name="manifest.json"):
    if not out:
        return None
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    path = d / name
    path.write_text(_dumps(_jsonable(manifest)) + "\n", encoding="utf-8")
    return path


def _write_lines(path, records):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(_jsonable(rec), sort_keys=True) + "\n")


def _base_manifest(args, config, ablation, table):
    return {
        "command": args.command,
        "version": __version__,
        "config": config.to_dict(),
        "ablation": {"use_fcf": ablation.use_fcf, "use_fr": ablation.use_fr, "name": ablation.name},
        "dataset": {"path": str(args.data), **table.fingerprint()},
    }


def cmd_reduce_or_bicluster(args, config, ablation, table, manifest):
    t0 = time.perf_counter()
    sel = select_features(table, config, ablation)
    manifest["iterations"] = [r.to_dict() for r in sel.log]
    manifest["reduct"] = {"attributes": list(sel.reduct.attributes), "features": sel.reduct.feature_names(table),
                          "delta": sel.reduct.delta}
    if args.command == "bicluster":
        from .rules import extract_rule

        names = table.feature_names
        manifest["biclusters"] = [b.to_record(names) for b in sel.biclusters]
        rules = [extract_rule(b, harden=not ablation.use_fr).to_record(names) for b in sel.biclusters]
        manifest["rules"] = rules
        if args.dump_biclusters:
            _write_lines(args.dump_biclusters, manifest["biclusters"])
        if args.dump_rules:
            _write_lines(args.dump_rules, rules)
    manifest["timings"] = {"total": time.perf_counter() - t0}
    return manifest


def cmd_train(args, config, ablation, table, manifest):
    result = train_pipeline(table, config, ablation)
    manifest.update({k: v for k, v in result.manifest.items() if k not in ("config", "ablation", "dataset")})
    if args.dump_biclusters:
        _write_lines(args.dump_biclusters, result.manifest["biclusters"])
    if args.dump_rules:
        _write_lines(args.dump_rules, result.manifest["rules"])
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        result.model.save(Path(args.out) / "model.json")
    return manifest


def cmd_crossval(args, config, ablation, table, manifest):
    if args.folds < 2:
        raise UsageError("--folds must be >= 2")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    try:
        plan = stratified_folds(table, args.folds, config.seed)
    except DataError as exc:
        raise UsageError(str(exc)) from exc
    t0 = time.perf_counter()
    report = cross_validate(table, config, ablation, plan, workers=args.workers)
    manifest["folds"] = {"k": args.folds, "seed": config.seed}
    manifest["metrics"] = report.metrics_section()
    manifest["timings"] = {"total": time.perf_counter() - t0}
    if args.roc_out and report.roc is not None:
        Path(args.roc_out).parent.mkdir(parents=True, exist_ok=True)
        report.roc.write_csv(args.roc_out)
    if report.n_failed == len(report.folds):
        raise PipelineError("crossval", "every fold failed", [])
    return manifest


def read_score_table(path):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"score table not found: {path}")
    with open(p, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2 or len(rows[0]) < 3:
        raise UsageError("score table needs a header with >= 2 methods and >= 1 dataset row")
    methods = [m.strip() for m in rows[0][1:]]
    try:
        scores = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    except ValueError as exc:
        raise UsageError(f"non-numeric score in {path}: {exc}") from exc
    if scores.shape[1] != len(methods):
        raise UsageError("every score row needs one value per method")
    return methods, [r[0] for r in rows[1:]], scores.T


def cmd_ranks(args):
    methods, datasets, scores = read_score_table(args.scores)
    res = friedman_ranks(scores, methods)
    manifest = {
        "command": "ranks",
        "datasets": datasets,
        "average_ranks": res.average_ranks,
        "chi_square": res.chi_square,
        "order": sorted(methods, key=lambda m: (res.average_ranks[m], methods.index(m))),
    }
    return manifest


def run(argv=None, stdout=None):
    """Parse ``argv``, run the command and return the exit status."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: reduce, bicluster, train, crossval or ranks")
        if args.command == "ranks":
            manifest = cmd_ranks(args)
            _write_manifest(args.out, manifest, "ranks.json")
            stdout.write(_dumps(manifest) + "\n")
            return EXIT_OK
        config = resolve_config(args)
        ablation = Ablation(use_fcf=not args.no_fcf, use_fr=not args.no_fr)
        try:
            table = load_table(args.data, args.label_col, args.positive)
        except DataError as exc:
            raise UsageError(str(exc)) from exc
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.command != "crossval":
        table = normalize_minmax(table)
    manifest = _base_manifest(args, config, ablation, table)
    handlers = {"reduce": cmd_reduce_or_bicluster, "bicluster": cmd_reduce_or_bicluster,
                "train": cmd_train, "crossval": cmd_crossval}
    try:
        manifest = handlers[args.command](args, config, ablation, table, manifest)
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as exc:
        manifest["error"] = {"stage": exc.stage, "message": str(exc)}
        manifest.setdefault("iterations", [r.to_dict() for r in exc.log])
        _write_manifest(args.out, manifest)
        print(f"pipeline failure: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    _write_manifest(args.out, manifest)
    if "metrics" in manifest:
        _write_manifest(args.out, manifest["metrics"], "metrics.json")
    summary = {"command": args.command}
    if "metrics" in manifest:
        summary["metrics"] = manifest["metrics"]["means"]
        summary["pooled_auc"] = manifest["metrics"]["pooled_auc"]
    if "training" in manifest:
        summary["training"] = manifest["training"]
    if "reduct" in manifest:
        summary["reduct"] = manifest["reduct"]["features"]
    stdout.write(_dumps(_jsonable(summary)) + "\n")
    return EXIT_OK


def main():
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    main()
