import io
import json
import subprocess
import sys

import numpy as np
import pytest

from fuzzybic.cli import EXIT_OK, EXIT_PIPELINE, EXIT_USAGE, run

FAST = {"t": 0.05, "tau": 0.5, "min_rows": 3, "min_good_biclusters": 4, "rounds_T": 8, "max_iterations": 10}


@pytest.fixture
def data(tmp_path):
    rng = np.random.default_rng(0)
    a = 1 + 2.5 * rng.random((20, 3))
    b = 6 + 3 * rng.random((20, 3))
    rows = [list(r) + ["yes"] for r in a] + [list(r) + ["no"] for r in b]
    path = tmp_path / "toy.csv"
    path.write_text("x,y,z,label\n" + "".join(",".join(map(str, r)) + "\n" for r in rows))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(FAST))
    return path, cfg


def call(*argv):
    out = io.StringIO()
    code = run([str(a) for a in argv], stdout=out)
    return code, out.getvalue()


def common(data, tmp_path, *extra):
    path, cfg = data
    return ["--data", path, "--label-col", "label", "--positive", "yes", "--config", cfg, *extra]


def test_crossval_manifest_and_roc(data, tmp_path):
    out = tmp_path / "run"
    roc = tmp_path / "roc.csv"
    code, text = call("crossval", *common(data, tmp_path, "--folds", 4, "--seed", 7, "--out", out, "--roc-out", roc))
    assert code == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["metrics"]["folds"]) == 4
    assert manifest["config"]["seed"] == 7
    assert manifest["metrics"]["means"]["accuracy"] == 1.0
    assert roc.read_text().startswith("fpr,tpr\n")
    assert json.loads(text)["metrics"]["accuracy"] == 1.0


def test_crossval_metrics_are_byte_identical(data, tmp_path):
    sections = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        assert call("crossval", *common(data, tmp_path, "--folds", 3, "--out", out))[0] == EXIT_OK
        sections.append(json.dumps(json.loads((out / "manifest.json").read_text())["metrics"], sort_keys=True))
    assert sections[0] == sections[1]


def test_train_writes_model_and_dumps(data, tmp_path):
    out = tmp_path / "t"
    bic, rules = tmp_path / "b.jsonl", tmp_path / "r.jsonl"
    code, _ = call("train", *common(data, tmp_path, "--out", out, "--no-fcf", "--no-fr",
                                    "--dump-biclusters", bic, "--dump-rules", rules))
    assert code == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["ablation"] == {"use_fcf": False, "use_fr": False, "name": "neither"}
    assert manifest["reduct"]["features"] == ["x", "y", "z"]
    assert (out / "model.json").is_file()
    recs = [json.loads(line) for line in rules.read_text().splitlines()]
    assert recs and all({r["membership_a"], r["membership_b"]} == {0.0, 1.0} for r in recs)
    assert len(bic.read_text().splitlines()) == len(manifest["biclusters"])


def test_dumps_create_missing_directories(data, tmp_path):
    rules = tmp_path / "new" / "dir" / "r.jsonl"
    code, _ = call("train", *common(data, tmp_path, "--no-fcf", "--dump-rules", rules))
    assert code == EXIT_OK and rules.is_file()


def test_reduce_and_bicluster(data, tmp_path):
    code, text = call("reduce", *common(data, tmp_path))
    assert code == EXIT_OK and "reduct" in json.loads(text)
    bic = tmp_path / "b.jsonl"
    code, _ = call("bicluster", *common(data, tmp_path, "--dump-biclusters", bic))
    assert code == EXIT_OK
    first = json.loads(bic.read_text().splitlines()[0])
    assert {"rows", "cols", "representatives", "mes", "support"} <= set(first)


def test_yaml_config_and_flag_precedence(data, tmp_path):
    path, _ = data
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("".join(f"{k}: {v}\n" for k, v in FAST.items()) + "seed: 3\n")
    out = tmp_path / "y"
    code, _ = call("reduce", "--data", path, "--label-col", "label", "--positive", "yes", "--config", cfg,
                   "--seed", 11, "--out", out)
    assert code == EXIT_OK
    assert json.loads((out / "manifest.json").read_text())["config"]["seed"] == 11


def test_ranks(tmp_path):
    table = tmp_path / "scores.csv"
    table.write_text("dataset,good,mid,bad\nd1,0.9,0.8,0.7\nd2,0.95,0.5,0.6\nd3,0.8,0.7,0.6\n")
    code, text = call("ranks", "--scores", table)
    assert code == EXIT_OK
    res = json.loads(text)
    assert res["average_ranks"]["good"] == 1.0 and res["order"][0] == "good"


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["train"],
    ["train", "--data", "nope.csv"],
    ["train", "--data", "{data}", "--bogus"],
    ["crossval", "--data", "{data}", "--label-col", "label", "--folds", "1"],
    ["crossval", "--data", "{data}", "--label-col", "label", "--folds", "50"],
    ["train", "--data", "{data}", "--label-col", "x"],
    ["train", "--data", "{data}", "--label-col", "label", "--config", "missing.json"],
    ["train", "--data", "{data}", "--label-col", "label", "--config", "{badcfg}"],
    ["train", "--data", "{data}", "--label-col", "label", "--seed", "abc"],
    ["ranks", "--scores", "missing.csv"],
])
def test_usage_errors_exit_1(argv, data, tmp_path, capsys):
    badcfg = tmp_path / "bad.json"
    badcfg.write_text('{"delta": 3}')
    argv = [a.format(data=data[0], badcfg=badcfg) for a in argv]
    assert call(*argv)[0] == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_pipeline_failure_exit_2_writes_log(data, tmp_path):
    path, _ = data
    cfg = tmp_path / "strict.json"
    cfg.write_text(json.dumps({"t": 0.5, "min_rows": 40, "support_threshold": 1.0, "max_iterations": 2}))
    out = tmp_path / "fail"
    code, _ = call("train", "--data", path, "--label-col", "label", "--config", cfg, "--out", out)
    assert code == EXIT_PIPELINE
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["error"]["stage"] == "feature_selection"
    assert len(manifest["iterations"]) == 2


def test_console_entry_point(tmp_path):
    table = tmp_path / "s.csv"
    table.write_text("dataset,a,b\nd1,1,0\n")
    proc = subprocess.run([sys.executable, "-m", "fuzzybic.cli", "ranks", "--scores", str(table)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["average_ranks"] == {"a": 1.0, "b": 2.0}
    proc = subprocess.run([sys.executable, "-m", "fuzzybic.cli", "nope"], capture_output=True, text=True)
    assert proc.returncode == 1
