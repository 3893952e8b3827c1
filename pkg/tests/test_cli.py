import json
import os

import numpy as np
import pytest

from qsmote.cli import main
from qsmote.dataio import load_csv


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def data_csv(tmp_path):
    path = tmp_path / "data.csv"
    code = run("gen", "--out", path, "--n-majority", 60, "--n-minority", 12,
               "--n-features", 3, "--seed", 5)
    assert code == 0
    return path


def test_gen_writes_loadable_csv(data_csv):
    d = load_csv(data_csv)
    assert d.class_counts() == {0: 60, 1: 12}


def test_gen_custom_means(tmp_path):
    path = tmp_path / "d.csv"
    assert run(
        "gen", "--out", path, "--n-majority", 5, "--n-minority", 5,
        "--n-features", 2, "--mean-majority", "0,0", "--mean-minority", "9,9",
        "--scale-majority", "0,0", "--scale-minority", "0,0",
    ) == 0
    d = load_csv(path)
    assert np.all(d.features[d.labels == 1] == 9.0)


def test_commands_are_byte_deterministic(tmp_path, data_csv):
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    for out in (out1, out2):
        assert run("resample", data_csv, "--method", "qi_smote", "--out", out,
                   "--seed", 7, "--report", str(out) + ".report.json") == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert (tmp_path / "r1.csv.provenance.json").read_bytes() == \
        (tmp_path / "r2.csv.provenance.json").read_bytes()
    r1 = (tmp_path / "r1.csv.report.json").read_text()
    r2 = (tmp_path / "r2.csv.report.json").read_text()
    assert r1.replace("r1.csv", "X") == r2.replace("r2.csv", "X")


def test_resample_each_classical_method(tmp_path, data_csv):
    for method in ("smote", "borderline_smote", "adasyn", "ros", "rus",
                   "smote_enn", "smote_tomek"):
        out = tmp_path / f"{method}.csv"
        assert run("resample", data_csv, "--method", method, "--out", out, "--seed", 3) == 0
        assert out.exists()


def test_imbalance_command(tmp_path, data_csv, capsys):
    variant = tmp_path / "ir10.csv"
    assert run("imbalance", data_csv, "--ir", 10, "--out", variant, "--seed", 2) == 0
    d = load_csv(variant)
    assert d.class_counts() == {0: 60, 1: 6}  # floor(60/10)
    text = capsys.readouterr().out
    assert "variant" in text


def test_evaluate_reports_split_mode(tmp_path, data_csv, capsys):
    report = tmp_path / "eval.json"
    assert run("evaluate", data_csv, "--method", "smote", "--classifier", "knn",
               "--folds", 3, "--seed", 1, "--report", report) == 0
    out = capsys.readouterr().out
    assert "cross_validation" in out
    doc = json.loads(report.read_text())
    assert doc["config"]["split_mode"] == "cross_validation"
    assert len(doc["result"]["fold_metrics"]["f1"]) == 3


def test_evaluate_holdout_mode(data_csv, capsys):
    assert run("evaluate", data_csv, "--method", "none", "--test-fraction", 0.25) == 0
    assert "holdout" in capsys.readouterr().out


def test_compare_grid_recomputes_from_fold_report(tmp_path, data_csv):
    grid = tmp_path / "grid.csv"
    folds = tmp_path / "folds.json"
    assert run("compare", data_csv, "--methods", "smote,ros", "--folds", 3,
               "--seed", 4, "--out", grid, "--fold-report", folds) == 0
    doc = json.loads(folds.read_text())
    lines = grid.read_text().splitlines()
    header = lines[0].split(",")
    for line in lines[1:]:
        cells = line.split(",")
        name = cells[0]
        for metric, cell in zip(header[1:], cells[1:]):
            folds_values = doc[name]["fold_metrics"][metric]
            assert float(cell) == np.mean(folds_values)  # exact recomputation


def test_wilcoxon_on_shipped_fixture(capsys):
    fixture = os.path.join(os.path.dirname(__file__), "..", "data", "fold_scores_example.csv")
    assert run("wilcoxon", fixture, "--format", "json") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["w_plus"] == 55.0
    assert doc["w"] == 0.0
    assert doc["p_exact"] == 0.001953125


def test_improve_command(tmp_path, capsys):
    base = tmp_path / "base.csv"
    tech = tmp_path / "tech.csv"
    base.write_text("ds1,ds2\n0.677,0.572\n")
    tech.write_text("technique,ds1,ds2\nqi_smote,0.759,0.711\nsmote,0.696,0.629\n")
    out = tmp_path / "improve.csv"
    assert run("improve", "--baseline", base, "--techniques", tech, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "technique,ds1,ds2"
    row = dict(zip(("technique", "ds1", "ds2"), lines[1].split(",")))
    assert float(row["ds1"]) == pytest.approx(12.11, abs=0.05)
    assert float(row["ds2"]) == pytest.approx(24.3, abs=0.05)


def test_bench_command(tmp_path, capsys):
    out_dir = tmp_path / "bench"
    assert run("bench", "--out-dir", out_dir, "--n-majority", 60, "--n-minority", 10,
               "--target", 10, "--vqe-iters", 25, "--seed", 3) == 0
    assert (out_dir / "bench_smote.csv").exists()
    assert (out_dir / "bench_qi_smote.csv").exists()
    table = capsys.readouterr().out
    assert "qi_smote" in table and "seconds" in table


def test_scatter_with_provenance(tmp_path, data_csv):
    res = tmp_path / "res.csv"
    assert run("resample", data_csv, "--method", "smote", "--out", res, "--seed", 1) == 0
    plot = tmp_path / "plot.csv"
    svg = tmp_path / "plot.svg"
    assert run("scatter", res, "--dims", "0,1", "--out", plot, "--svg", svg,
               "--provenance", str(res) + ".provenance.json") == 0
    lines = plot.read_text().splitlines()
    assert lines[0].endswith("label,origin")
    assert sum(1 for line in lines if line.endswith(",synthetic")) == 48  # 60-12
    assert svg.exists()


def test_usage_error_exits_one(capsys):
    assert run("resample", "--definitely-not-a-flag") == 1
    assert run("no_such_command") == 1


def test_data_error_exits_two(tmp_path):
    assert run("imbalance", tmp_path / "missing.csv") == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("a,label\nnot_a_number,1\n")
    assert run("imbalance", bad) == 2


def test_gen_rejects_one_sided_mean_flags(tmp_path):
    assert run("gen", "--out", tmp_path / "x.csv", "--n-features", 2,
               "--mean-majority", "0,0") == 2


def test_config_file_supplies_defaults(tmp_path, data_csv):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("method=smote\nseed=9\n# comment line\n")
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert run("resample", data_csv, "--config", cfg, "--out", out_a) == 0
    assert run("resample", data_csv, "--method", "smote", "--seed", 9, "--out", out_b) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    # explicit flags beat config values
    out_c = tmp_path / "c.csv"
    assert run("resample", data_csv, "--config", cfg, "--method", "ros", "--out", out_c) == 0
    sidecar = json.loads((tmp_path / "c.csv.provenance.json").read_text())
    assert sidecar["method"] == "ros"


def test_env_seed_default(tmp_path, data_csv, monkeypatch):
    out_env = tmp_path / "env.csv"
    out_flag = tmp_path / "flag.csv"
    monkeypatch.setenv("QSMOTE_SEED", "31")
    assert run("resample", data_csv, "--method", "smote", "--out", out_env) == 0
    monkeypatch.delenv("QSMOTE_SEED")
    assert run("resample", data_csv, "--method", "smote", "--seed", 31, "--out", out_flag) == 0
    assert out_env.read_bytes() == out_flag.read_bytes()


def test_version_flag(capsys):
    assert run("--version") == 0
    assert "qsmote" in capsys.readouterr().out
