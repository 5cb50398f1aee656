"""Command-line workflows end to end: toy runs, CSV adaptation, grid
sweeps, model re-scoring, exit codes."""

import csv
import json
import math

import numpy as np
import pytest

from jdot.cli import main
from jdot.cost import feature_distance_matrix, heuristic_alpha
from jdot.datasets import gen_1d_regression_shift, load_csv, save_csv
from jdot.learners import load_predictor, predict
from jdot.metrics import mse


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def canonical(report):
    trimmed = dict(report)
    trimmed.pop("timing", None)
    return json.dumps(trimmed, sort_keys=True)


def write_pair(tmp_path, n=24, seed=3):
    src, tgt = gen_1d_regression_shift(n, seed=seed)
    s_path = tmp_path / "source.csv"
    t_path = tmp_path / "target.csv"
    save_csv(src, s_path)
    save_csv(tgt, t_path)
    return s_path, t_path


def test_toy_classification_series_shape(tmp_path):
    out = tmp_path / "toy"
    rc = main(
        [
            "toy",
            "rotated-gaussians",
            "--alpha",
            "0.5,1,10",
            "--iters",
            "4",
            "--n-per-class",
            "8",
            "--seed",
            "2",
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    with open(out / "series.csv", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["alpha", "iteration", "accuracy", "objective"]
    assert len(rows) == 1 + 3 * 4
    labels = sorted({r[0] for r in rows[1:]})
    assert labels == ["0.5", "1", "10"]
    # every alpha contributes one row per requested iteration
    for label in labels:
        iters = [int(r[1]) for r in rows[1:] if r[0] == label]
        assert iters == [1, 2, 3, 4]

    report = read_json(out / "report.json")
    assert report["command"] == "toy"
    assert len(report["runs"]) == 3
    assert (out / "baseline_model.json").exists()
    for label in labels:
        assert (out / f"model_alpha_{label}.json").exists()
    for run in report["runs"]:
        assert run["alpha_resolved"] > 0.0
        assert len(run["trace"]) == 2 * run["n_iterations"]


def test_toy_regression_beats_source_fit(tmp_path):
    out = tmp_path / "toy-reg"
    rc = main(["toy", "regression-1d", "--seed", "1", "--out", str(out)])
    assert rc == 0
    report = read_json(out / "report.json")
    assert report["jdot_mse"] < report["baseline_mse"]
    assert report["config"]["n"] == 120
    assert abs(report["config"]["shift"] - math.pi) <= 1e-15


def test_toy_alpha_ordering_on_default_seed(tmp_path):
    out = tmp_path / "toy-alpha"
    rc = main(
        [
            "toy",
            "rotated-gaussians",
            "--alpha",
            "0.1,1",
            "--iters",
            "10",
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    report = read_json(out / "report.json")
    by_label = {run["alpha"]: run for run in report["runs"]}
    assert by_label["1"]["final_accuracy"] >= by_label["0.1"]["final_accuracy"]


def test_toy_reports_are_deterministic(tmp_path):
    args = [
        "toy",
        "regression-1d",
        "--n",
        "30",
        "--alpha",
        "1",
        "--iters",
        "4",
        "--seed",
        "9",
    ]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    r1, r2 = read_json(out1 / "report.json"), read_json(out2 / "report.json")
    # identical flags and seed give identical reports up to wall time
    assert canonical(r1) == canonical(r2)
    assert (out1 / "series.csv").read_bytes() == (out2 / "series.csv").read_bytes()
    assert (out1 / "source.csv").read_bytes() == (out2 / "source.csv").read_bytes()
    for name in ("baseline_model.json", "model_alpha_1.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_adapt_identical_files_never_hurts(tmp_path):
    # identical domains with well-separated inputs: there is nothing to
    # adapt, so the adapted model must match the source-only baseline
    from jdot.datasets import LabeledDataset

    x = np.linspace(-1.5, 1.5, 25).reshape(-1, 1)
    grid = LabeledDataset(X=x, y=np.sin(x[:, 0]).reshape(-1, 1))
    s_path = tmp_path / "grid.csv"
    save_csv(grid, s_path)
    out = tmp_path / "adapt-same"
    rc = main(["adapt", str(s_path), str(s_path), "--task", "regression", "--out", str(out)])
    assert rc == 0
    report = read_json(out / "report.json")
    jdot_mse = report["metrics"]["jdot"]["mse"]
    base_mse = report["metrics"]["baseline"]["mse"]
    assert jdot_mse <= base_mse + 1e-9


def test_adapt_heuristic_alpha_echoes_oracle(tmp_path):
    s_path, t_path = write_pair(tmp_path, n=20, seed=5)
    out = tmp_path / "adapt"
    rc = main(
        ["adapt", str(s_path), str(t_path), "--task", "regression",
         "--iters", "3", "--out", str(out)]
    )
    assert rc == 0
    report = read_json(out / "report.json")
    src = load_csv(s_path)
    tgt = load_csv(t_path)
    want = heuristic_alpha(feature_distance_matrix(src.X, tgt.X))
    assert abs(report["resolved"]["alpha"] - want) <= 1e-12
    # trace file carries one record per half-step
    lines = (out / "trace.jsonl").read_text().strip().split("\n")
    assert len(lines) == 2 * report["n_iterations"]
    assert json.loads(lines[0])["phase"] == "ot"


def test_adapt_report_is_self_contained(tmp_path):
    s_path, t_path = write_pair(tmp_path, n=22, seed=7)
    out = tmp_path / "adapt-sc"
    rc = main(
        ["adapt", str(s_path), str(t_path), "--task", "regression",
         "--iters", "4", "--out", str(out)]
    )
    assert rc == 0
    report = read_json(out / "report.json")
    # reloading the serialized predictor and the data file reproduces
    # the reported metric
    model = load_predictor(out / "model.json")
    tgt = load_csv(t_path)
    again = mse(tgt.y, predict(model, tgt.X))
    assert abs(again - report["metrics"]["jdot"]["mse"]) <= 1e-12


def test_eval_reproduces_adapt_metrics(tmp_path, capsys):
    s_path, t_path = write_pair(tmp_path, n=22, seed=11)
    out = tmp_path / "adapt-ev"
    assert main(
        ["adapt", str(s_path), str(t_path), "--task", "regression",
         "--iters", "3", "--out", str(out)]
    ) == 0
    capsys.readouterr()
    report = read_json(out / "report.json")
    rc = main(
        [
            "eval",
            "--model",
            str(out / "model.json"),
            "--data",
            str(t_path),
            "--out",
            str(tmp_path / "eval.json"),
        ]
    )
    assert rc == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["metrics"]["mse"] == report["metrics"]["jdot"]["mse"]
    saved = read_json(tmp_path / "eval.json")
    assert saved == printed


def test_sweep_single_cell_matches_adapt(tmp_path):
    s_path, t_path = write_pair(tmp_path, n=20, seed=13)
    out_adapt = tmp_path / "adapt-ref"
    assert main(
        [
            "adapt",
            str(s_path),
            str(t_path),
            "--task",
            "regression",
            "--alpha",
            "0.5",
            "--iters",
            "4",
            "--out",
            str(out_adapt),
        ]
    ) == 0
    sweep_csv = tmp_path / "sweep.csv"
    assert main(
        [
            "sweep",
            "--source",
            str(s_path),
            "--target",
            str(t_path),
            "--alpha",
            "0.5",
            "--iters",
            "4",
            "--out",
            str(sweep_csv),
        ]
    ) == 0
    with open(sweep_csv, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    row = rows[0]
    assert row["status"] == "ok"
    assert row["metric_name"] == "mse"
    report = read_json(out_adapt / "report.json")
    assert float(row["metric"]) == report["metrics"]["jdot"]["mse"]


def test_sweep_grid_rows_and_duplicates(tmp_path):
    s_path, t_path = write_pair(tmp_path, n=16, seed=17)
    sweep_csv = tmp_path / "grid.csv"
    rc = main(
        [
            "sweep",
            "--source",
            str(s_path),
            "--target",
            str(t_path),
            "--alpha",
            "0.1,0.5,1,2,5,10",
            "--iters",
            "2",
            "--out",
            str(sweep_csv),
        ]
    )
    assert rc == 0
    with open(sweep_csv, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6
    assert all(r["status"] == "ok" for r in rows)

    dup_csv = tmp_path / "dup.csv"
    assert main(
        [
            "sweep",
            "--source",
            str(s_path),
            "--target",
            str(t_path),
            "--alpha",
            "0.5,0.5",
            "--iters",
            "2",
            "--out",
            str(dup_csv),
        ]
    ) == 0
    with open(dup_csv, encoding="utf-8", newline="") as fh:
        dup_rows = list(csv.DictReader(fh))
    assert len(dup_rows) == 2
    assert dup_rows[0]["metric"] == dup_rows[1]["metric"]


def test_sweep_cell_failure_stays_in_row(tmp_path):
    s_path, t_path = write_pair(tmp_path, n=14, seed=19)
    sweep_csv = tmp_path / "fail.csv"
    rc = main(
        [
            "sweep",
            "--source",
            str(s_path),
            "--target",
            str(t_path),
            "--alpha",
            "0.5",
            "--lambda-grid",
            "0.01,-1.0",
            "--iters",
            "2",
            "--out",
            str(sweep_csv),
        ]
    )
    # the sweep itself succeeds; the bad cell is recorded in its row
    assert rc == 0
    with open(sweep_csv, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert rows[0]["status"] == "ok"
    assert rows[1]["status"] == "error"
    assert rows[1]["error"] != ""
    assert rows[1]["metric"] == ""


def test_sweep_toy_entropic_grid(tmp_path):
    sweep_csv = tmp_path / "ent.csv"
    rc = main(
        [
            "sweep",
            "--toy",
            "regression-1d",
            "--n",
            "20",
            "--alpha",
            "1",
            "--ot",
            "entropic",
            "--epsilon-grid",
            "0.05,0.2",
            "--iters",
            "2",
            "--out",
            str(sweep_csv),
        ]
    )
    assert rc == 0
    with open(sweep_csv, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["epsilon"] for r in rows] == ["0.05", "0.2"]
    assert all(r["ot"] == "entropic" for r in rows)


def test_exit_codes(tmp_path):
    # usage errors come from the argument parser
    with pytest.raises(SystemExit) as exc:
        main(["toy", "unknown-kind"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2

    # data problems exit 3
    assert main(["adapt", str(tmp_path / "no.csv"), str(tmp_path / "no.csv"),
                 "--task", "regression"]) == 3

    s_path, t_path = write_pair(tmp_path, n=12, seed=23)
    unlabeled = tmp_path / "unlabeled.csv"
    unlabeled.write_text("f0\n1.0\n2.0\n")
    rc = main(
        ["adapt", str(unlabeled), str(t_path), "--task", "classification"]
    )
    assert rc == 3

    # malformed --ot values are data errors too
    assert main(
        ["adapt", str(s_path), str(t_path), "--task", "regression",
         "--ot", "entropic:oops"]
    ) == 3
    assert main(
        ["adapt", str(s_path), str(t_path), "--task", "regression",
         "--ot", "entropic:-0.5"]
    ) == 3
    assert main(
        [
            "sweep",
            "--source",
            str(s_path),
            "--target",
            str(t_path),
            "--epsilon-grid",
            "0.1",
            "--out",
            str(tmp_path / "x.csv"),
        ]
    ) == 3
    assert main(["sweep", "--out", str(tmp_path / "y.csv")]) == 3
    assert main(["eval", "--model", str(tmp_path / "no-model.json"),
                 "--data", str(t_path)]) == 3
