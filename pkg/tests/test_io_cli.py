import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nslearn.cli import main
from nslearn.core import Orientation, Panel
from nslearn.exceptions import MissingFile, NonNumericCell, RaggedRows, TooShort
from nslearn.experiments import (
    COMPARISON_JSON_SCHEMA,
    REPORT_JSON_SCHEMA,
    evaluation_report,
    run_dataset_experiment,
)
from nslearn.functionals import per_series_means_panel
from nslearn.io import IngestSpec, build_lag_design, emit_csv, ingest_csv, own_lag_columns


def write(path, text):
    path.write_text(text)
    return str(path)


def test_ingest_small_csv(tmp_path):
    f = write(tmp_path / "y.csv", "a,b\n1,2\n3,4\n5,6.5\n")
    P = ingest_csv(IngestSpec(f, "rows"))
    assert P.orientation is Orientation.ROWS and P.values.shape == (3, 2)
    np.testing.assert_array_equal(P.values[2], [5.0, 6.5])


def test_ingest_drops_time_column(tmp_path):
    f = write(tmp_path / "y.csv", "date,a,b\n2000-01-01,1,2\n2000-01-02,3,4\n")
    P = ingest_csv(IngestSpec(f, "rows", time_column="date"))
    np.testing.assert_array_equal(P.values, [[1.0, 2.0], [3.0, 4.0]])


def test_ingest_errors(tmp_path):
    with pytest.raises(MissingFile):
        ingest_csv(IngestSpec(str(tmp_path / "nope.csv")))
    f = write(tmp_path / "gap.csv", "a,b\n1,2\n3,\n")
    with pytest.raises(NonNumericCell) as info:
        ingest_csv(IngestSpec(f))
    assert (info.value.row, info.value.col) == (1, 1)
    f = write(tmp_path / "text.csv", "a,b\n1,x\n")
    with pytest.raises(NonNumericCell):
        ingest_csv(IngestSpec(f))
    f = write(tmp_path / "ragged.csv", "a,b\n1,2\n3\n")
    with pytest.raises(RaggedRows):
        ingest_csv(IngestSpec(f))


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 4)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_emit_ingest_round_trip(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "p.csv"
    P = Panel(values, Orientation.COLUMNS)
    emit_csv(P, path)
    back = ingest_csv(IngestSpec(str(path), "columns"))
    assert np.array_equal(back.values, P.values)


def test_lag_design_ten_series_two_lags():
    Y = Panel(np.random.default_rng(0).normal(size=(7305, 10)), Orientation.ROWS)
    design, resp = build_lag_design(Y, 2)
    assert design.p == 20 and design.n_obs == 7303 and resp.n_series == 7303


def test_lag_design_hand_shift():
    Y = Panel(np.array([[1.0], [2.0], [3.0]]), Orientation.ROWS)
    design, resp = build_lag_design(Y, 1)
    np.testing.assert_array_equal(design.predictors, [[1.0], [2.0]])
    np.testing.assert_array_equal(resp.values, [[2.0], [3.0]])


def test_lag_design_ordering_and_edges():
    V = np.arange(12.0).reshape(4, 3)
    design, resp = build_lag_design(Panel(V, Orientation.ROWS), 2)
    # lag-major: lag 1 of every series, then lag 2
    np.testing.assert_array_equal(design.predictors[0], [3.0, 4.0, 5.0, 0.0, 1.0, 2.0])
    assert own_lag_columns(1, 3, 2) == [1, 4]
    d0, r0 = build_lag_design(Panel(V, Orientation.ROWS), 0)
    assert d0.p == 0 and np.array_equal(r0.values, V)
    with pytest.raises(TooShort):
        build_lag_design(Panel(V, Orientation.ROWS), 4)


def test_evaluation_report_examples(toy):
    report = evaluation_report(per_series_means_panel(toy), toy)
    jsonschema.validate(report, REPORT_JSON_SCHEMA)
    assert report["realized_ns"] == 1.0 and report["skill_vs_series_means"] == 0.0
    perfect = evaluation_report(toy, toy)
    assert perfect["realized_ns"] == 0.0 and perfect["realized_nse"] == 1.0


@given(st.integers(0, 2**32 - 1))
def test_report_nse_identity(seed):
    rng = np.random.default_rng(seed)
    Y = Panel(rng.normal(size=(5, 8)), Orientation.COLUMNS)
    Z = Panel(rng.normal(size=(5, 8)), Orientation.COLUMNS)
    r = evaluation_report(Z, Y)
    assert abs(r["realized_nse"] - (1 - r["realized_ns"])) <= 1e-12


@pytest.fixture
def flow_csv(tmp_path):
    rng = np.random.default_rng(3)
    n, d = 300, 4
    V = np.zeros((n, d))
    V[0] = 1.0
    for t in range(1, n):
        V[t] = 0.6 * V[t - 1] + rng.gamma(2.0, size=d) * np.arange(1, d + 1)
    lines = ["date," + ",".join(f"g{j}" for j in range(d))]
    lines += [f"{t}," + ",".join(repr(float(v)) for v in row) for t, row in enumerate(V)]
    return write(tmp_path / "flow.csv", "\n".join(lines) + "\n")


def test_dataset_experiment_methods(flow_csv):
    Y = ingest_csv(IngestSpec(flow_csv, "rows", time_column="date"))
    doc = run_dataset_experiment(Y, lags=2, boundary=200)
    jsonschema.validate(doc, COMPARISON_JSON_SCHEMA)
    assert doc["methods"] == ["ols1d", "multiols", "nsreg"]
    assert doc["dims"] == {"d": 4, "n": 298, "p": 8, "lags": 2, "n_train": 200, "n_test": 98}
    train = doc["blocks"]["train"]
    assert train["multiols"]["realized_en"] <= train["nsreg"]["realized_en"]
    assert train["nsreg"]["realized_ns"] <= train["multiols"]["realized_ns"]


def test_cli_fit_predict_eval(flow_csv, tmp_path, capsys):
    fit_path = tmp_path / "fit.json"
    common = ["--orientation", "rows", "--time-column", "date"]
    assert main(["fit", "--data", flow_csv, "--method", "nsreg", "--lags", "2",
                 "--split", "150", "--out", str(fit_path)] + common) == 0
    assert "train realized NS loss" in capsys.readouterr().err
    doc = json.loads(fit_path.read_text())
    assert doc["p"] == 8 and doc["d"] == 4 and len(doc["theta"]) == 4 and doc["n_train"] == 150
    pred = tmp_path / "pred.csv"
    assert main(["predict", "--fit", str(fit_path), "--data", flow_csv, "--out", str(pred)] + common) == 0
    assert len(pred.read_text().splitlines()) == 1 + 298
    report_path = tmp_path / "r.json"
    assert main(["eval", "--obs", flow_csv, "--fit", str(fit_path), "--split", "150",
                 "--out", str(report_path)] + common) == 0
    report = json.loads(report_path.read_text())
    jsonschema.validate(report, REPORT_JSON_SCHEMA)
    assert report["dims"]["n"] == 148 and report["method"] == "nsreg"


def test_cli_ols1d_uses_own_lags(flow_csv, tmp_path):
    out = tmp_path / "f.json"
    assert main(["fit", "--data", flow_csv, "--method", "ols1d", "--lags", "2", "--orientation",
                 "rows", "--time-column", "date", "--out", str(out)]) == 0
    A = np.array(json.loads(out.read_text())["theta"])[:, :-1]
    for j in range(4):
        assert set(np.flatnonzero(A[j])) <= set(own_lag_columns(j, 4, 2))


def test_cli_eval_prediction_files(tmp_path):
    obs = write(tmp_path / "obs.csv", "s0,s1\n1,0\n3,4\n")
    pred = write(tmp_path / "pred.csv", "s0,s1\n2,2\n2,2\n")
    out = tmp_path / "r.json"
    assert main(["eval", "--obs", obs, "--pred", pred, "--orientation", "columns",
                 "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["realized_ns"] == 1.0 and report["skill_vs_series_means"] == 0.0
    np.testing.assert_allclose(report["identification_ns"], [0.375, -0.375])


def test_cli_eval_zero_variance(tmp_path, capsys):
    obs = write(tmp_path / "obs.csv", "s0,s1\n1,5\n3,5\n")
    assert main(["eval", "--obs", obs, "--pred", obs, "--orientation", "columns"]) == 1
    assert "indices [1]" in capsys.readouterr().err
    assert main(["eval", "--obs", obs, "--pred", obs, "--orientation", "columns",
                 "--extended-a", "1"]) == 0


def test_cli_usage_errors(tmp_path):
    obs = write(tmp_path / "obs.csv", "s0,s1\n1,0\n3,4\n")
    with pytest.raises(SystemExit) as info:
        main(["fit", "--data", obs, "--orientation", "rows", "--method", "lasso"])
    assert info.value.code != 0
    with pytest.raises(SystemExit) as info:
        main(["eval", "--obs", obs, "--pred", obs])
    assert info.value.code != 0
    assert main(["eval", "--obs", str(tmp_path / "missing.csv"), "--pred", obs,
                 "--orientation", "rows"]) == 1


def test_cli_simulate_outputs_and_determinism(tmp_path):
    args = ["simulate", "--scenario", "exp1e", "--d", "20", "--n", "30", "--seed", "42"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert sorted(p.name for p in (tmp_path / "a").iterdir()) == ["Y.csv", "manifest.json"]
    assert (tmp_path / "a" / "Y.csv").read_bytes() == (tmp_path / "b" / "Y.csv").read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["scenario"] == "exp1e" and manifest["seed"] == 42
    assert manifest["dims"] == {"d": 20, "n": 30}
    assert main(["simulate", "--scenario", "exp2", "--d", "5", "--n", "20",
                 "--out", str(tmp_path / "c")]) == 0
    assert {"X.csv", "Y.csv", "theta_true.csv"} <= {p.name for p in (tmp_path / "c").iterdir()}


def test_cli_experiment_regression_blocks(tmp_path):
    out = tmp_path / "e.json"
    assert main(["experiment", "--scenario", "exp2", "--d", "10", "--n", "80", "--p", "2",
                 "--split", "40", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, COMPARISON_JSON_SCHEMA)
    assert set(doc["blocks"]) == {"train", "test"}
    assert set(doc["blocks"]["test"]) == {"multiols", "nsreg"}
    assert (tmp_path / "e.manifest.json").exists()


def test_cli_thread_limit_env(tmp_path, monkeypatch):
    obs = write(tmp_path / "obs.csv", "s0,s1\n1,0\n3,4\n")
    monkeypatch.setenv("NS_LEARN_THREADS", "1")
    assert main(["eval", "--obs", obs, "--pred", obs, "--orientation", "columns"]) == 0
    monkeypatch.setenv("NS_LEARN_THREADS", "many")
    with pytest.raises(SystemExit):
        main(["eval", "--obs", obs, "--pred", obs, "--orientation", "columns"])
