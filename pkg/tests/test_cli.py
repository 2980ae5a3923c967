import csv
import io
import json
import math

import numpy as np
import pytest
from scipy import special as sp

from xbxreg import dist
from xbxreg.cli import ingest_csv, main
from xbxreg.errors import DataError, DomainError


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


@pytest.fixture
def data_csv(tmp_path):
    rng = np.random.default_rng(17)
    n = 120
    x = rng.normal(size=n)
    mu = sp.expit(0.2 + 0.7 * x)
    y = np.array([float(dist.sample_xbx(dist.XBX(m, 4.0, 0.1), rng))
                  for m in mu])
    path = tmp_path / "data.csv"
    write_csv(path, ["y", "x"], [[repr(float(yi)), repr(float(xi))]
                                 for yi, xi in zip(y, x)])
    return str(path)


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------

def test_ingest_identity_range(tmp_path):
    path = tmp_path / "a.csv"
    write_csv(path, ["resp", "x"],
              [[0.0, 1.0], [0.5, 2.0], [1.0, 3.0], [0.25, 4.0]])
    d = ingest_csv(str(path), "resp", ["x"], [])
    assert d.y.tolist() == [0.0, 0.5, 1.0, 0.25]
    assert d.x_names == ("intercept", "x")
    assert d.X.shape == (4, 2)
    assert d.Z.shape == (4, 1)


def test_ingest_endpoint_mapping_bit_exact(tmp_path):
    # response on [0, 900]: endpoints must map to exactly 0.0 and 1.0
    path = tmp_path / "a.csv"
    write_csv(path, ["resp"], [[0.0], [300.0], [900.0]])
    d = ingest_csv(str(path), "resp", [], [], rng=(0.0, 900.0))
    assert d.y[0] == 0.0
    assert d.y[2] == 1.0
    assert d.y[1] == pytest.approx(1.0 / 3.0)


def test_ingest_out_of_range_raises(tmp_path):
    path = tmp_path / "a.csv"
    write_csv(path, ["resp"], [[0.2], [1.4]])
    with pytest.raises(DataError, match="row 3"):
        ingest_csv(str(path), "resp", [], [])


def test_ingest_categorical_one_hot(tmp_path):
    path = tmp_path / "a.csv"
    write_csv(path, ["resp", "grp"],
              [[0.1, "b"], [0.2, "a"], [0.3, "c"], [0.4, "a"], [0.5, "b"]])
    d = ingest_csv(str(path), "resp", ["grp"], [])
    # 3 levels, sorted reference "a": indicators for b and c
    assert d.x_names == ("intercept", "grp[b]", "grp[c]")
    assert d.X[:, 1].tolist() == [1.0, 0.0, 0.0, 0.0, 1.0]
    assert d.X[:, 2].tolist() == [0.0, 0.0, 1.0, 0.0, 0.0]


def test_ingest_interaction(tmp_path):
    path = tmp_path / "a.csv"
    write_csv(path, ["resp", "x", "grp"],
              [[0.1, 2.0, "u"], [0.2, 3.0, "v"], [0.3, 5.0, "u"],
               [0.4, 7.0, "v"], [0.5, 11.0, "u"], [0.6, 13.0, "v"]])
    d = ingest_csv(str(path), "resp", ["x", "grp", "x:grp"], [])
    assert d.x_names == ("intercept", "x", "grp[v]", "x:grp[v]")
    assert d.X[:, 3].tolist() == [0.0, 3.0, 0.0, 7.0, 0.0, 13.0]


def test_ingest_missing_value(tmp_path):
    path = tmp_path / "a.csv"
    write_csv(path, ["resp", "x"], [[0.1, 1.0], [0.2, "NA"]])
    with pytest.raises(DataError, match="missing value"):
        ingest_csv(str(path), "resp", ["x"], [])


def test_ingest_unknown_column(tmp_path):
    path = tmp_path / "a.csv"
    write_csv(path, ["resp", "x"], [[0.1, 1.0], [0.2, 2.0], [0.3, 3.0]])
    with pytest.raises(DataError, match="'nope'"):
        ingest_csv(str(path), "resp", ["nope"], [])


def test_ingest_ragged_row(tmp_path):
    path = tmp_path / "a.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("resp,x\n0.1,1.0\n0.2\n")
    with pytest.raises(DataError, match="row 3"):
        ingest_csv(str(path), "resp", ["x"], [])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def test_quadcheck_order_two(tmp_path, capsys):
    code = main(["quadcheck", "--order", "2"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "node,weight"
    nodes = [float(line.split(",")[0]) for line in lines[1:]]
    assert nodes[0] == pytest.approx(2.0 - math.sqrt(2.0), abs=1e-6)
    assert nodes[1] == pytest.approx(2.0 + math.sqrt(2.0), abs=1e-6)
    assert f"{nodes[0]:.6f}" == "0.585786"
    assert f"{nodes[1]:.6f}" == "3.414214"


def test_fit_writes_json_artifact(data_csv, tmp_path):
    out = tmp_path / "fit.json"
    code = main(["fit", data_csv, "--response", "y", "--mean", "x",
                 "--precision", "x", "--family", "xbx",
                 "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["family"] == "xbx"
    assert doc["converged"] is True
    assert doc["coefficients"]["names"] == [
        "mu:intercept", "mu:x", "precision:intercept", "precision:x",
        "log_nu"]
    assert doc["n"] == 120
    assert doc["aic"] == pytest.approx(-2 * doc["loglik"] + 2 * 5, abs=1e-9)


def test_predict_roundtrip_through_artifact(data_csv, tmp_path, capsys):
    out = tmp_path / "fit.json"
    main(["fit", data_csv, "--response", "y", "--mean", "x",
          "--precision", "x", "--out", str(out)])
    args = ["predict", data_csv, "--response", "y", "--mean", "x",
            "--precision", "x", "--targets", "mean,p_above",
            "--threshold", "0.95"]
    code = main(args + ["--model", str(out)])
    assert code == 0
    from_model = capsys.readouterr().out
    code = main(args)
    assert code == 0
    refit = capsys.readouterr().out
    lines = from_model.splitlines()
    assert lines[0] == "mean,p_above"
    # loading the artifact reproduces the refit predictions
    a = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    b = np.array([[float(v) for v in ln.split(",")]
                  for ln in refit.splitlines()[1:]])
    assert np.allclose(a, b, atol=1e-10)
    assert np.all((a[:, 0] > 0) & (a[:, 0] < 1))
    assert np.all((a[:, 1] >= 0) & (a[:, 1] <= 1))


def test_test_subcommand_wald(data_csv, capsys):
    code = main(["test", data_csv, "--response", "y", "--mean", "x",
                 "--precision", "x", "--restrict", "mu:x"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "wald"
    assert doc["df"] == 1
    assert doc["p_value"] < 0.05


def test_test_subcommand_lr(data_csv, capsys):
    code = main(["test", data_csv, "--response", "y", "--mean", "x",
                 "--precision", "x", "--null-model", "mean=;precision=x"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "lr"
    assert doc["df"] == 1
    assert doc["statistic"] >= 0.0


def test_test_requires_hypothesis(data_csv, capsys):
    code = main(["test", data_csv, "--response", "y", "--mean", "x",
                 "--precision", "x"])
    assert code == 2


def test_score_subcommand(data_csv, capsys):
    code = main(["score", data_csv, "--response", "y", "--mean", "x",
                 "--precision", "x"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "row,y,crps"
    assert lines[-1].startswith("total,")
    total = float(lines[-1].split(",")[2])
    per_row = [float(ln.split(",")[2]) for ln in lines[1:-1]]
    assert total == pytest.approx(sum(per_row), rel=1e-12)
    assert len(per_row) == 120


def test_rootogram_subcommand(data_csv, capsys):
    code = main(["rootogram", data_csv, "--response", "y", "--mean", "x",
                 "--precision", "x", "--breaks", "0,0.25,0.5,0.75,1"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("bin_lower,bin_upper,")
    assert len(lines) == 5
    observed = sum(float(ln.split(",")[2]) for ln in lines[1:])
    assert observed == 120.0


def test_simulate_subcommand_writes_two_csvs(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    code = main(["simulate", "--settings", "desk", "--u-grid", "0.25",
                 "--replications", "1", "--n", "60", "--seed", "7",
                 "--out", str(out)])
    assert code == 0
    results = out.read_text().splitlines()
    assert results[0].startswith("setting_id,")
    assert len(results) == 5  # 4 desk settings x 1 u x 1 replication
    summary = (tmp_path / "sim_summary.csv").read_text().splitlines()
    assert summary[0].startswith("setting_id,")


def test_exit_code_data_error(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    write_csv(path, ["y"], [[0.1], ["oops"]])
    code = main(["fit", str(path), "--response", "y"])
    assert code == 3
    assert "unparseable" in capsys.readouterr().err


def test_exit_code_usage_error(data_csv, capsys):
    code = main(["fit", data_csv, "--response", "y", "--family", "xbx",
                 "--range", "5", "1"])
    assert code == 2


def test_exit_code_missing_file(capsys):
    code = main(["fit", "/nonexistent/file.csv", "--response", "y"])
    assert code == 3
