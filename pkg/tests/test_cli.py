import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from holoseries import models
from holoseries.cli import CLIError, main, parse_axis, parse_grid, run_identities
from holoseries.multiindex import StirlingTable, stirling_unsigned


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_axis():
    assert np.allclose(parse_axis("0:1:5"), [0, 0.25, 0.5, 0.75, 1])
    assert np.allclose(parse_axis("2.5"), [2.5])
    with pytest.raises(CLIError):
        parse_axis("0:1")
    with pytest.raises(CLIError):
        parse_axis("0:1:0")


def test_parse_grid_product_and_broadcast():
    assert parse_grid("0:1:2,5", 2, "x").tolist() == [[0, 5], [1, 5]]
    assert parse_grid("1", 3, "u").tolist() == [[1, 1, 1]]
    with pytest.raises(CLIError):
        parse_grid("1,2", 3, "u")


def test_eval_csv_roundtrip(tmp_path):
    out = tmp_path / "r.csv"
    rc = main(["eval", "--model", "brownian", "--method", "qseries", "--eta", "1", "--rmax", "100",
               "--u=-1:1:3", "--s", "0:1:3", "--x", "0.3", "--out", str(out)])
    assert rc == 0
    rows = _read(out)
    assert list(rows[0]) == ["s", "x_1", "u_1", "re_phat", "im_phat", "method", "n_terms",
                             "tail_estimate", "status"]
    assert len(rows) == 9
    for r in rows:
        s, x, u = float(r["s"]), float(r["x_1"]), float(r["u_1"])
        val = complex(float(r["re_phat"]), float(r["im_phat"]))
        assert abs(val - models.brownian_cf(s, x, u)) < 1e-12
        assert r["status"] == "ok"
    # 17 significant digits survive a float round trip
    assert rows[1]["x_1"] == format(0.3, ".17g")


def test_row_order_independent_of_threads(tmp_path, monkeypatch):
    args = ["eval", "--model", "ou", "--method", "qseries", "--eta", "1", "--rmax", "60",
            "--u=-2:2:5", "--s", "0:1:3", "--x=-0.5:0.5:3"]
    monkeypatch.setenv("HOLOSERIES_THREADS", "1")
    main(args + ["--out", str(tmp_path / "a.csv")])
    monkeypatch.setenv("HOLOSERIES_THREADS", "4")
    main(args + ["--out", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_text() == (tmp_path / "b.csv").read_text()


def test_compare_brownian_qseries_riccati(tmp_path):
    rc = main(["compare", "--model", "brownian", "--methods", "qseries,riccati", "--eta", "1",
               "--rmax", "100", "--u=-2:2:5", "--s", "0:1:5", "--x", "0.3", "--tol", "1e-8",
               "--out", str(tmp_path / "c.csv")])
    assert rc == 0
    assert all(r["pass"] == "pass" for r in _read(tmp_path / "c.csv"))


def test_compare_ou_logaffine_riccati(tmp_path):
    rc = main(["compare", "--model", "ou", "--methods", "logaffine,riccati", "--eta", "1",
               "--rmax", "100", "--u=-2:2:5", "--s", "0:2:5", "--x=-1:1:3", "--tol", "1e-6",
               "--out", str(tmp_path / "c.csv")])
    assert rc == 0


def test_compare_perturbed_fails(tmp_path):
    rc = main(["compare", "--model", "ou", "--methods", "qseries,riccati", "--eta", "1",
               "--rmax", "80", "--perturb-drift", "qseries", "--tol", "1e-6",
               "--out", str(tmp_path / "c.csv")])
    assert rc == 1
    assert any(r["pass"] == "FAIL" for r in _read(tmp_path / "c.csv"))


def test_compare_needs_two_methods(capsys):
    assert main(["compare", "--model", "ou", "--methods", "qseries"]) == 2
    assert "at least two" in capsys.readouterr().err


def test_missing_model_file(capsys):
    assert main(["eval", "--model", "/nonexistent.json"]) == 2
    assert "not found" in capsys.readouterr().err


def test_bad_model_file(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"dimension": 1, "drift": {"const": [0.0], "cubic": [1.0]}}))
    assert main(["eval", "--model", str(p)]) == 2
    assert "unsupported" in capsys.readouterr().err


def test_identities_pass(capsys):
    assert main(["identities", "--kmax", "15"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 5 and "FAIL" not in out


def test_identities_vacuous():
    results = run_identities(0)
    assert all(r.passed for r in results)


def test_identities_perturbed_table_fails():
    rows = list(stirling_unsigned(8).rows)
    rows[4] = (0, 6, 11, 7, 1)
    results = {r.name: r.passed for r in run_identities(8, stirling=StirlingTable(8, tuple(rows)))}
    assert not results["stirling-row-sums"]
    assert not results["stirling-generating"]
    assert not results["q-system"]


def test_expand_zero_model(tmp_path):
    out = tmp_path / "e.json"
    assert main(["expand", "--model", "zero", "--rmax", "4", "--u", "1.5", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["eta_source"] == "trivial"
    assert len(doc["g"][0]) == 1 and all(t == [] for t in doc["g"][1:])
    assert all(t == [] for t in doc["h"][1:])


def test_expand_ou_has_affine_log(tmp_path):
    out = tmp_path / "e.json"
    assert main(["expand", "--model", "ou", "--rmax", "10", "--eta", "1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert max(doc["affinity_residuals"]) < 1e-12
    assert doc["rho1"][1][0] == pytest.approx([0.0, -1.0])


def test_eta_modes_run(tmp_path):
    for mode in ("ru", "calibrated"):
        out = tmp_path / f"{mode}.csv"
        assert main(["eval", "--model", "square_root", "--eta-mode", mode, "--s", "0.1",
                     "--out", str(out)]) == 0
        assert len(_read(out)) == 1


def test_mc_subcommand(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["mc", "--model", "ou", "--paths", "4000", "--s", "1", "--x", "0.3", "--seed", "2",
                 "--out", str(out)]) == 0
    r = _read(out)[0]
    val = complex(float(r["re_phat"]), float(r["im_phat"]))
    assert abs(val - models.ou_cf(1.0, 0.3, 1.0)) < 4 * float(r["tail_estimate"]) + 1e-3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "holoseries", "identities", "--kmax", "3"],
                         capture_output=True, text=True, env={**os.environ, "HOLOSERIES_NUMBA": "0"})
    assert res.returncode == 0
    assert "PASS" in res.stdout
