import csv
import json
from pathlib import Path

import numpy as np
import pytest

from auctionlab.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
THRESH = str(CONFIGS / "uniform_lazy_thresholded.json")
TRUTH = str(CONFIGS / "uniform_lazy_truthful.json")


def read_csv(path):
    rows = list(csv.reader(Path(path).open()))
    return rows[0], np.array(rows[1:], dtype=float)


@pytest.fixture(autouse=True)
def no_env_override(monkeypatch):
    monkeypatch.delenv("AUCTIONLAB_OUT", raising=False)


def test_reproduce_uniform_table(tmp_path, capsys):
    assert main(["reproduce", "--table", "uniform_one_strategic", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "reproduce_uniform_one_strategic.csv").open()))
    assert [r["pass"] for r in rows] == ["1"] * len(rows)
    got = {r["quantity"]: float(r["computed_value"]) for r in rows}
    assert got["truthful_utility"] == pytest.approx(1 / 12, abs=1e-6)
    assert got["thresholded_utility"] == pytest.approx(0.1316, abs=5e-4)
    assert json.loads((tmp_path / "manifest.json").read_text())["command"] == "reproduce"


def test_reproduce_nash_and_myerson_tables(tmp_path):
    assert main(["reproduce", "--table", "nash_uniform", "--out", str(tmp_path)]) == 0
    assert main(["reproduce", "--table", "myerson_uplift", "--out", str(tmp_path)]) == 0
    rows = {r["quantity"]: r for r in csv.DictReader((tmp_path / "reproduce_nash_uniform.csv").open())}
    assert float(rows["nash_r_star_K3"]["computed_value"]) == pytest.approx(2 / 3, abs=1e-8)


def test_unknown_table_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["reproduce", "--table", "nope"])
    assert exc.value.code == 2


def test_simulate_writes_both_estimates(tmp_path):
    assert main(["simulate", "--config", THRESH, "--rounds", "20000", "--seed", "3", "--out", str(tmp_path)]) == 0
    out = json.loads((tmp_path / "outcome.json").read_text())
    mc, quad = out["monte_carlo"], out["quadrature"]
    assert len(mc["stderr"]["utility"]) == 2
    assert abs(mc["utility"][0] - quad["utility"][0]) < 5 * mc["stderr"]["utility"][0]


def test_simulate_is_byte_identical(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    for d, threads in ((a, "1"), (b, "1"), (c, "3")):
        assert main(["simulate", "--config", TRUTH, "--rounds", "150000", "--seed", "11",
                     "--threads", threads, "--out", str(d)]) == 0
    ref = (a / "outcome.json").read_bytes()
    assert (b / "outcome.json").read_bytes() == ref
    assert (c / "outcome.json").read_bytes() == ref


def test_simulate_zero_rounds_fails(tmp_path, capsys):
    assert main(["simulate", "--config", TRUTH, "--rounds", "0", "--out", str(tmp_path)]) == 2
    assert "rounds" in capsys.readouterr().err


def test_malformed_json_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "mechanism": "lazy_sp",\n  "bidders": [,]\n}\n')
    assert main(["simulate", "--config", str(bad), "--rounds", "10", "--out", str(tmp_path)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_missing_config_fails_cleanly(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("what,key,value,tol", [
    ("linear", "alpha_star", 0.7, 1e-6),
    ("threshold", "r_star", 0.79681, 1e-4),
    ("nash", "r_star", 0.75, 1e-8),
])
def test_solve(tmp_path, what, key, value, tol):
    assert main(["solve", what, "--config", str(CONFIGS / "solve_uniform.json"), "--out", str(tmp_path)]) == 0
    res = json.loads((tmp_path / f"solve_{what}.json").read_text())
    assert res[key] == pytest.approx(value, abs=tol)
    assert {"residual", "iterations"} <= set(res)


def test_curves_shapes(tmp_path):
    assert main(["curves", "--config", THRESH, "--grid-size", "257", "--out", str(tmp_path)]) == 0
    header, truthful = read_csv(tmp_path / "curves_1_truthful.csv")
    assert header == ["reserve", "objective"]
    assert truthful[np.argmax(truthful[:, 1]), 0] == pytest.approx(0.5, abs=1e-12)
    _, thr = read_csv(tmp_path / "curves_0_thresholded.csv")
    assert thr[0, 0] == pytest.approx(0.25, abs=1e-12)
    assert np.all(np.diff(thr[:, 1]) <= 1e-12)
    _, pay = read_csv(tmp_path / "curves_0_thresholded_payment.csv")
    assert np.all(np.diff(pay[:, 1]) <= 1e-12)


def test_curves_grid_size_two(tmp_path):
    assert main(["curves", "--config", TRUTH, "--grid-size", "2", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "curves_0_truthful.csv")
    assert rows.shape == (2, 2)


def test_erm_command(tmp_path):
    cfg = tmp_path / "erm.json"
    cfg.write_text(json.dumps({"dist": {"kind": "uniform", "lo": 0, "hi": 1}, "r": 0.5,
                               "n": [1000, 4000], "replications": 10}))
    assert main(["erm", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "erm.csv")
    assert header == ["replication", "n", "epsilon", "x_hat", "bound", "feasible", "violated"]
    assert rows.shape == (20, 7)


def test_env_overrides_out(tmp_path, monkeypatch):
    target = tmp_path / "env"
    monkeypatch.setenv("AUCTIONLAB_OUT", str(target))
    assert main(["solve", "nash", "--config", str(CONFIGS / "solve_uniform.json"), "--out", str(tmp_path / "flag")]) == 0
    assert (target / "solve_nash.json").exists()
    assert not (tmp_path / "flag").exists()
