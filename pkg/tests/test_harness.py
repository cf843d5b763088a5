import json
import pathlib
import tempfile
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from collapse_lab.harness import artifacts
from collapse_lab.harness.cli import main
from collapse_lab.harness.config import ConfigError, make_plan, parse_config_text
from collapse_lab.harness.figure import FIGURE_HEADER, analytic_ratio, figure_data
from collapse_lab.harness.pipeline import (EXIT_BREACH, EXIT_PASS, EXIT_USAGE, SWEEP_HEADER,
                                           Check, pipeline_gamma)
from collapse_lab.harness.sweep import classify, scaled_config, sweep_specs
from collapse_lab.modulation import closed_form_c, exact_lambda
from collapse_lab.wavesolver import SimConfig


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1,
                max_size=20))
def test_csv_round_trip_is_exact(xs):
    with tempfile.TemporaryDirectory() as d:
        p = pathlib.Path(d) / "x.csv"
        artifacts.write_csv(p, ("a", "b"), [xs, [-x for x in xs]])
        header, cols = artifacts.read_csv(p)
    assert header == ["a", "b"]
    assert [float(v) for v in cols["a"]] == xs
    assert [float(v) for v in cols["b"]] == [-x for x in xs]


def test_fmt_uses_17_digits():
    assert artifacts.fmt(0.1) == "0.10000000000000001"
    assert artifacts.fmt(3) == "3"
    assert artifacts.fmt(float("nan")) == "nan"


def test_json_cleans_values(tmp_path):
    artifacts.write_json(tmp_path / "s.json", {"a": float("inf"), "b": Fraction(3, 4),
                                               "c": np.float64(2.5), "d": np.arange(2)})
    d = json.loads((tmp_path / "s.json").read_text())
    assert d == {"a": None, "b": "3/4", "c": 2.5, "d": [0, 1]}


def test_config_parsing():
    cfg = parse_config_text("h = 1/64   # finer\nlambda_dot0 = -0.25\n"
                            "sweep_lambda0 = 0.5, 2\nsample_every = 7\nextractor = curvature\n"
                            "extended_coeff = none\n")
    assert cfg.sim.h == 1 / 64 and cfg.sim.lambda_dot0 == -0.25
    assert cfg.sweep.sweep_lambda0 == (0.5, 2.0)
    assert cfg.sim.sample_every == 7 and cfg.sim.extractor == "curvature"
    assert cfg.modulation.extended_coeff is None
    assert cfg.to_dict()["sim"]["h"] == 1 / 64


@pytest.mark.parametrize("text", ["colour = red\n", "h = fast\n", "h 1\n[x\n"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_cli_usage_errors(tmp_path, capsys):
    good = write(tmp_path, "lambda0 = 1\n")
    assert main(["integrals", "--config", str(tmp_path / "missing.cfg"),
                 "--out", str(tmp_path / "o")]) == EXIT_USAGE
    bad = write(tmp_path, "nonsense_key = 1\n", "bad.cfg")
    assert main(["integrals", "--config", str(bad), "--out", str(tmp_path / "o")]) == EXIT_USAGE
    blocked = tmp_path / "file"
    blocked.write_text("")
    assert main(["integrals", "--config", str(good), "--out", str(blocked / "sub")]) == EXIT_USAGE
    assert main(["sweep", "--config", str(good), "--out", str(tmp_path / "o"),
                 "--workers", "0"]) == EXIT_USAGE
    invalid = write(tmp_path, "R = 5\n", "invalid.cfg")
    assert main(["simulate", "--config", str(invalid), "--out", str(tmp_path / "o")]) == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["dance", "--config", str(good), "--out", str(tmp_path)])
    assert exc.value.code == 2
    assert "error" in capsys.readouterr().err


def test_integrals_mode(tmp_path, capsys):
    cfg = write(tmp_path, "# nothing to set\n")
    assert main(["integrals", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_PASS
    header, cols = artifacts.read_csv(tmp_path / "o" / "integrals.csv")
    assert header == ["name", "exact", "numeric", "residual"]
    assert all(r <= 1e-10 for r in cols["residual"])
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["exit_status"] == 0 and summary["config_text"] == "# nothing to set\n"
    out = capsys.readouterr().out
    assert out.count("PASS") == len(summary["checks"]) and "FAIL" not in out


def test_modulation_mode_is_deterministic(tmp_path):
    cfg = write(tmp_path, "lambda0 = 1\nlambda_dot0 = -1\nlambda_min = 1e-3\n")
    blobs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        assert main(["modulation", "--config", str(cfg), "--out", str(out)]) == EXIT_PASS
        blobs.append((out / "modulation.csv").read_bytes())
    assert blobs[0] == blobs[1]
    first = blobs[0].decode().splitlines()
    assert first[0] == "t,lambda,lambda_dot,first_integral,asymptotic_ratio"


def test_phi1_mode_overrides(tmp_path):
    cfg = write(tmp_path, "lambda_dot = 0.3\nz_max = 200\n")
    out = tmp_path / "o"
    assert main(["phi1", "--config", str(cfg), "--out", str(out), "--lambda-dot", "0.1"]) == 0
    coeffs = json.loads((out / "phi1_coefficients.json").read_text())
    assert set(coeffs) >= {"c", "c_bar", "c_prime", "fit_residual"}
    assert json.loads((out / "summary.json").read_text())["config"]["phi1"]["lambda_dot"] == 0.1


def test_static_simulation_mode(tmp_path):
    cfg = write(tmp_path, "lambda_dot0 = 0\nt_max = 1\nsample_every = 8\n")
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == EXIT_PASS
    header, cols = artifacts.read_csv(out / "lambda_series.csv")
    assert header == ["t", "lambda_curvature", "lambda_orthogonality", "energy"]
    lam = cols["lambda_orthogonality"]
    assert np.max(np.abs(lam - 1)) < 1e-3


def test_check_grading():
    assert Check("x", 0.5, 1.0).passed and not Check("x", 1.5, 1.0).passed
    assert Check("x", 1.0, 1.0, "min").passed and not Check("x", float("nan"), 1.0).passed
    assert Check("x", 2.0, 1.0).line().startswith("FAIL")


def test_pipeline_gamma_is_three_quarters():
    assert abs(pipeline_gamma() - 0.75) < 1e-12


def test_analytic_ratio():
    assert abs(analytic_ratio(4.0) - 0.408248290463863) < 1e-14
    np.testing.assert_allclose(analytic_ratio(np.array([2.0, 9.0]), 0.7500000001),
                               analytic_ratio(np.array([2.0, 9.0])), rtol=1e-9)


def test_figure_of_exact_modulation_converges():
    c = closed_form_c(1.0, -1.0)
    x = np.array([5.0, 10.0, 20.0, 40.0, 80.0])
    tau = np.exp(-x)
    lam = np.array([exact_lambda(s, c) for s in tau])
    rep = figure_data(-tau, lam, 0.0)
    assert list(FIGURE_HEADER)[0] == "neg_log_tstar_minus_t"
    np.testing.assert_allclose(rep.neg_log_tau, x)
    d = np.abs(rep.deviation)
    assert np.all(np.diff(d) < 0) and d[-1] < 0.03


def test_figure_drops_samples_outside_law():
    rep = figure_data(np.array([-2.0, 0.5, 0.9, 1.2]), np.ones(4), 1.0)
    assert rep.deviation.size == 2
    assert rep.diagnostics["dropped_past_t_star"] == 1
    assert rep.diagnostics["dropped_t_star_minus_t_ge_1"] == 1


def test_sweep_specs_are_seeded(tmp_path):
    cfg = write(tmp_path, "sweep_lambda0 = 1, 2\nsweep_lambda_dot0 = -0.5, 0.25\n"
                          "perturbed_per_point = 2\nperturbation_amplitude = 0.01\n")
    a = sweep_specs(make_plan("sweep", cfg, tmp_path / "a", seed=7))
    b = sweep_specs(make_plan("sweep", cfg, tmp_path / "b", seed=7))
    c = sweep_specs(make_plan("sweep", cfg, tmp_path / "c", seed=8))
    assert a == b and a != c
    assert len(a) == 4 + 8
    assert all(s["amplitude"] == 0 for s in a[:4])
    assert all(0 < abs(s["amplitude"]) <= 0.01 for s in a[4:])
    assert [classify(v) for v in (-0.5, 0.0, 0.25)] == ["b", "static", "a"]


def test_scaled_config():
    s = scaled_config(SimConfig(h=1 / 32, lambda_min=1e-3), 2.0, -0.5, 0.01)
    assert (s.R, s.h, s.lambda_min, s.bump_center, s.bump_width) == (40, 1 / 16, 2e-3, 4.0, 2.0)
    s.validate()


@pytest.mark.slow
def test_small_sweep_end_to_end(tmp_path):
    cfg = write(tmp_path, "lambda_min = 1e-2\nt_max = 3\nsweep_lambda0 = 1\n"
                          "sweep_lambda_dot0 = -0.5, 0.5\nperturbed_per_point = 1\n"
                          "sample_every = 40\n")
    outs = []
    for w in (1, 2):
        out = tmp_path / f"w{w}"
        status = main(["sweep", "--config", str(cfg), "--out", str(out), "--workers", str(w),
                       "--seed", "3"])
        assert status in (EXIT_PASS, EXIT_BREACH)
        outs.append((out / "sweep.csv").read_bytes())
    assert outs[0] == outs[1]
    header, cols = artifacts.read_csv(tmp_path / "w1" / "sweep.csv")
    assert header == list(SWEEP_HEADER)
    assert cols["case"] == ["b", "a", "b", "a"]
    assert list(cols["collapsed"][[0, 2]]) == [1, 1]
    summary = json.loads((tmp_path / "w1" / "summary.json").read_text())
    assert summary["result"]["excluded"] == ["run_001", "run_003"]
    assert summary["result"]["collapse_rate"] == 1.0
    assert (tmp_path / "w1" / "run_002" / "lambda_series.csv").exists()
