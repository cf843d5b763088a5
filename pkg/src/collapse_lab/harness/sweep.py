"""Stability sweep over ``(lambda0, lambda_dot0)`` with randomized bumps."""
from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..wavesolver import SimConfig, run_simulation
from .artifacts import write_csv, write_json
from .pipeline import SERIES_HEADER, SWEEP_HEADER, Check, emit_figure_data, final_decade, \
    relative_error, series_columns, simulation_summary


def classify(lambda_dot0):
    if lambda_dot0 < 0:
        return "b"
    return "a" if lambda_dot0 > 0 else "static"


def scaled_config(base: SimConfig, lambda0, lambda_dot0, amplitude):
    """``base`` describes a run at ``lambda0 = base.lambda0``; lengths scale with ``lambda0``."""
    k = lambda0 / base.lambda0
    return dataclasses.replace(base, lambda0=lambda0, lambda_dot0=lambda_dot0, R=base.R * k,
                               h=base.h * k, lambda_min=base.lambda_min * k,
                               t_max=base.t_max * k, bump_amplitude=amplitude,
                               bump_center=2 * lambda0, bump_width=lambda0)


def sweep_specs(plan):
    """The run list: unperturbed grid first, then the perturbed copies."""
    sw = plan.config.sweep
    grid = [(l0, v0) for l0 in sw.sweep_lambda0 for v0 in sw.sweep_lambda_dot0]
    ss = np.random.SeedSequence(plan.seed)
    children = ss.spawn(len(grid) * sw.perturbed_per_point)
    specs = [{"lambda0": l0, "lambda_dot0": v0, "amplitude": 0.0, "seed": None}
             for l0, v0 in grid]
    k = 0
    for l0, v0 in grid:
        for _ in range(sw.perturbed_per_point):
            child = children[k]
            a = float(np.random.default_rng(child).uniform(-1.0, 1.0)) * sw.perturbation_amplitude
            specs.append({"lambda0": l0, "lambda_dot0": v0, "amplitude": a,
                          "seed": int(child.generate_state(1)[0])})
            k += 1
    for i, s in enumerate(specs):
        s["run"] = f"run_{i:03d}"
    return specs


def _one_run(args):
    spec, base, out_dir, gamma = args
    row = {"run": spec["run"], "lambda0": spec["lambda0"], "lambda_dot0": spec["lambda_dot0"],
           "amplitude": spec["amplitude"], "seed": -1 if spec["seed"] is None else spec["seed"],
           "case": classify(spec["lambda_dot0"]), "status": "error", "collapsed": 0,
           "slope": np.nan, "final_window_deviation": np.nan, "lambda_final": np.nan}
    run_dir = out_dir / spec["run"]
    run_dir.mkdir(parents=True, exist_ok=True)
    try:
        cfg = scaled_config(base, spec["lambda0"], spec["lambda_dot0"], spec["amplitude"])
        res = run_simulation(cfg, gamma=gamma)
    except Exception as exc:  # recorded, the sweep goes on
        write_json(run_dir / "summary.json", {"spec": spec, "error": repr(exc)})
        return row
    s = res.series
    write_csv(run_dir / "lambda_series.csv", SERIES_HEADER, series_columns(res))
    row["status"] = res.diagnostics["status"]
    row["collapsed"] = int(row["status"] == "collapsed")
    row["lambda_final"] = float(s.lam[-1])
    if s.law_fit is not None:
        row["slope"] = s.law_fit.slope
    if s.t_star_offset is not None:
        rep = emit_figure_data(s, gamma=gamma, window=final_decade(s.lam))
        row["final_window_deviation"] = rep.max_deviation
    write_json(run_dir / "summary.json", {"spec": spec, "config": cfg.to_dict(),
                                          **simulation_summary(res, gamma)})
    return row


def run_sweep(plan, gamma):
    base = plan.config.sim
    specs = sweep_specs(plan)
    jobs = [(s, base, plan.out_dir, gamma) for s in specs]
    if plan.workers > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as ex:
            rows = list(ex.map(_one_run, jobs))
    else:
        rows = [_one_run(j) for j in jobs]
    write_csv(plan.out_dir / "sweep.csv", SWEEP_HEADER, [[r[h] for r in rows] for h in SWEEP_HEADER])
    b = [r for r in rows if r["case"] == "b"]
    collapsed = [r for r in b if r["collapsed"]]
    slope_ok = [r for r in collapsed
                if np.isfinite(r["slope"]) and relative_error(r["slope"], -2 * gamma) <= 0.10]
    rate = len(collapsed) / len(b) if b else float("nan")
    slope_rate = len(slope_ok) / len(b) if b else float("nan")
    summary = {"gamma": gamma, "runs": len(rows), "case_b_runs": len(b),
               "excluded": [r["run"] for r in rows if r["case"] != "b"],
               "collapse_rate": rate, "slope_pass_rate": slope_rate, "specs": specs,
               "rows": rows}
    checks = [Check("sweep collapse rate", rate, 1.0, "min"),
              Check("sweep slope pass rate", slope_rate, 1.0, "min")]
    return checks, summary
