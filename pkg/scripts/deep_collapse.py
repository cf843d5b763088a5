"""Follow one collapse far below the desk depth and tabulate the law per decade.

    python scripts/deep_collapse.py --lambda-min 1e-20 --h 1/64 --out runs/deep

Writes lambda_series.csv, figure.csv and decades.csv (free slope of
lambda'^-2 against ln lambda and the figure deviation in each decade).
"""
import argparse
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from collapse_lab.harness.artifacts import write_csv, write_json
from collapse_lab.harness.figure import emit_figure_data
from collapse_lab.harness.pipeline import SERIES_HEADER, series_columns
from collapse_lab.wavesolver import SimConfig, run_simulation
from collapse_lab.wavesolver.run import lambda_dot


def decade_table(series, gamma=0.75):
    lam, tr = series.lam, series.t_rel
    ld = lambda_dot(tr, lam)
    tau = series.tau()
    rows = []
    top = int(np.floor(np.log10(lam[0])))
    for k in range(top, int(np.floor(np.log10(lam[-1]))) - 1, -1):
        m = (lam < 10.0 ** (k + 1)) & (lam >= 10.0 ** k) & (ld < 0)
        if np.count_nonzero(m) < 5:
            continue
        slope = np.polyfit(np.log(lam[m]), ld[m] ** -2.0, 1)[0]
        # the law is only defined for 0 < t* - t < 1
        w = m & (tau > 0) & (tau < 1)
        x = -np.log(tau[w])
        dev = lam[w] / tau[w] * np.sqrt(2 * gamma * x) - 1
        med = (float(np.median(x)), float(np.median(dev))) if x.size else (np.nan, np.nan)
        rows.append((k, slope, slope / (-2 * gamma) - 1) + med)
    return rows


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--lambda0", type=float, default=1.0)
    p.add_argument("--lambda-dot0", type=float, default=-0.5)
    p.add_argument("--h", default="1/32")
    p.add_argument("--trigger", type=float, default=32.0)
    p.add_argument("--lambda-min", type=float, default=1e-20)
    p.add_argument("--max-levels", type=int, default=200)
    p.add_argument("--out", default="runs/deep")
    a = p.parse_args()
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = SimConfig(lambda0=a.lambda0, lambda_dot0=a.lambda_dot0, h=float(Fraction(a.h)),
                    R=20 * a.lambda0, trigger=a.trigger, lambda_min=a.lambda_min,
                    max_levels=a.max_levels, sample_every=40)
    t0 = time.time()

    def progress(state, lam):
        if state.steps % 4000 == 0:
            print(f"  step {state.steps:7d}  levels {len(state.levels):3d}  lambda {lam:.3e}"
                  f"  ({time.time() - t0:.0f} s)", flush=True)

    res = run_simulation(cfg, progress=progress)
    s = res.series
    write_csv(out / "lambda_series.csv", SERIES_HEADER, series_columns(res))
    rep = emit_figure_data(s, path=out / "figure.csv")
    rows = decade_table(s)
    write_csv(out / "decades.csv", ("log10_lambda", "slope", "slope_relative_error",
                                    "median_neg_log_tau", "median_deviation"),
              list(zip(*rows)))
    write_json(out / "summary.json", {"config": cfg.to_dict(), "diagnostics": res.diagnostics,
                                       "figure": rep.summary()})
    print(f"status {res.diagnostics['status']}, {res.diagnostics['levels']} levels, "
          f"energy drift {res.diagnostics['energy_relative_drift']:.2e}")
    print(" decade    slope   rel.err   -ln(t*-t)  deviation")
    for k, sl, err, x, dev in rows:
        print(f"  1e{k:<4d} {sl:8.4f} {err:8.3f} {x:10.2f} {dev:10.4f}")


if __name__ == "__main__":
    main()
