"""Sensitivity of the two scale extractors' agreement to the orthogonality cut."""
import dataclasses

import numpy as np

from collapse_lab.wavesolver import SimConfig, run_simulation


def main():
    base = SimConfig(lambda_min=1e-6, extractor="both")
    for yc in (0.5, 1.0, 1.5, 2.0, 3.0):
        res = run_simulation(dataclasses.replace(base, y_cut=yc))
        s = res.series
        gap = np.abs(s.lam_orthogonality / s.lam_curvature - 1)
        print(f"y_cut {yc:4.1f}: max gap {np.nanmax(gap):.4f}, final gap {gap[-1]:.4f}")


if __name__ == "__main__":
    main()
