"""Grid convergence of the linearized operators and of the static PDE evolution."""
import numpy as np

from collapse_lab.linearized import convergence_study
from collapse_lab.profiles import chi
from collapse_lab.wavesolver import SimConfig, energy, init_state, step


def static_deviation(h, t_end=10.0):
    s = init_state(SimConfig(h=h, lambda_dot0=0.0, trigger=16, t_max=t_end))
    e = energy(s)
    worst = 0.0
    while s.time < t_end - 1e-12:
        step(s)
        lv = s.levels[0]
        worst = max(worst, float(np.max(np.abs(lv.u - chi(lv.r)))))
    return worst, e


def main():
    for h in (0.1, 0.05):
        print(f"operator residuals, h = {h} vs h/2")
        for r in convergence_study(h):
            print(f"  {r.name:<22} {r.coarse:.3e} {r.fine:.3e} ratio {r.ratio:.3f}")
    X = 401.0
    e_exact = 8 / 3 - 8 / X ** 2 + 16 / (3 * X ** 3)
    print("static instanton over t <= 10 (R = 20)")
    prev = None
    for n in (16, 32, 64, 128):
        d, e = static_deviation(1.0 / n)
        ratio = "" if prev is None else f"ratio {prev / d:.3f}"
        print(f"  h = 1/{n:<4d} max|u - chi| {d:.3e}  energy error {e - e_exact:+.3e}  {ratio}")
        prev = d


if __name__ == "__main__":
    main()
