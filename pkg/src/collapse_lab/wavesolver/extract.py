"""Two independent estimates of the instanton scale lambda(t)."""
from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from ..profiles import chi, zeta


class ExtractionError(RuntimeError):
    pass


def extract_lambda_curvature(state):
    """``lambda = 2/sqrt(-u''(0))`` from ``chi(rho) = 1 - 2 rho^2 + O(rho^4)``.

    ``u''(0)`` comes from the even fit ``a + b r^2 + c r^4`` through the three
    innermost cells of the finest level.
    """
    f = state.levels[-1] if hasattr(state, "levels") else state
    r, u = f.r[:3], f.u[:3]
    A = np.column_stack([np.ones(3), r * r, r ** 4])
    _, b, _ = np.linalg.solve(A, u)
    if not b < 0:
        raise ExtractionError(f"non-negative curvature at the origin (u''(0) = {2 * b:.3g})")
    return 2.0 / np.sqrt(-2.0 * b)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(400)


class CompositeSampler:
    """Cubic-spline evaluation of ``u(r)`` using the finest level covering ``r``."""

    def __init__(self, state):
        self.parts = []
        for lv in state.levels:
            rr = np.concatenate((-lv.r[3::-1], lv.r, [lv.extent + 0.5 * lv.h]))
            uu = np.concatenate((lv.u[3::-1], lv.u, [lv.ghost]))
            self.parts.append((lv.extent - 2 * lv.h, CubicSpline(rr, uu)))
        self.r_max = state.levels[0].extent

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        done = np.zeros(r.shape, dtype=bool)
        for reach, sp in reversed(self.parts):
            m = (~done) & (r < reach)
            out[m] = sp(r[m])
            done |= m
        out[~done] = self.parts[0][1](r[~done])
        return out


def orthogonality_functional(state, y_cut=1.0):
    """Return ``G(lambda) = int_0^ycut zeta(y) (u(lambda y) - chi(y)) y dy`` and the sampler."""
    U = CompositeSampler(state)
    X = 0.5 * (_GL_X + 1.0)
    # y = ycut X^2 clusters nodes near the origin
    y = y_cut * X * X
    w = 0.5 * _GL_W * y_cut * 2 * X
    kern = zeta(y) * y * w
    ref = chi(y)

    def G(lam):
        return float(np.sum(kern * (U(lam * y) - ref)))

    return G, U


def extract_lambda_orthogonality(state, lambda_guess, y_cut=1.0):
    """Root of ``G(lambda)`` in ``[lambda_guess/2, 2 lambda_guess]``.

    The truncation radius is ``min(y_cut, 0.45 R/lambda_guess)`` so the
    sampled radii stay inside the domain.
    """
    R = state.levels[0].extent
    yc = min(y_cut, 0.45 * R / lambda_guess)
    G, _ = orthogonality_functional(state, yc)
    a, b = 0.5 * lambda_guess, 2.0 * lambda_guess
    ga, gb = G(a), G(b)
    if not (np.isfinite(ga) and np.isfinite(gb)) or ga * gb > 0:
        raise ExtractionError(f"no sign change of G on [{a:.4g}, {b:.4g}] "
                              f"(G = {ga:.3g}, {gb:.3g})")
    return brentq(G, a, b, xtol=1e-14 * lambda_guess, rtol=1e-13)
