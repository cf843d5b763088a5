"""Interior-layer correction phi1(z), ``z = lambda'^4 y^2``.

    z^2 phi'' + (z + gamma z^2) phi' - (1 - gamma z/2) phi = -1

is integrated in ``s = ln z``:

    phi_ss + gamma e^s phi_s - (1 - gamma e^s/2) phi + 1 = 0.

Near the origin ``phi = 1 - (gamma/4) z (ln(z/lambda'^4) - 7/3) + O(z^2 ln z)``.
For large ``z`` the general solution is ``2/(gamma z) + c h1 + cbar h2`` where
``2/(gamma z)`` is an exact particular solution and the homogeneous solutions
behave as

    h1 = z^-1/2 (1 - 1/z - 5/(6 z^2) - ...),   h2 = e^(-gamma z) z^-1/2 (1 + 1/z - ...).

``h2`` is recessive and unique; ``h1`` is fixed only up to multiples of ``h2``
(we define it by its optimally truncated series at ``Z_SEED``), so ``c`` is
meaningful while ``cbar`` depends on that convention.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .profiles import GAMMA, NumericalError

Z_MIN = 1e-6
Z_SEED = 40.0
INNER_CONSTANT = 7.0 / 3.0


def matching_constant(lambda_dot):
    """``c' = ln(lambda'^-4)``, the constant of the inner solution fixed by matching."""
    if not 0 < lambda_dot <= 1:
        raise ValueError("need 0 < lambda_dot <= 1")
    return -4.0 * np.log(lambda_dot)


def inner_expansion(z, lambda_dot, gamma=GAMMA, constant=INNER_CONSTANT):
    """``(phi, z phi_z)`` from ``1 - (gamma/4) z (ln(z/lambda'^4) - constant)``."""
    z = np.asarray(z, dtype=float)
    L = np.log(z) + matching_constant(lambda_dot) - constant
    phi = 1.0 - 0.25 * gamma * z * L
    phi_s = -0.25 * gamma * z * (L + 1.0)
    return phi, phi_s


def _rhs(s, Y, gamma):
    z = np.exp(s)
    p, ps = Y
    return [ps, -gamma * z * ps + (1.0 - 0.5 * gamma * z) * p - 1.0]


def _rhs_homogeneous(s, Y, gamma):
    z = np.exp(s)
    p, ps = Y
    return [ps, -gamma * z * ps + (1.0 - 0.5 * gamma * z) * p]


def _jac(s, Y, gamma):
    z = np.exp(s)
    return [[0.0, 1.0], [1.0 - 0.5 * gamma * z, -gamma * z]]


def ode_residual(z, phi, gamma=GAMMA):
    """Residual of the phi1 equation from samples on a uniform grid in ``ln z``.

    Derivatives are fourth-order central differences in ``s = ln z``; the
    first and last two nodes get ``nan``.
    """
    s = np.log(z)
    ds = np.diff(s)
    if not np.allclose(ds, ds[0], rtol=1e-8):
        raise ValueError("residual needs nodes uniform in ln z")
    h = ds[0]
    p = np.asarray(phi, dtype=float)
    res = np.full_like(p, np.nan)
    ps = (p[:-4] - 8 * p[1:-3] + 8 * p[3:-1] - p[4:]) / (12 * h)
    pss = (-p[:-4] + 16 * p[1:-3] - 30 * p[2:-2] + 16 * p[3:-1] - p[4:]) / (12 * h * h)
    zi = z[2:-2]
    res[2:-2] = pss + gamma * zi * ps - (1 - 0.5 * gamma * zi) * p[2:-2] + 1
    return res


@dataclass
class Phi1Solution:
    z_grid: np.ndarray
    phi: np.ndarray
    phi_s: np.ndarray
    lambda_dot_param: float
    gamma: float
    residual: np.ndarray
    fitted: tuple | None = None
    diagnostics: dict = field(default_factory=dict)
    _dense: object = field(default=None, repr=False)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z < self.z_grid[0] * (1 - 1e-12)) or np.any(z > self.z_grid[-1] * (1 + 1e-12)):
            raise ValueError("z outside the solved range")
        return self._dense(np.log(z))[0]


def solve_phi1(lambda_dot, z_max=200.0, tol=1e-8, z_min=Z_MIN, per_decade=400,
               gamma=GAMMA):
    """Integrate outward from ``z_min`` seeded by the inner expansion.

    ``tol`` is the target for the ODE residual; the integrator itself runs at
    a relative tolerance of ``min(tol, 1e-12)`` because the residual is taken
    from finite differences of its dense output.  Samples are returned on a
    grid uniform in ``ln z`` with ``per_decade`` nodes per decade.
    """
    if not 0 < lambda_dot < 1:
        raise ValueError("need 0 < lambda_dot < 1")
    if z_max < 10:
        raise ValueError("z_max must be at least 10")
    p0, ps0 = inner_expansion(z_min, lambda_dot, gamma)
    s0, s1 = np.log(z_min), np.log(z_max)
    rtol = min(tol, 1e-12)
    sol = solve_ivp(_rhs, (s0, s1), [float(p0), float(ps0)], method="LSODA",
                    rtol=rtol, atol=rtol * 1e-2, jac=_jac, dense_output=True,
                    args=(gamma,))
    if sol.status != 0 or not np.all(np.isfinite(sol.y)):
        good = np.isfinite(sol.y).all(axis=0)
        zlast = float(np.exp(sol.t[good][-1])) if np.any(good) else z_min
        raise NumericalError(f"phi1 integration failed ({sol.message}); valid up to z = {zlast:.6g}")
    n = int(np.ceil((s1 - s0) / np.log(10) * per_decade)) + 1
    s = np.linspace(s0, s1, n)
    z = np.exp(s)
    Y = sol.sol(s)
    res = ode_residual(z, Y[0], gamma)
    out = Phi1Solution(z_grid=z, phi=Y[0], phi_s=Y[1], lambda_dot_param=float(lambda_dot),
                       gamma=gamma, residual=res, _dense=sol.sol)
    out.diagnostics["nfev"] = int(sol.nfev)
    return out


def inner_log_coefficient(solution, z0=1e-4):
    """``d/d ln z`` of ``(phi - 1)/z`` at ``z0`` (expected ``-gamma/4``)."""
    h = 1e-2
    zs = z0 * np.exp(np.array([-2 * h, -h, h, 2 * h]))
    q = (solution(zs) - 1.0) / zs
    return (q[0] - 8 * q[1] + 8 * q[2] - q[3]) / (12 * h)


# --- outer homogeneous solutions ----------------------------------------------

def _series_coeffs(kind, gamma, kmax=60):
    # h1: a_{k+1} = ((k+1/2)^2 - 1) a_k / (gamma (k+1)); h2 has the opposite sign
    sign = 1.0 if kind == 1 else -1.0
    a = [1.0]
    for k in range(kmax):
        a.append(sign * a[-1] * ((k + 0.5) ** 2 - 1.0) / (gamma * (k + 1)))
    return np.array(a)


def _series_eval(z, kind, gamma):
    # optimally truncated asymptotic series: stop before the smallest term
    a = _series_coeffs(kind, gamma)
    total, dtotal = 0.0, 0.0
    prev = np.inf
    for k, ak in enumerate(a):
        term = ak * z ** (-k)
        if abs(term) > prev:
            break
        prev = abs(term)
        total += term
        dtotal += -k * term
    pre = z ** -0.5 if kind == 1 else np.exp(-gamma * z) * z ** -0.5
    dpre = -0.5 if kind == 1 else (-gamma * z - 0.5)
    # value and z d/dz of pre * series
    return pre * total, pre * (dpre * total + dtotal)


def homogeneous_basis(z, gamma=GAMMA, z_seed=Z_SEED):
    """Columns ``h1(z), h2(z)``; series above ``z_seed``, inward integration below."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty((z.size, 2))
    hi = z >= z_seed
    for j, kind in enumerate((1, 2)):
        for i in np.nonzero(hi)[0]:
            out[i, j] = _series_eval(z[i], kind, gamma)[0]
    lo = ~hi
    if np.any(lo):
        s_lo = np.log(z[lo])
        for j, kind in enumerate((1, 2)):
            v, vs = _series_eval(z_seed, kind, gamma)
            sol = solve_ivp(_rhs_homogeneous, (np.log(z_seed), s_lo.min()), [v, vs],
                            method="Radau", rtol=1e-12, atol=1e-30, jac=_jac,
                            dense_output=True, args=(gamma,))
            if sol.status != 0:
                raise NumericalError(f"homogeneous solution h{kind}: {sol.message}")
            out[lo, j] = sol.sol(s_lo)[0]
    return out


@dataclass(frozen=True)
class OuterFit:
    c: float
    c_bar: float
    fit_residual: float
    particular: float
    window: tuple


def fit_outer(solution, z_lo=5.0, free_particular=False):
    """Least-squares fit of ``A/z + c h1 + cbar h2`` on ``[z_lo, z_max]``.

    ``A`` is held at ``2/gamma`` unless ``free_particular``.  The residual is
    relative to ``max |phi|`` over the window.
    """
    z_max = solution.z_grid[-1]
    if z_max < 10:
        raise ValueError("solution must extend to z >= 10")
    sel = solution.z_grid >= z_lo
    z, p = solution.z_grid[sel], solution.phi[sel]
    H = homogeneous_basis(z, solution.gamma)
    A_fixed = 2.0 / solution.gamma
    if free_particular:
        M = np.column_stack([1.0 / z, H])
        target = p
    else:
        M = H
        target = p - A_fixed / z
    scale = np.linalg.norm(M, axis=0)
    if np.any(scale == 0):
        raise NumericalError("degenerate outer basis; enlarge z_max")
    coef, *_ = np.linalg.lstsq(M / scale, target, rcond=None)
    coef = coef / scale
    cond = np.linalg.cond(M / scale)
    if cond > 1e10:
        raise NumericalError(f"outer fit ill-conditioned (cond={cond:.2e}); use a larger z_max")
    model = M @ coef
    resid = float(np.max(np.abs(model - target)) / np.max(np.abs(p)))
    if free_particular:
        A, c, cb = coef
    else:
        A, (c, cb) = A_fixed, coef
    return OuterFit(c=float(c), c_bar=float(cb), fit_residual=resid, particular=float(A),
                    window=(float(z_lo), float(z_max)))


def outer_leading(z, fit, gamma=GAMMA):
    """``c/sqrt(z) + 2/(gamma z) + cbar e^(-gamma z)/sqrt(z)``, leading terms only."""
    z = np.asarray(z, dtype=float)
    return fit.c / np.sqrt(z) + 2.0 / (gamma * z) + fit.c_bar * np.exp(-gamma * z) / np.sqrt(z)


def outer_model(z, fit, gamma=GAMMA):
    """The fitted outer solution with the full homogeneous solutions."""
    H = homogeneous_basis(z, gamma)
    return fit.particular / np.asarray(z, dtype=float) + H @ np.array([fit.c, fit.c_bar])


@dataclass
class DecayReport:
    conclusive: bool
    exponent: float | None
    message: str
    values: np.ndarray | None = None


def far_field_decay_check(lambda_dot, y_samples, regime_min=1.0):
    """Fit the exponent of ``lambda'^2 xi10(y) phi1(lambda'^4 y^2)`` in ``y`` (expect -1)."""
    from .profiles import xi10

    y = np.asarray(y_samples, dtype=float)
    if y.size < 2 or np.ptp(y) == 0:
        return DecayReport(False, None, "need at least two distinct radii")
    if np.min(lambda_dot ** 2 * y) < regime_min:
        return DecayReport(False, None, "samples reach the inner regime lambda'^2 y < 1")
    z = lambda_dot ** 4 * y * y
    sol = solve_phi1(lambda_dot, z_max=max(float(z.max()) * 1.01, 10.0), per_decade=20)
    prod = lambda_dot ** 2 * xi10(y) * sol(z)
    if np.any(prod == 0) or np.any(np.sign(prod) != np.sign(prod[0])):
        return DecayReport(False, None, "product changes sign over the samples", prod)
    slope = np.polyfit(np.log(y), np.log(np.abs(prod)), 1)[0]
    return DecayReport(True, float(slope), "ok", prod)
