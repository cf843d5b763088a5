"""Dynamics of the scale parameter: ``lambda lambda'' = gamma lambda'^4``.

The first integral is ``lambda'^2 ln(1/(c lambda)) = 1/(2 gamma)``.  For a
collapsing start (``lambda'_0 < 0``) the remaining time to collapse has the
closed form

    t* - t = sqrt(2 gamma) lambda J(a),   J(a) = int_0^inf sqrt(a+s) e^-s ds,

with ``a = ln(1/(c lambda))``; ``J(a) = e^a Gamma(3/2, a)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .profiles import GAMMA, NumericalError


@dataclass(frozen=True)
class ModulationState:
    t: float
    lam: float
    lam_dot: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")


@dataclass(frozen=True)
class ClosedFormConstants:
    c: float
    t_star: float | None = None


@dataclass
class ModulationTrajectory:
    t: np.ndarray
    lam: np.ndarray
    lam_dot: np.ndarray
    gamma: float
    extended_coeff: float | None
    # "collapsed", "expanding", "t_end" or "max_steps"
    status: str
    blowup_bracket: tuple | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def states(self):
        return [ModulationState(*s) for s in zip(self.t, self.lam, self.lam_dot)]


def _accel(lam, lam_dot, gamma, kappa):
    v2 = lam_dot * lam_dot
    return (gamma * v2 * v2 - kappa * v2 * v2 * v2) / lam


def _rk4(lam, v, dt, gamma, kappa):
    a1 = _accel(lam, v, gamma, kappa)
    l2, v2 = lam + 0.5 * dt * v, v + 0.5 * dt * a1
    a2 = _accel(l2, v2, gamma, kappa)
    l3, v3 = lam + 0.5 * dt * v2, v + 0.5 * dt * a2
    a3 = _accel(l3, v3, gamma, kappa)
    l4, v4 = lam + dt * v3, v + dt * a3
    a4 = _accel(l4, v4, gamma, kappa)
    return (lam + dt / 6 * (v + 2 * v2 + 2 * v3 + v4),
            v + dt / 6 * (a1 + 2 * a2 + 2 * a3 + a4))


def local_collapse_bracket(t, lam, lam_dot, gamma=GAMMA):
    """Bounds on the collapse time from a single state of the pure law.

    With ``a = 1/(2 gamma lam_dot^2)`` one has ``sqrt(a) <= J(a) <= sqrt(a) + 1/(2 sqrt(a))``,
    so ``t* - t`` lies in ``[lam/|lam_dot|, (lam/|lam_dot|)(1 + gamma lam_dot^2)]``.
    """
    base = lam / abs(lam_dot)
    return t + base, t + base * (1.0 + gamma * lam_dot * lam_dot)


def integrate_modulation(lambda0, lambda_dot0, dt=1e-3, t_end=np.inf,
                         extended_coeff=None, gamma=GAMMA, lambda_min=1e-6,
                         eta=1e-2, lambda_dot_max=1e4, max_steps=2_000_000):
    """Classical RK4 for ``lambda'' = (gamma lambda'^4 - k lambda'^6) / lambda``.

    The step is ``min(dt, eta lambda/|lambda'|, eta |lambda'|/|lambda''|)`` so the
    relative change of both ``lambda`` and ``lambda'`` per step stays below ``eta``.
    Integration stops when ``lambda < lambda_min`` (collapse), when
    ``|lambda'| > lambda_dot_max`` (the expanding branch) or at ``t_end``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not lambda0 > 0:
        raise ValueError("lambda0 must be positive")
    kappa = 0.0 if extended_coeff is None else float(extended_coeff)
    t, lam, v = 0.0, float(lambda0), float(lambda_dot0)
    ts, ls, vs = [t], [lam], [v]
    status = "max_steps"
    bracket = None
    for _ in range(max_steps):
        if t >= t_end:
            status = "t_end"
            break
        if lam < lambda_min:
            status = "collapsed"
            break
        if abs(v) > lambda_dot_max:
            status = "expanding"
            break
        h = dt
        if v != 0.0:
            h = min(h, eta * lam / abs(v))
            acc = _accel(lam, v, gamma, kappa)
            if acc != 0.0:
                h = min(h, eta * abs(v) / abs(acc))
        h = min(h, t_end - t)
        lam_new, v_new = _rk4(lam, v, h, gamma, kappa)
        if not lam_new > 0 or not np.isfinite(v_new):
            # lambda would cross zero inside the step
            status = "collapsed"
            bracket = (t, t + h)
            break
        t, lam, v = t + h, lam_new, v_new
        ts.append(t)
        ls.append(lam)
        vs.append(v)
    if status == "collapsed" and bracket is None:
        bracket = local_collapse_bracket(t, lam, v, gamma)
    traj = ModulationTrajectory(np.array(ts), np.array(ls), np.array(vs), gamma,
                                extended_coeff, status, bracket)
    traj.diagnostics["steps"] = len(ts) - 1
    return traj


def closed_form_c(lambda0, lambda_dot0, gamma=GAMMA):
    """``c = exp(-1/(2 gamma lambda'_0^2)) / lambda_0`` (``exp(-2/(3 lambda'^2))`` at 3/4)."""
    if lambda_dot0 == 0:
        raise ValueError("c is undefined for lambda'_0 = 0")
    return np.exp(-1.0 / (2.0 * gamma * lambda_dot0 ** 2)) / lambda0


def first_integral(state, c):
    """``lambda'^2 ln(1/(c lambda))``."""
    lam, v = (state.lam, state.lam_dot) if isinstance(state, ModulationState) else state
    lam = np.asarray(lam, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(c * lam >= 1):
        raise ValueError("first integral needs c lambda < 1")
    return v * v * np.log(1.0 / (c * lam))


def J(a):
    """``int_0^inf sqrt(a+s) e^-s ds`` by adaptive quadrature."""
    val, err = integrate.quad(lambda s: np.sqrt(a + s) * np.exp(-s), 0.0, np.inf,
                              epsabs=0.0, epsrel=1e-13, limit=200)
    if not np.isfinite(val) or err > 1e-10 * max(val, 1.0):
        raise NumericalError(f"J({a}) quadrature error {err:.2e}")
    return val


@dataclass(frozen=True)
class CollapseTime:
    t_star: float
    rough_estimate: float


def collapse_time(lambda0, lambda_dot0, gamma=GAMMA):
    """``t* = sqrt(2 gamma) int_0^lambda0 sqrt(ln(1/(c lambda))) d lambda``.

    The quadrature is done after ``lambda = lambda0 e^-s``.  Also returns the
    rough estimate ``lambda0/|lambda'_0|``.
    """
    if not lambda_dot0 < 0:
        raise ValueError("collapse time needs lambda'_0 < 0")
    a = 1.0 / (2.0 * gamma * lambda_dot0 ** 2)
    return CollapseTime(np.sqrt(2 * gamma) * lambda0 * J(a), lambda0 / abs(lambda_dot0))


def time_to_collapse(lam, c, gamma=GAMMA):
    """``t* - t`` as a function of ``lambda`` on the exact trajectory."""
    return np.sqrt(2 * gamma) * lam * J(np.log(1.0 / (c * lam)))


def exact_lambda(tau, c, gamma=GAMMA):
    """Invert :func:`time_to_collapse`: ``lambda`` at ``t* - t = tau``."""
    if not tau > 0:
        raise ValueError("need t* - t > 0")

    def g(s):
        lam = np.exp(-s) / c
        return np.log(time_to_collapse(lam, c, gamma)) - np.log(tau)

    guess = asymptotic_lambda_tau(min(tau, 0.5), gamma) if tau < 1 else tau
    s0 = -np.log(c * guess)
    lo, hi = max(s0 - 5.0, 1e-12), s0 + 5.0
    while g(lo) < 0:
        lo = max(lo / 2, 1e-300)
        if lo < 1e-200:
            raise ValueError("tau exceeds the collapse time of this trajectory")
    while g(hi) > 0:
        hi += 10.0
    s = optimize.brentq(g, lo, hi, xtol=1e-15, rtol=1e-15)
    return np.exp(-s) / c


def asymptotic_lambda_tau(tau, gamma=GAMMA):
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0) or np.any(tau >= 1):
        raise ValueError("asymptotic law needs 0 < t* - t < 1")
    return tau / (np.sqrt(2 * gamma) * np.sqrt(-np.log(tau)))


def asymptotic_lambda(t, t_star, gamma=GAMMA):
    """``sqrt(2/3) (t*-t) / sqrt(-ln(t*-t))`` (written for general gamma)."""
    return asymptotic_lambda_tau(np.asarray(t_star, dtype=float) - np.asarray(t, dtype=float),
                                 gamma)


@dataclass
class CaseAReport:
    conclusive: bool
    message: str
    t_star: float | None = None
    exponent: float | None = None
    amplitude: float | None = None
    expected_amplitude: float | None = None


def case_a_asymptotics(traj, window=(1e-6, 1e-2)):
    """Fit ``1 - c lambda = A (t* - t)^p`` near the point where ``c lambda -> 1``.

    ``t*``, ``A`` and ``p`` are all fitted; ``c`` comes from the initial state.
    Expected: ``p = 2/3`` and ``A = (3 c / (2 sqrt(2 gamma)))^(2/3)``.
    """
    v0 = traj.lam_dot[0]
    if not v0 > 0:
        return CaseAReport(False, "initial lambda' is not positive (collapsing branch)")
    c = closed_form_c(traj.lam[0], v0, traj.gamma)
    d = 1.0 - c * traj.lam
    sel = (d > window[0]) & (d < window[1])
    if np.count_nonzero(sel) < 8 or d[-1] > window[0] * 10:
        return CaseAReport(False, "trajectory never approached c lambda = 1 closely enough")
    t = traj.t[sel]
    logd = np.log(d[sel])
    t0 = traj.t[-1] + (2.0 / 3.0) * d[-1] / (c * traj.lam_dot[-1])

    def model(tt, ts, loga, p):
        return loga + p * np.log(np.maximum(ts - tt, 1e-300))

    p0 = (t0 + 1e-12, 0.0, 2.0 / 3.0)
    try:
        popt, _ = optimize.curve_fit(model, t, logd, p0=p0, maxfev=20000)
    except RuntimeError as exc:
        return CaseAReport(False, f"fit failed: {exc}")
    expected = (3.0 * c / (2.0 * np.sqrt(2.0 * traj.gamma))) ** (2.0 / 3.0)
    return CaseAReport(True, "ok", t_star=popt[0], exponent=popt[2],
                       amplitude=float(np.exp(popt[1])), expected_amplitude=expected)


def fit_lambda_dot_exponent(traj, c=None):
    """Slope of ``ln|lambda'|`` against ``ln ln(1/(c lambda))`` (expect -1/2)."""
    if c is None:
        c = closed_form_c(traj.lam[0], traj.lam_dot[0], traj.gamma)
    L = np.log(np.log(1.0 / (c * traj.lam)))
    return np.polyfit(L, np.log(np.abs(traj.lam_dot)), 1)[0]
