from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..modulation import J
from ..profiles import GAMMA, chi
from .config import SimConfig
from .extract import ExtractionError, extract_lambda_curvature, extract_lambda_orthogonality
from .solver import (BlowupError, MaxLevelsError, energy, init_state, refine_if_needed,
                     stable_dt, step)


@dataclass
class LawFit:
    slope: float
    slope_fixed: float
    c: float
    lam_range: tuple
    n: int


@dataclass
class LambdaSeries:
    t: np.ndarray
    lam: np.ndarray
    method: str
    lam_curvature: np.ndarray
    lam_orthogonality: np.ndarray
    # times relative to the last sample, accumulated from the step sizes so
    # they stay accurate when t* - t drops below the resolution of t itself
    t_rel: np.ndarray | None = None
    t_star_estimate: float | None = None
    t_star_bracket: tuple | None = None
    # t* - t_last and the bracket in the same relative form
    t_star_offset: float | None = None
    t_star_offset_bracket: tuple | None = None
    law_fit: LawFit | None = None

    def __post_init__(self):
        if self.t_rel is None:
            self.t_rel = np.asarray(self.t, dtype=float) - float(self.t[-1]) if len(self.t) else \
                np.zeros(0)

    def tau(self):
        """``t* - t`` per sample (needs a collapse estimate)."""
        if self.t_star_offset is None:
            raise ValueError("series has no collapse-time estimate")
        return self.t_star_offset - self.t_rel

    @property
    def collapsing(self):
        return self.t_star_estimate is not None


@dataclass
class SimulationResult:
    series: LambdaSeries
    energy_t: np.ndarray
    energy: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    state: object = None


def lambda_dot(t, lam):
    return np.gradient(lam, t)


def fit_collapse_law(t, lam, gamma=GAMMA, decades=1.0):
    """Fit ``lambda'^-2 = A + B ln lambda`` over the last ``decades`` of lambda.

    Returns the free slope ``B``, plus ``c`` from the fit with ``B`` fixed at
    ``-2 gamma`` (the form ``lambda'^-2 = -2 gamma ln(c lambda)``).
    """
    t = np.asarray(t, dtype=float)
    lam = np.asarray(lam, dtype=float)
    ld = lambda_dot(t, lam)
    lo = lam[-1]
    sel = (lam <= lo * 10 ** decades) & (ld < 0)
    if np.count_nonzero(sel) < 5:
        return None
    x = np.log(lam[sel])
    y = ld[sel] ** -2.0
    slope = np.polyfit(x, y, 1)[0]
    b = np.mean(y + 2 * gamma * x)
    c = np.exp(-b / (2 * gamma))
    return LawFit(slope=float(slope), slope_fixed=-2 * gamma, c=float(c),
                  lam_range=(float(lam[sel].min()), float(lam[sel].max())),
                  n=int(np.count_nonzero(sel)))


def estimate_t_star(t, lam, gamma=GAMMA, fit=None):
    """Collapse time from the fixed-slope law fit and a bracket from extrapolation.

    Estimate: ``t_last + sqrt(2 gamma) lambda J(ln(1/(c lambda)))`` with the fitted
    ``c``.  Bracket: the linear extrapolation ``t_last + lambda/|lambda'|`` below
    and ``(lambda/|lambda'|)(1 + g lambda'^2)`` above with ``g`` the larger of
    gamma and the fitted ``-slope/2``.
    """
    if fit is None:
        fit = fit_collapse_law(t, lam, gamma)
    if fit is None:
        return None, None
    ld = lambda_dot(t, lam)
    tl, ll, vl = float(t[-1]), float(lam[-1]), float(ld[-1])
    if not vl < 0:
        return None, None
    a = np.log(1.0 / (fit.c * ll))
    est = tl + np.sqrt(2 * gamma) * ll * J(a) if a > 0 else None
    base = ll / abs(vl)
    g = max(gamma, -fit.slope / 2)
    return est, (tl + base, tl + base * (1 + g * vl * vl))


def run_simulation(config: SimConfig, perturbation=None, keep_state=False, gamma=GAMMA,
                   progress=None):
    """Evolve until ``lambda < lambda_min``, ``t >= t_max`` or a failure.

    The curvature extractor is evaluated every step (it drives refinement);
    samples of both extractors and the energy are stored every
    ``sample_every`` steps and at the end.
    """
    wall = time.perf_counter()
    state = init_state(config, perturbation)
    ts, gaps, lc, lo, es = [], [], [], [], []
    since = [0.0]
    use_orth = config.extractor in ("orthogonality", "both")
    status = "t_max"
    error = None

    def sample(lam_c):
        ts.append(state.time)
        gaps.append(since[0])
        since[0] = 0.0
        lc.append(lam_c)
        if use_orth:
            try:
                lo.append(extract_lambda_orthogonality(state, lam_c, config.y_cut))
            except ExtractionError:
                lo.append(np.nan)
        else:
            lo.append(np.nan)
        es.append(energy(state))

    while True:
        try:
            lam_c = extract_lambda_curvature(state)
        except ExtractionError as exc:
            status, error = "extraction_failed", str(exc)
            break
        if state.steps % config.sample_every == 0:
            sample(lam_c)
            if progress is not None:
                progress(state, lam_c)
        if lam_c < config.lambda_min:
            status = "collapsed"
            break
        if state.time >= config.t_max:
            break
        try:
            refine_if_needed(state, lam_c)
            dt = stable_dt(state)
            step(state, dt)
            since[0] += dt
        except MaxLevelsError as exc:
            status, error = "max_levels", str(exc)
            break
        except BlowupError as exc:
            status, error = "blowup", str(exc)
            break
    if status in ("collapsed", "t_max", "max_levels") and (not ts or ts[-1] != state.time):
        sample(lam_c)
    state.max_abs_u = max(float(np.max(np.abs(lv.u))) for lv in state.levels)

    t = np.array(ts)
    lam_c_arr = np.array(lc)
    lam_o_arr = np.array(lo)
    method = "orthogonality" if use_orth and np.all(np.isfinite(lam_o_arr)) else "curvature"
    lam = lam_o_arr if method == "orthogonality" else lam_c_arr
    g = np.array(gaps)
    # t_rel[i] = -(gaps[i+1] + ... + gaps[-1])
    t_rel = -np.concatenate((np.cumsum(g[:0:-1])[::-1], [0.0])) if g.size else np.zeros(0)
    series = LambdaSeries(t=t, lam=lam, method=method, lam_curvature=lam_c_arr,
                          lam_orthogonality=lam_o_arr, t_rel=t_rel)
    if status == "collapsed":
        series.law_fit = fit_collapse_law(t_rel, lam, gamma)
        off, off_br = estimate_t_star(t_rel, lam, gamma, series.law_fit)
        series.t_star_offset, series.t_star_offset_bracket = off, off_br
        if off is not None:
            series.t_star_estimate = float(t[-1]) + off
        if off_br is not None:
            series.t_star_bracket = (float(t[-1]) + off_br[0], float(t[-1]) + off_br[1])
    E = np.array(es)
    diag = {
        "status": status,
        "error": error,
        "steps": state.steps,
        "levels": len(state.levels),
        "h_finest": state.h_finest,
        "refinements": state.refinements,
        "t_final": state.time,
        "lambda_final": float(lam[-1]) if lam.size else None,
        "max_abs_u": state.max_abs_u,
        "energy_relative_drift": float(np.max(np.abs(E - E[0])) / abs(E[0])) if E.size else None,
        "wall_seconds": time.perf_counter() - wall,
    }
    if lam.size > 3 and status == "collapsed":
        ld = lambda_dot(t_rel, lam)
        r_f = state.levels[-1].r
        w = state.levels[-1].u - chi(r_f / lam[-1])
        diag["remainder_over_lambda_dot_sq"] = float(np.max(np.abs(w)) / ld[-1] ** 2)
    return SimulationResult(series=series, energy_t=t, energy=E, diagnostics=diag,
                            state=state if keep_state else None)
