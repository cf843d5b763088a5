"""Comparison of ``lambda/(t*-t)`` with the parameter-free asymptotic law."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..profiles import GAMMA
from .artifacts import write_csv

FIGURE_HEADER = ("neg_log_tstar_minus_t", "lambda_over_tstar_minus_t", "analytic",
                 "relative_deviation")


def analytic_ratio(x, gamma=GAMMA):
    """``(2 gamma x)^(-1/2)`` at ``x = -ln(t*-t)``; equals ``sqrt(2/3) x^(-1/2)`` at 3/4."""
    x = np.asarray(x, dtype=float)
    if gamma == 0.75:
        return np.sqrt(2.0 / 3.0) / np.sqrt(x)
    return 1.0 / np.sqrt(2.0 * gamma * x)


@dataclass
class CompareReport:
    neg_log_tau: np.ndarray
    ratio: np.ndarray
    analytic: np.ndarray
    deviation: np.ndarray
    t_star: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def max_deviation(self):
        return float(np.max(np.abs(self.deviation))) if self.deviation.size else float("nan")

    @property
    def median_deviation(self):
        return float(np.median(np.abs(self.deviation))) if self.deviation.size else float("nan")

    @property
    def reachable_range(self):
        if not self.neg_log_tau.size:
            return None
        return float(self.neg_log_tau.min()), float(self.neg_log_tau.max())

    def summary(self):
        return {"t_star": self.t_star, "samples": int(self.deviation.size),
                "max_deviation": self.max_deviation,
                "median_deviation": self.median_deviation,
                "reachable_neg_log_tstar_minus_t": self.reachable_range,
                **self.diagnostics}


def figure_data(t, lam, t_star, gamma=GAMMA, tau=None):
    """Samples with ``0 < t* - t < 1`` (where ``-ln(t*-t) > 0``).

    Samples at or past ``t*`` are dropped and counted; so are samples with
    ``t* - t >= 1``, where the law has no meaning.  ``tau`` overrides
    ``t* - t`` when it is known more accurately than the difference.
    """
    t = np.asarray(t, dtype=float)
    lam = np.asarray(lam, dtype=float)
    tau = t_star - t if tau is None else np.asarray(tau, dtype=float)
    past = tau <= 0
    early = tau >= 1
    keep = ~past & ~early & np.isfinite(lam)
    x = -np.log(tau[keep])
    ratio = lam[keep] / tau[keep]
    an = analytic_ratio(x, gamma)
    dev = ratio / an - 1.0
    return CompareReport(x, ratio, an, dev, float(t_star),
                         {"dropped_past_t_star": int(np.count_nonzero(past)),
                          "dropped_t_star_minus_t_ge_1": int(np.count_nonzero(early & ~past)),
                          "dropped_nonfinite": int(np.count_nonzero(~np.isfinite(lam) & ~past
                                                                    & ~early))})


def emit_figure_data(series, t_star=None, path=None, gamma=GAMMA, window=None):
    """Build the comparison for a collapsing series and optionally write its CSV.

    Without ``t_star`` the series' own estimate is used, with ``t* - t`` taken
    from its relative times.  ``window = (lam_lo, lam_hi)`` keeps only samples
    with ``lam_lo <= lambda <= lam_hi``.
    """
    if t_star is None:
        if series.t_star_offset is None:
            raise ValueError("figure data needs a collapse-time estimate")
        t_star, tau = series.t_star_estimate, series.tau()
    else:
        tau = t_star - np.asarray(series.t, dtype=float)
    t, lam = np.asarray(series.t, dtype=float), np.asarray(series.lam, dtype=float)
    if window is not None:
        m = (lam >= window[0]) & (lam <= window[1])
        t, lam, tau = t[m], lam[m], tau[m]
    rep = figure_data(t, lam, t_star, gamma, tau=tau)
    if path is not None:
        write_csv(path, FIGURE_HEADER, [rep.neg_log_tau, rep.ratio, rep.analytic, rep.deviation])
    return rep
