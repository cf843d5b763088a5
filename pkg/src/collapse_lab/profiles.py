"""Closed-form radial profiles and the operators B1, B2.

Every profile is written in the variable ``x = y**2``.  Derivatives are hand
derived in ``x`` and converted with

    p'(y)  = 2 y p_x
    p''(y) = 2 p_x + 4 x p_xx

which keeps the formulas short and maps directly onto the rational moment
integrals used in :mod:`collapse_lab.quadrature`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

GAMMA = 0.75

# below this radius w2 is evaluated from its Taylor series
W2_SERIES_CUTOFF = 1e-3


class NumericalError(RuntimeError):
    """A numerical sub-step (quadrature, root find, ODE solve) failed."""


class Kind(str, enum.Enum):
    chi = "chi"
    zeta = "zeta"
    xi10 = "xi10"
    eta1 = "eta1"
    eta2 = "eta2"
    w2 = "w2"


def _as_radius(y):
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or np.any(np.isnan(y)):
        raise ValueError("radius must be non-negative")
    return y


# --- x-space closed forms: each returns (p, p_x, p_xx) -----------------------

def _chi_x(x):
    t = 1.0 + x
    return (1.0 - x) / t, -2.0 / t**2, 4.0 / t**3


def _zeta_x(x):
    t = 1.0 + x
    return 4.0 * x / t**2, 4.0 * (1.0 - x) / t**3, 8.0 * (x - 2.0) / t**4


def _xi10_x(x):
    t = 1.0 + x
    return -(x**2) / t**2, -2.0 * x / t**3, (4.0 * x - 2.0) / t**4


def _eta1_x(x):
    p, px, pxx = _zeta_x(x)
    return 0.25 * p, 0.25 * px, 0.25 * pxx


def _eta2_x(x):
    t = 1.0 + x
    L = np.log(x)
    p = x / 4 + 1.5 - 13.0 / (4 * t) - 1.0 / (4 * x * t) + 3 * x * L / t**2
    px = (0.25 + 13.0 / (4 * t**2) + (1 + 2 * x) / (4 * x**2 * t**2)
          + 3 * (1 + x + L * (1 - x)) / t**3)
    pxx = (-13.0 / (2 * t**3) - (1 + 3 * x + 3 * x**2) / (2 * x**3 * t**3)
           + 3 * (1 / x - 2 - 3 * x + 2 * L * (x - 2)) / t**4)
    return p, px, pxx


# --- the dilogarithm-type integral -------------------------------------------

def log_over_one_plus(x, epsabs=1e-13):
    """Return ``I(x) = int_0^x ln(s)/(1+s) ds`` for ``x >= 0``.

    The integral is split at ``s = 1``.  The part below 1 is taken with
    ``s = exp(-t)`` which removes the logarithmic endpoint; the part above 1
    is mapped onto ``[0, 1]`` so that all abscissae share one interval and
    the whole array is integrated in a single vectorized call.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0):
        raise ValueError("I(x) needs x >= 0")
    out = np.zeros_like(x)
    pos = x > 0
    if not np.any(pos):
        return out
    xp = x[pos]

    # s in (0, min(x, 1)]:  s = exp(-(a + v)),  a = -ln min(x, 1)
    a = -np.log(np.minimum(xp, 1.0))

    def lower(v):
        tt = a + v
        return -tt * np.exp(-tt) / (1.0 + np.exp(-tt))

    low, err_low, info_low = integrate.quad_vec(
        lower, 0.0, np.inf, epsabs=epsabs, epsrel=1e-12, full_output=True)

    # s in [1, x] for x > 1:  s = 1 + (x - 1) u
    d = np.maximum(xp - 1.0, 0.0)

    def upper(u):
        s = 1.0 + d * u
        return d * np.log(s) / (1.0 + s)

    up, err_up, info_up = integrate.quad_vec(
        upper, 0.0, 1.0, epsabs=epsabs, epsrel=1e-12, full_output=True)

    if not (info_low.success and info_up.success):
        raise NumericalError(
            f"quadrature of ln(s)/(1+s) did not converge: "
            f"err_low={err_low:.3g} ({info_low.message}), "
            f"err_up={err_up:.3g} ({info_up.message})")
    out[pos] = low + up
    return out


# --- w2 = c1 eta1 + c2 eta2 ---------------------------------------------------

def _c2_series(x, gamma):
    # gamma * int_0^x s^3/(1+s)^4 ds, good for x < 0.5
    total = np.zeros_like(x)
    term_coeff = 1.0
    xp = x**4
    for k in range(80):
        total += term_coeff * xp / (k + 4)
        xp = xp * (-x)
        term_coeff = term_coeff * (k + 4) / (k + 1)
    return gamma * total


def eval_w2_pieces(y, gamma=GAMMA):
    """Return the variation-of-constants coefficients ``(c1, c2)`` at ``y > 0``.

    ``c1`` carries the integration constant ``+4`` of the printed formula, so
    ``c1(0) = -gamma``.  ``c2`` is the antiderivative of
    ``-y eta1 (2 gamma xi10)`` vanishing at the origin::

        c2 = gamma {ln(1+y^2) + 3/(1+y^2) - 3/(2(1+y^2)^2) + 1/(3(1+y^2)^3) - 11/6}

    (the square on the third denominator is required for ``L w2 = 2 gamma xi10``).
    """
    y = _as_radius(y)
    if np.any(y == 0):
        raise ValueError("c1 and c2 contain log(y) terms; need y > 0")
    x = y * y
    t = 1.0 + x
    L = np.log(x)
    dilog = log_over_one_plus(x.ravel()).reshape(x.shape)
    c1 = -gamma * (x**2 / 8 + x - 4 / t + 1 / t**2 - x**3 * L / t**3
                   - 3 * x**2 * L / (2 * t**2) - 3 * x * L / t + 3 * dilog + 4)
    c2 = np.where(
        x < 0.5,
        _c2_series(np.minimum(x, 0.5), gamma),
        gamma * (np.log1p(x) + 3 / t - 1.5 / t**2 + 1 / (3 * t**3) - 11.0 / 6))
    return c1, c2


def eval_w2_pieces_as_printed(y, gamma=GAMMA):
    """``(c1, c2)`` with ``c2`` transcribed literally, ``-3/(2(1+y^2))``.

    Kept only to document the discrepancy; it does not solve ``L w2 = 2 gamma xi10``.
    """
    c1, _ = eval_w2_pieces(y, gamma)
    t = 1.0 + np.asarray(y, dtype=float) ** 2
    c2 = gamma * (np.log(t) + 3 / t - 1.5 / t + 1 / (3 * t**3) - 11.0 / 6)
    return c1, c2


def _w2_x(x, gamma=GAMMA):
    x = np.asarray(x, dtype=float)
    p = np.empty_like(x)
    px = np.empty_like(x)
    pxx = np.empty_like(x)
    small = x < W2_SERIES_CUTOFF**2
    if np.any(small):
        xs = x[small]
        # w2 = -g x + 2 g x^2 - (47/16) g x^3 + O(x^4 ln x)
        p[small] = gamma * (-xs + 2 * xs**2 - 47.0 / 16 * xs**3)
        px[small] = gamma * (-1 + 4 * xs - 141.0 / 16 * xs**2)
        pxx[small] = gamma * (4 - 141.0 / 8 * xs)
    big = ~small
    if np.any(big):
        xb = x[big]
        c1, c2 = eval_w2_pieces(np.sqrt(xb), gamma)
        e1, e1x, e1xx = _eta1_x(xb)
        e2, e2x, e2xx = _eta2_x(xb)
        rhs = 2 * gamma * _xi10_x(xb)[0]
        p[big] = c1 * e1 + c2 * e2
        px[big] = c1 * e1x + c2 * e2x
        pxx[big] = c1 * e1xx + c2 * e2xx - rhs / (4 * xb)
    return p, px, pxx


_X_FORMS = {
    Kind.chi: _chi_x,
    Kind.zeta: _zeta_x,
    Kind.xi10: _xi10_x,
    Kind.eta1: _eta1_x,
    Kind.eta2: _eta2_x,
    Kind.w2: _w2_x,
}


@dataclass(frozen=True)
class ClosedFormProfile:
    """A radial function with closed-form value and first two y-derivatives."""

    kind: Kind

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))

    def _xforms(self, y):
        y = _as_radius(y)
        if self.kind in (Kind.eta2,) and np.any(y == 0):
            raise ValueError("eta2 is singular at the origin")
        return y, _X_FORMS[self.kind](y * y)

    def eval(self, y):
        return self._xforms(y)[1][0]

    def deriv1(self, y):
        y, (_, px, _) = self._xforms(y)
        return 2 * y * px

    def deriv2(self, y):
        y, (_, px, pxx) = self._xforms(y)
        return 2 * px + 4 * y * y * pxx


CHI = ClosedFormProfile(Kind.chi)
ZETA = ClosedFormProfile(Kind.zeta)
XI10 = ClosedFormProfile(Kind.xi10)
ETA1 = ClosedFormProfile(Kind.eta1)
ETA2 = ClosedFormProfile(Kind.eta2)
W2 = ClosedFormProfile(Kind.w2)


def eval_profile(kind, y):
    return ClosedFormProfile(Kind(kind)).eval(y)


class Constant:
    """Constant radial profile; B1 and B2 annihilate it."""

    def __init__(self, value=1.0):
        self.value = float(value)

    def eval(self, y):
        return np.full_like(np.asarray(y, dtype=float), self.value)

    def deriv1(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    deriv2 = deriv1


def apply_B1(profile, y):
    """``B1 p = -y p' - (y d/dy)^2 p = -2 y p' - y^2 p''``."""
    y = _as_radius(y)
    return -2 * y * profile.deriv1(y) - y * y * profile.deriv2(y)


def apply_B2(profile, y):
    """``B2 p = y p'``."""
    y = _as_radius(y)
    return y * profile.deriv1(y)


# --- nonlinearity -------------------------------------------------------------

def f(u):
    """The double-well nonlinearity ``2u(1-u^2)``."""
    u = np.asarray(u, dtype=float)
    return 2 * u * (1 - u * u)


def fprime(u):
    u = np.asarray(u, dtype=float)
    return 2 - 6 * u * u


def eval_nonlinearity(u):
    return f(u)


def N_from_definition(chi_val, w):
    """Nonlinear remainder ``f(chi+w) - f(chi) - f'(chi) w``."""
    chi_val = np.asarray(chi_val, dtype=float)
    w = np.asarray(w, dtype=float)
    return f(chi_val + w) - f(chi_val) - fprime(chi_val) * w


def eval_N(chi_val, w):
    """Closed form of the remainder, ``-6 chi w^2 - 2 w^3``."""
    chi_val = np.asarray(chi_val, dtype=float)
    w = np.asarray(w, dtype=float)
    return -6 * chi_val * w * w - 2 * w**3


@dataclass(frozen=True)
class NonlinearityTriple:
    f: Callable = f
    fprime: Callable = fprime
    N: Callable = eval_N


NONLINEARITY = NonlinearityTriple()


# scalar helpers used across modules

def chi(y):
    return CHI.eval(y)


def zeta(y):
    return ZETA.eval(y)


def xi10(y):
    return XI10.eval(y)
