"""Radial integrals over the measure ``y dy`` on ``[0, inf)``.

Two independent paths are provided.  The exact path writes each integrand in
``x = y**2`` as ``P(x) / (1+x)**n`` with rational coefficients and reduces it
to a sum of moments

    int_0^inf x^m / (1+x)^n dx = m! (n-m-2)! / (n-1)!

using ``int g y dy = 1/2 int g dx``.  The numeric path is adaptive quadrature
in ``x`` with the tail mapped onto ``[0, 1]`` by ``x = 1/u``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np
from scipy import integrate

from . import profiles as pf

DEFAULT_TOL = 1e-10

ExactRational = Fraction


class DivergentIntegralError(ValueError):
    """The requested integral does not converge."""


class TailDecayError(DivergentIntegralError):
    """The integrand does not decay fast enough for ``int g y dy`` to converge."""

    def __init__(self, rate):
        self.rate = rate
        super().__init__(
            f"integrand decays like y^{rate:.3g}; need faster than y^-2 "
            f"for convergence of int g y dy")


def moment_integral(m: int, n: int) -> Fraction:
    """Exact ``int_0^inf x^m (1+x)^-n dx`` for ``0 <= m <= n-2``."""
    if m < 0 or n < 1:
        raise ValueError("need m >= 0 and n >= 1")
    if m > n - 2:
        raise DivergentIntegralError(f"x^{m}/(1+x)^{n} is not integrable on [0, inf)")
    return Fraction(factorial(m) * factorial(n - m - 2), factorial(n - 1))


# --- exact rational functions of x -------------------------------------------

def _trim(coeffs):
    c = list(coeffs)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c) if c else (Fraction(0),)


@dataclass(frozen=True)
class RationalX:
    """``sum_k coeffs[k] x^k / (1+x)^power`` with exact coefficients."""

    coeffs: tuple
    power: int

    @classmethod
    def make(cls, coeffs, power):
        return cls(_trim(Fraction(c) for c in coeffs), int(power))

    def _raised(self, power):
        # same function written over (1+x)^power, power >= self.power
        c = list(self.coeffs)
        for _ in range(power - self.power):
            c = [a + b for a, b in zip(c + [Fraction(0)], [Fraction(0)] + c)]
        return c

    def __add__(self, other):
        other = _lift(other)
        n = max(self.power, other.power)
        a, b = self._raised(n), other._raised(n)
        size = max(len(a), len(b))
        a += [Fraction(0)] * (size - len(a))
        b += [Fraction(0)] * (size - len(b))
        return RationalX.make([p + q for p, q in zip(a, b)], n)

    __radd__ = __add__

    def __neg__(self):
        return RationalX.make([-c for c in self.coeffs], self.power)

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        other = _lift(other)
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RationalX.make(out, self.power + other.power)

    __rmul__ = __mul__

    def over_x(self):
        """Divide by ``x = y^2``; the numerator must vanish at the origin."""
        if self.coeffs[0] != 0:
            raise DivergentIntegralError("division by y^2 of a function nonzero at 0")
        return RationalX.make(self.coeffs[1:] or (0,), self.power)

    def theta(self):
        """Apply ``y d/dy = 2 x d/dx``."""
        c = list(self.coeffs)
        n = self.power
        dp = [k * c[k] for k in range(1, len(c))] or [Fraction(0)]
        # 2x [P'(1+x) - n P] / (1+x)^(n+1)
        num = [Fraction(0)] * (len(c) + 1)
        for k, a in enumerate(dp):
            num[k] += a
            num[k + 1] += a
        for k, a in enumerate(c):
            num[k] -= n * a
        return RationalX.make([Fraction(0)] + [2 * a for a in num], n + 1)

    def integral(self) -> Fraction:
        """Exact ``int_0^inf R(y^2) y dy``."""
        total = Fraction(0)
        for k, a in enumerate(self.coeffs):
            if a != 0:
                total += a * moment_integral(k, self.power)
        return total / 2

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        num = sum(float(a) * x**k for k, a in enumerate(self.coeffs))
        return num / (1.0 + x) ** self.power


def _lift(v):
    if isinstance(v, RationalX):
        return v
    return RationalX.make([Fraction(v)], 0)


def B1_exact(p: RationalX) -> RationalX:
    t = p.theta()
    return -t - t.theta()


def B2_exact(p: RationalX) -> RationalX:
    return p.theta()


CHI_X = RationalX.make([1, -1], 1)
ZETA_X = RationalX.make([0, 4], 2)
XI10_X = RationalX.make([0, 0, -1], 2)


# --- numeric path --------------------------------------------------------------

def _tail_rate(g, y1=1e3, y2=1e4):
    a, b = abs(float(g(y1))), abs(float(g(y2)))
    if a < 1e-300 and b < 1e-300:
        return -np.inf
    if a < 1e-300 or b < 1e-300:
        return -np.inf if b < a else np.inf
    return np.log(b / a) / np.log(y2 / y1)


def integrate_radial(integrand, tol=DEFAULT_TOL, tail_exponent=None):
    """Return ``(value, error)`` for ``int_0^inf integrand(y) y dy``.

    ``integrand`` is a vectorizable callable of ``y``.  The decay rate at large
    ``y`` is measured from two samples unless ``tail_exponent`` is supplied;
    a rate not clearly faster than ``y^-2`` raises :class:`TailDecayError`.
    """
    rate = _tail_rate(integrand) if tail_exponent is None else float(tail_exponent)
    if rate > -2.05:
        raise TailDecayError(rate)

    def inner(x):
        return 0.5 * float(integrand(np.sqrt(x)))

    def outer(u):
        if u == 0.0:
            return 0.0
        return 0.5 * float(integrand(1.0 / np.sqrt(u))) / (u * u)

    opts = dict(epsabs=tol / 4, epsrel=0.0, limit=200)
    v1, e1 = integrate.quad(inner, 0.0, 1.0, **opts)
    v2, e2 = integrate.quad(outer, 0.0, 1.0, **opts)
    err = e1 + e2
    if not np.isfinite(v1 + v2) or err > tol:
        raise pf.NumericalError(
            f"radial quadrature missed tolerance {tol:.1e}: "
            f"error estimates {e1:.2e} on [0,1], {e2:.2e} on [1,inf)")
    return v1 + v2, err


def integrate_moment_numeric(m, n, tol=DEFAULT_TOL):
    """Numeric ``int_0^inf x^m/(1+x)^n dx`` through the radial path."""
    if m > n - 2:
        raise DivergentIntegralError(f"x^{m}/(1+x)^{n} is not integrable on [0, inf)")

    def g(y):
        x = y * y
        return 2.0 * x**m / (1.0 + x) ** n

    return integrate_radial(g, tol=tol, tail_exponent=2 * (m - n))


# --- named integrands ------------------------------------------------------------

def _chi(y):
    return pf.CHI.eval(y)


def _zeta(y):
    return pf.ZETA.eval(y)


def _xi10(y):
    return pf.XI10.eval(y)


def _inv_y2(y):
    return 1.0 / (y * y)


@dataclass(frozen=True)
class IdentityRow:
    name: str
    exact: Fraction
    numeric: float
    residual: float


def _exact_integrands():
    z, c, xi = ZETA_X, CHI_X, XI10_X
    return {
        "int zeta^2": z * z,
        "int zeta B1 zeta": z * B1_exact(z),
        "int zeta B1 chi": z * B1_exact(c),
        "int zeta^2 chi xi10 / y^2": (z * z * c * xi).over_x(),
        "int zeta^3 chi / y^2": (z * z * z * c).over_x(),
        "int zeta B1 zeta - 12 int zeta^2 chi xi10 / y^2":
            z * B1_exact(z) - 12 * (z * z * c * xi).over_x(),
        "gamma numerator": gamma_numerator_exact(0),
    }


def _numeric_integrands():
    zeta, chi, xi = _zeta, _chi, _xi10

    def b1(profile):
        return lambda y: pf.apply_B1(profile, y)

    b1z, b1c = b1(pf.ZETA), b1(pf.CHI)
    return {
        "int zeta^2": lambda y: zeta(y) ** 2,
        "int zeta B1 zeta": lambda y: zeta(y) * b1z(y),
        "int zeta B1 chi": lambda y: zeta(y) * b1c(y),
        "int zeta^2 chi xi10 / y^2": lambda y: zeta(y) ** 2 * chi(y) * xi(y) * _inv_y2(y),
        "int zeta^3 chi / y^2": lambda y: zeta(y) ** 3 * chi(y) * _inv_y2(y),
        "int zeta B1 zeta - 12 int zeta^2 chi xi10 / y^2":
            lambda y: zeta(y) * (b1z(y) - 12 * zeta(y) * chi(y) * xi(y) * _inv_y2(y)),
        "gamma numerator": _gamma_numerator_integrand(0.0),
    }


def identity_suite(tol=DEFAULT_TOL):
    """Evaluate every named identity both exactly and by quadrature.

    Returns a list of :class:`IdentityRow`; the last row is ``gamma`` itself.
    """
    exact = _exact_integrands()
    numeric = _numeric_integrands()
    rows = []
    for name, rx in exact.items():
        ex = rx.integral() if isinstance(rx, RationalX) else rx
        val, _ = integrate_radial(numeric[name], tol=tol)
        rows.append(IdentityRow(name, ex, val, abs(val - float(ex))))
    g_ex = gamma_exact()
    g_num = compute_gamma(tol=tol)
    rows.append(IdentityRow("gamma", g_ex, g_num, abs(g_num - float(g_ex))))
    return rows


# --- gamma -------------------------------------------------------------------------

def gamma_numerator_exact(alpha=0) -> Fraction:
    """``int zeta B1 xi - 6 int zeta chi xi^2 / y^2`` with ``xi = xi10 + alpha zeta``."""
    xi = XI10_X + Fraction(alpha) * ZETA_X
    return (ZETA_X * B1_exact(xi) - 6 * (ZETA_X * CHI_X * xi * xi).over_x()).integral()


def gamma_denominator_exact() -> Fraction:
    return (ZETA_X * ZETA_X).integral()


def gamma_exact() -> Fraction:
    return gamma_numerator_exact(0) / gamma_denominator_exact()


def _gamma_numerator_integrand(alpha):
    def g(y):
        y = np.asarray(y, dtype=float)
        z = _zeta(y)
        xi = _xi10(y) + alpha * z
        b1xi = pf.apply_B1(pf.XI10, y) + alpha * pf.apply_B1(pf.ZETA, y)
        return z * (b1xi - 6 * _chi(y) * xi * xi * _inv_y2(y))
    return g


def gamma_numerator(alpha=0.0, tol=DEFAULT_TOL):
    return integrate_radial(_gamma_numerator_integrand(float(alpha)), tol=tol)[0]


def gamma_denominator(tol=DEFAULT_TOL):
    return integrate_radial(lambda y: _zeta(y) ** 2, tol=tol)[0]


def compute_gamma(tol=DEFAULT_TOL, alpha=0.0):
    """The modulation coefficient as a ratio of two radial quadratures (3/4)."""
    return gamma_numerator(alpha, tol) / gamma_denominator(tol)


def gauge_invariance_check(alpha, tol=DEFAULT_TOL):
    """Change of the gamma numerator under ``xi10 -> xi10 + alpha zeta``."""
    return gamma_numerator(alpha, tol) - gamma_numerator(0.0, tol)


def gauge_invariance_check_exact(alpha) -> Fraction:
    return gamma_numerator_exact(alpha) - gamma_numerator_exact(0)
