"""The operator ``L = -Delta_y - f'(chi)/y^2`` around the instanton.

``L`` is discretized in conservative (finite-volume) form on a possibly
nonuniform grid of positive nodes, which makes it exactly symmetric in the
discrete ``y dy`` inner product.  The left neighbour of the first node is a
ghost at ``2 y_0 - y_1``; when that is the origin it carries the value 0,
since regular solutions of ``L u = g`` behave like ``y^2`` against the
``4/y^2`` barrier (an even function vanishing at the centre).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import profiles as pf
from .quadrature import integrate_radial

# Gauss-Legendre order for the cumulative quadratures of the VoC solver
_GL_ORDER = 10


@dataclass
class DiscreteOperator:
    """Tridiagonal ``L`` on nodes ``y``; row ``i`` couples ``y_{i-1}, y_i, y_{i+1}``."""

    y: np.ndarray
    left_ghost: float
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    weights: np.ndarray
    # value of the field at the left ghost node
    left_value: float = 0.0
    potential: np.ndarray = field(default=None, repr=False)

    @property
    def n(self):
        return self.y.size

    def apply(self, u, right_value=None):
        """``L u`` at every node.

        The last row uses ``right_value`` as the value one spacing beyond
        ``y[-1]`` when given, otherwise a zero outer flux (Neumann closure).
        """
        u = np.asarray(u, dtype=float)
        out = self.diag * u
        out[1:] += self.sub[1:] * u[:-1]
        out[:-1] += self.sup[:-1] * u[1:]
        out[0] += self.sub[0] * self.left_value
        if right_value is not None:
            out[-1] += self._right_coupling() * (right_value - u[-1])
        return out

    def _right_coupling(self):
        # coefficient of (u_ghost - u_last) had the outer face at half a spacing
        y = self.y
        hr = y[-1] - y[-2]
        face = y[-1] + hr / 2
        return -face / hr / self.weights[-1]

    def residual(self, u, rhs=None):
        """``L u - rhs`` on the interior nodes ``y[0..n-2]`` (``u[-1]`` is boundary data)."""
        r = self.apply(u)[:-1]
        if rhs is not None:
            r = r - np.asarray(rhs, dtype=float)[:-1]
        return r

    def inner(self, u, v):
        """Discrete ``int u v y dy``."""
        return float(np.sum(self.weights * u * v))

    def _sym_bands(self, outer):
        # S = W^(1/2) A W^(-1/2) is symmetric because W A is
        w = self.weights
        off = self.sup[:-1] * np.sqrt(w[:-1] / w[1:])
        d = self.diag.copy()
        if outer == "dirichlet":
            return d[:-1], off[:-1]
        if outer == "neumann":
            return d, off
        raise ValueError(f"unknown outer condition {outer!r}")

    def symmetrized(self, outer="dirichlet"):
        d, e = self._sym_bands(outer)
        return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)

    def eigenvalues(self, outer="dirichlet", count=1):
        """Smallest ``count`` eigenvalues of the symmetrized operator."""
        d, e = self._sym_bands(outer)
        return linalg.eigvalsh_tridiagonal(d, e, select="i", select_range=(0, count - 1))

    def eigenpairs(self, outer="dirichlet", count=1):
        d, e = self._sym_bands(outer)
        vals, vecs = linalg.eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1))
        w = self.weights[: d.size]
        return vals, vecs / np.sqrt(w)[:, None]


def build_L(grid, potential=None, left_value=0.0):
    """Assemble ``L`` on ``grid``.

    ``potential`` overrides ``-f'(chi(y))/y^2``; pass zeros for ``-Delta_y``.
    """
    y = np.asarray(grid, dtype=float)
    if y.ndim != 1 or y.size < 3:
        raise ValueError("need at least 3 grid nodes")
    if np.any(y <= 0):
        raise ValueError("grid nodes must be positive")
    if np.any(np.diff(y) <= 0):
        raise ValueError("grid must be strictly increasing")
    ghost = 2 * y[0] - y[1]
    if ghost < -1e-12 * y[0]:
        raise ValueError("first spacing exceeds the first node; ghost falls below 0")
    ghost = max(ghost, 0.0)

    nodes = np.concatenate([[ghost], y, [2 * y[-1] - y[-2]]])
    faces = 0.5 * (nodes[1:] + nodes[:-1])
    spacing = np.diff(nodes)
    weights = 0.5 * (faces[1:] ** 2 - faces[:-1] ** 2)
    flux = faces / spacing
    sub = -flux[:-1] / weights
    sup = -flux[1:] / weights
    diag = (flux[:-1] + flux[1:]) / weights
    # Neumann closure on the last row
    diag[-1] -= flux[-1] / weights[-1]
    sup = sup.copy()
    sup[-1] = 0.0
    if potential is None:
        potential = -pf.fprime(pf.chi(y)) / (y * y)
    potential = np.asarray(potential, dtype=float)
    return DiscreteOperator(y=y, left_ghost=ghost, sub=sub, diag=diag + potential,
                            sup=sup, weights=weights, left_value=float(left_value),
                            potential=potential)


def uniform_grid(h, y_max):
    n = int(round(y_max / h))
    return h * np.arange(1, n + 1)


# --- perturbative right-hand sides --------------------------------------------

@dataclass
class PerturbationRHS:
    order: int
    y: np.ndarray
    values: np.ndarray
    gamma: float | None = None

    def __call__(self, y):
        return self.func(y)

    @property
    def func(self):
        if self.order == 1:
            return F1
        return lambda y: F2(y, self.gamma)


def F1(y):
    """``B1 chi``."""
    return pf.apply_B1(pf.CHI, y)


def F2(y, gamma=pf.GAMMA):
    """``B1 xi10 + gamma B2 chi - 6 chi xi10^2 / y^2``."""
    y = np.asarray(y, dtype=float)
    xi = pf.xi10(y)
    return (pf.apply_B1(pf.XI10, y) + gamma * pf.apply_B2(pf.CHI, y)
            - 6 * pf.chi(y) * xi * xi / (y * y))


def assemble_F1(y):
    y = np.asarray(y, dtype=float)
    return PerturbationRHS(order=1, y=y, values=F1(y))


def assemble_F2(gamma, y=None):
    if y is None:
        y = np.geomspace(1e-3, 1e3, 601)
    y = np.asarray(y, dtype=float)
    return PerturbationRHS(order=2, y=y, values=F2(y, gamma), gamma=float(gamma))


def solvability(gamma, tol=1e-12):
    """``int zeta F2 y dy``; vanishes exactly at gamma = 3/4."""
    return integrate_radial(lambda y: pf.zeta(y) * F2(y, gamma), tol=tol)[0]


# --- variation of constants ------------------------------------------------------

def wronskian(y):
    """``eta1 eta2' - eta1' eta2`` in closed form (``1/y``)."""
    y = np.asarray(y, dtype=float)
    return 1.0 / y


@dataclass
class VoCSolution:
    y: np.ndarray
    w: np.ndarray
    c1: np.ndarray
    c2: np.ndarray


def _origin_exponent(rhs):
    y1, y2 = 1e-6, 1e-4
    a, b = abs(float(rhs(y1))), abs(float(rhs(y2)))
    if a == 0.0 and b == 0.0:
        return np.inf
    if a == 0.0:
        return np.inf
    if b == 0.0:
        return -np.inf
    return np.log(b / a) / np.log(y2 / y1)


def solve_variation_of_constants(rhs, y_max, y=None, c1_origin=0.0):
    """Particular solution of ``L w = rhs`` regular at the origin.

    ``c1 = c1_origin + int_0^y s eta2 rhs ds`` and ``c2 = -int_0^y s eta1 rhs ds``;
    ``w = c1 eta1 + c2 eta2``.  The default gauge puts no ``eta1`` (zero mode)
    component at the origin.  ``rhs`` must vanish at the origin, otherwise the
    ``eta2 ~ -1/(4 y^2)`` weight makes ``c1`` diverge.
    """
    p = _origin_exponent(rhs)
    if p <= 0.05:
        raise ValueError(
            f"rhs behaves like y^{p:.3g} at the origin; the eta1 coefficient "
            f"needs rhs -> 0 there")
    if y is None:
        y = np.geomspace(1e-3, y_max, 2001)
    y = np.asarray(y, dtype=float)
    if np.any(np.diff(y) <= 0) or y[0] <= 0 or y[-1] > y_max * (1 + 1e-12):
        raise ValueError("evaluation nodes must be increasing in (0, y_max]")

    xg, wg = np.polynomial.legendre.leggauss(_GL_ORDER)
    edges = np.concatenate([[0.0], y])
    a, b = edges[:-1, None], edges[1:, None]
    s = 0.5 * (b - a) * xg[None, :] + 0.5 * (b + a)
    ws = 0.5 * (b - a) * wg[None, :]
    g = np.asarray(rhs(s), dtype=float)
    i1 = np.cumsum(np.sum(ws * s * pf.ETA2.eval(s) * g, axis=1))
    i2 = np.cumsum(np.sum(ws * s * pf.ETA1.eval(s) * g, axis=1))
    c1 = c1_origin + i1
    c2 = -i2
    w = c1 * pf.ETA1.eval(y) + c2 * pf.ETA2.eval(y)
    return VoCSolution(y=y, w=w, c1=c1, c2=c2)


def zero_mode_component(y, w, reference):
    """Least-squares ``a`` in ``w - reference = a zeta`` with a ``y dy`` weight."""
    z = pf.zeta(y)
    wt = np.gradient(y) * y
    d = np.asarray(w) - np.asarray(reference)
    a = np.sum(wt * z * d) / np.sum(wt * z * z)
    return a, float(np.max(np.abs(d - a * z)))


# --- residual study ----------------------------------------------------------------

#  eta2 is singular at the origin, so its residual is measured on y >= 1
RESIDUAL_CASES = ("L zeta", "L eta1", "L eta2", "L xi10 - B1 chi", "L w2 - 2 gamma xi10")


def operator_residuals(h, y_max=100.0):
    """Max-norm residuals of the closed-form solutions on the uniform grid ``[h, y_max]``."""
    y = uniform_grid(h, y_max)
    L = build_L(y)
    inner = y[:-1]
    out = {
        "L zeta": L.residual(pf.ZETA.eval(y)),
        "L eta1": L.residual(pf.ETA1.eval(y)),
        "L eta2": L.residual(pf.ETA2.eval(y))[inner >= 1.0],
        "L xi10 - B1 chi": L.residual(pf.XI10.eval(y), F1(y)),
        "L w2 - 2 gamma xi10": L.residual(pf.W2.eval(y), 2 * pf.GAMMA * pf.XI10.eval(y)),
    }
    return {k: float(np.max(np.abs(v))) for k, v in out.items()}


@dataclass
class ConvergenceRow:
    name: str
    coarse: float
    fine: float

    @property
    def ratio(self):
        return self.coarse / self.fine


def convergence_study(h=0.1, y_max=100.0):
    """Residual norms at ``h`` and ``h/2``; second order shows up as ratio 4."""
    a = operator_residuals(h, y_max)
    b = operator_residuals(h / 2, y_max)
    return [ConvergenceRow(k, a[k], b[k]) for k in RESIDUAL_CASES]
