"""Radial wave equation ``u_tt = u_rr + u_r/r + 2u(1-u^2)/r^2`` on nested grids.

Every level is a uniform cell-centred grid ``r_i = (i + 1/2) h``.  Level 0
covers ``[0, R]``; level ``l + 1`` has half the spacing and covers the inner
half of level ``l`` (all finer levels have ``level_cells`` cells).  The
Laplacian is the conservative form

    [r_{i+1/2}(u_{i+1} - u_i) - r_{i-1/2}(u_i - u_{i-1})] / (r_i h^2)

whose face weight vanishes at ``r = 0``; this is the even reflection
``u_{-1} = u_0``.  All levels advance together with one kick-drift-kick
leapfrog step ``dt = cfl * h_finest``.  Coarse cells under a finer level are
overwritten by restriction (pairwise averages); each finer level takes its
outer ghost from the coarser level by cubic interpolation.  The outer ghost
of level 0 follows an outgoing-wave condition on ``u - u(0, r)``, the
deviation from the initial far field.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..profiles import chi, zeta
from .config import SimConfig


class BlowupError(FloatingPointError):
    """NaN or Inf appeared in the field."""


class MaxLevelsError(RuntimeError):
    pass


def _lagrange_weights(nodes, x):
    w = np.ones(len(nodes))
    for a in range(len(nodes)):
        for b in range(len(nodes)):
            if a != b:
                w[a] *= (x - nodes[b]) / (nodes[a] - nodes[b])
    return w


# fine ghost centre sits at coarse index N/2 - 1/4; stencil N/2-2 .. N/2+1
_GHOST_W = _lagrange_weights(np.array([-2.0, -1.0, 0.0, 1.0]), -0.25)


class Level:
    def __init__(self, h, n):
        self.h = float(h)
        self.n = int(n)
        self.r = (np.arange(self.n) + 0.5) * self.h
        self.r_face = np.arange(1, self.n + 1) * self.h
        self._inv_rh2 = 1.0 / (self.r * self.h * self.h)
        self._inv_r2 = 1.0 / (self.r * self.r)
        self.u = np.zeros(self.n)
        self.v = np.zeros(self.n)
        self.ghost = 0.0

    @property
    def extent(self):
        return self.n * self.h

    def accel(self):
        u = self.u
        flux = np.empty(self.n)
        flux[:-1] = self.r_face[:-1] * (u[1:] - u[:-1])
        flux[-1] = self.r_face[-1] * (self.ghost - u[-1])
        div = flux.copy()
        div[1:] -= flux[:-1]
        return div * self._inv_rh2 + 2 * u * (1 - u * u) * self._inv_r2

    def copy(self):
        out = Level(self.h, self.n)
        out.u, out.v, out.ghost = self.u.copy(), self.v.copy(), self.ghost
        return out


@dataclass
class WaveState:
    levels: list
    t: np.longdouble
    config: SimConfig
    # background profile used by the outgoing-wave condition
    bg_last: float = 0.0
    bg_ghost: float = 0.0
    steps: int = 0
    refinements: list = field(default_factory=list)
    max_abs_u: float = 1.0
    _acc: list | None = field(default=None, repr=False)

    @property
    def finest(self):
        return self.levels[-1]

    @property
    def h_finest(self):
        return self.levels[-1].h

    @property
    def time(self):
        return float(self.t)

    def copy(self):
        return WaveState([lv.copy() for lv in self.levels], np.longdouble(self.t), self.config,
                         self.bg_last, self.bg_ghost, self.steps, list(self.refinements),
                         self.max_abs_u, None)

    def composite(self):
        """Owned ``(r, u, v)`` samples of all levels, sorted by radius."""
        rs, us, vs = [], [], []
        for k, lv in enumerate(self.levels):
            lo = covered_cells(self.levels, k)
            rs.append(lv.r[lo:])
            us.append(lv.u[lo:])
            vs.append(lv.v[lo:])
        order = np.argsort(np.concatenate(rs))
        return (np.concatenate(rs)[order], np.concatenate(us)[order],
                np.concatenate(vs)[order])


def covered_cells(levels, k):
    """Number of inner cells of level ``k`` overlaid by level ``k + 1``."""
    return 0 if k == len(levels) - 1 else levels[k + 1].n // 2


def _restrict(coarse, fine):
    m = fine.n // 2
    coarse.u[:m] = 0.5 * (fine.u[0::2] + fine.u[1::2])
    coarse.v[:m] = 0.5 * (fine.v[0::2] + fine.v[1::2])


def _restrict_all(state):
    lv = state.levels
    for k in range(len(lv) - 1, 0, -1):
        _restrict(lv[k - 1], lv[k])


def _fill_ghosts(state):
    lv = state.levels
    for k in range(1, len(lv)):
        c = lv[k - 1]
        j = lv[k].n // 2
        lv[k].ghost = float(_GHOST_W @ c.u[j - 2:j + 2])


def _interp_quartic(coarse, rq, arr):
    # quartic Lagrange through coarse cells, evenly reflected across r = 0
    H = coarse.h
    ext = np.concatenate((arr[2::-1], arr))
    rext = np.concatenate((-coarse.r[2::-1], coarse.r))
    i0 = np.clip(np.floor(rq / H + 0.5).astype(int), 0, ext.size - 5)
    out = np.zeros_like(rq)
    for a in range(5):
        L = np.ones_like(rq)
        for b in range(5):
            if b != a:
                L *= (rq - rext[i0 + b]) / (rext[i0 + a] - rext[i0 + b])
        out += L * ext[i0 + a]
    return out


def init_state(config: SimConfig, perturbation=None):
    """Instanton data ``u = chi(r/l0)``, ``v = -(l0'/l0)(r/l0) chi'(r/l0)``.

    ``perturbation(r, u) -> u`` is applied after the optional bump of the config.
    Refinement levels needed to resolve ``lambda0`` are built from the same
    closed form.
    """
    config.validate()
    lam0, ld0 = config.lambda0, config.lambda_dot0
    n0 = int(round(config.R / config.h))
    levels = [Level(config.h, n0)]
    while lam0 < config.trigger * levels[-1].h:
        f = levels[-1]
        levels.append(Level(f.h / 2, min(config.level_cells, f.n)))
        if len(levels) > config.max_levels:
            raise MaxLevelsError("initial scale needs more than max_levels levels")

    def data(r):
        y = r / lam0
        # -(l0'/l0) y chi'(y) = (l0'/l0) zeta(y)
        u = chi(y)
        v = (ld0 / lam0) * zeta(y)
        if config.bump_amplitude:
            r0 = 2 * lam0 if config.bump_center is None else config.bump_center
            s = lam0 if config.bump_width is None else config.bump_width
            u = u * (1 + config.bump_amplitude * np.exp(-((r - r0) / s) ** 2))
        if perturbation is not None:
            u = perturbation(r, u)
        return u, v

    for lv in levels:
        lv.u, lv.v = data(lv.r)
    g_r = levels[0].extent + 0.5 * config.h
    levels[0].ghost = float(data(np.array([g_r]))[0][0])
    # the far field frozen at t = 0 (chi(r/lambda0) for instanton data)
    state = WaveState(levels, np.longdouble(0.0), config,
                      bg_last=float(levels[0].u[-1]), bg_ghost=float(levels[0].ghost))
    _restrict_all(state)
    _fill_ghosts(state)
    state.max_abs_u = max(float(np.max(np.abs(lv.u))) for lv in levels)
    return state


def _outer_ghost(state, dt, u_last_old, ghost_old):
    # Crank-Nicolson for (d_t + d_r + 1/(2r)) (u - u_bg) = 0 at the face r = R
    lv = state.levels[0]
    h, R = lv.h, lv.extent
    a0 = u_last_old - state.bg_last
    g0 = ghost_old - state.bg_ghost
    a1 = lv.u[-1] - state.bg_last
    k = 1.0 / (8 * R)
    rhs = (-a1 * (0.5 / dt - 0.5 / h + k) + (a0 + g0) * 0.5 / dt
           - 0.5 * ((g0 - a0) / h + (a0 + g0) / (4 * R)))
    g1 = rhs / (0.5 / dt + 0.5 / h + k)
    lv.ghost = state.bg_ghost + g1


def stable_dt(state):
    return state.config.cfl * state.h_finest


def step(state: WaveState, dt=None):
    """One kick-drift-kick leapfrog step of all levels (in place; returns state)."""
    if dt is None:
        dt = stable_dt(state)
    if dt > stable_dt(state) * (1 + 1e-12):
        raise ValueError(f"dt = {dt} exceeds cfl * h_finest = {stable_dt(state)}")
    lv = state.levels
    acc = state._acc
    if acc is None:
        _fill_ghosts(state)
        acc = [l.accel() for l in lv]
    for l, a in zip(lv, acc):
        l.v += 0.5 * dt * a
    u_last, ghost = lv[0].u[-1], lv[0].ghost
    for l in lv:
        l.u += dt * l.v
    _restrict_all(state)
    _outer_ghost(state, dt, u_last, ghost)
    _fill_ghosts(state)
    acc = [l.accel() for l in lv]
    for l, a in zip(lv, acc):
        l.v += 0.5 * dt * a
    _restrict_all(state)
    state._acc = acc
    state.t += np.longdouble(dt)
    state.steps += 1
    for k, l in enumerate(lv):
        if not np.all(np.isfinite(l.u)):
            i = int(np.argmax(~np.isfinite(l.u)))
            raise BlowupError(f"non-finite field on level {k} at r = {l.r[i]:.6g}, "
                              f"t = {float(state.t):.8g}")
    return state


def energy(state: WaveState):
    """``int (v^2 + u_r^2 + (1-u^2)^2/r^2) r dr`` by the midpoint rule.

    Each level contributes the cells it owns: the finest level all of them,
    the others ``r >= extent of the next finer level``.  ``u_r`` lives on cell
    faces (as in the flux form of the Laplacian); the dual cells of the two
    faces at a level's ends stick out by half a spacing and get weight 1/2.
    """
    total = 0.0
    nlev = len(state.levels)
    for k, lv in enumerate(state.levels):
        finest = k == nlev - 1
        lo = covered_cells(state.levels, k)
        u, v, r, h = lv.u, lv.v, lv.r, lv.h
        cell = r * h * (v * v + (1 - u * u) ** 2 / (r * r))
        ue = np.append(u, lv.ghost)
        face = lv.r_face * (ue[1:] - ue[:-1]) ** 2 / h
        face[-1] *= 0.5
        if finest:
            grad = float(np.sum(face))
        else:
            face[lo - 1] *= 0.5
            grad = float(np.sum(face[lo - 1:]))
        total += float(np.sum(cell[lo:])) + grad
    return total


def refine_if_needed(state: WaveState, lambda_current):
    """Add a level of half the spacing when ``lambda < trigger * h_finest``."""
    cfg = state.config
    added = 0
    while lambda_current < cfg.trigger * state.h_finest:
        if len(state.levels) >= cfg.max_levels:
            raise MaxLevelsError(f"max_levels = {cfg.max_levels} reached at "
                                 f"t = {float(state.t):.8g}, lambda = {lambda_current:.3g}")
        f = state.levels[-1]
        nf = Level(f.h / 2, min(cfg.level_cells, f.n))
        nf.u = _interp_quartic(f, nf.r, f.u)
        nf.v = _interp_quartic(f, nf.r, f.v)
        state.levels.append(nf)
        _restrict(f, nf)
        state.refinements.append({"t": float(state.t), "lambda": float(lambda_current),
                                  "h": nf.h, "levels": len(state.levels)})
        added += 1
    if added:
        _fill_ghosts(state)
        state._acc = None
    return state
