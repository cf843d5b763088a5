import numpy as np
import pytest
from hypothesis import given, strategies as st

from collapse_lab import linearized as lz
from collapse_lab import profiles as pf


def test_build_L_validation():
    with pytest.raises(ValueError):
        lz.build_L([0.1, 0.2])
    with pytest.raises(ValueError):
        lz.build_L([0.1, 0.3, 0.2])
    with pytest.raises(ValueError):
        lz.build_L([-0.1, 0.1, 0.2])


def test_laplacian_on_monomials():
    # -Delta y^2 = -4 exactly for the flux form on a uniform grid away from the ends
    y = lz.uniform_grid(0.05, 5.0)
    L = lz.build_L(y, potential=np.zeros_like(y))
    r = L.apply(y * y)[1:-1]
    assert np.allclose(r, -4.0, atol=1e-9)


@pytest.mark.parametrize("row", lz.convergence_study(0.1), ids=lambda r: r.name)
def test_second_order_residuals(row):
    assert 3.2 <= row.ratio <= 4.8


def test_residuals_shrink_quadratically_over_three_levels():
    a = lz.operator_residuals(0.1)
    c = lz.operator_residuals(0.025)
    for k in lz.RESIDUAL_CASES:
        assert a[k] / c[k] == pytest.approx(16.0, rel=0.25)


def _bump(y, c, w, a):
    return a * np.exp(-((y - c) / w) ** 2) * (np.abs(y - c) < 4 * w)


@given(st.floats(1.0, 8.0), st.floats(0.3, 1.5), st.floats(1.5, 8.0), st.floats(0.3, 1.5))
def test_discrete_symmetry(c1, w1, c2, w2):
    y = lz.uniform_grid(0.02, 20.0)
    L = lz.build_L(y)
    u, v = _bump(y, c1, w1, 1.0), _bump(y, c2, w2, 1.0)
    asym = abs(L.inner(L.apply(u), v) - L.inner(u, L.apply(v)))
    assert asym < 1e-9 * (1 + abs(L.inner(L.apply(u), v)))
    S = L.symmetrized()
    assert np.allclose(S, S.T)


def test_nonuniform_grid_symmetry():
    y = np.geomspace(0.01, 30.0, 400)
    y = y[1:] if 2 * y[0] - y[1] < 0 else y
    L = lz.build_L(y)
    rng = np.random.default_rng(3)
    u, v = rng.normal(size=y.size), rng.normal(size=y.size)
    u[-1] = v[-1] = 0
    a = L.inner(L.apply(u), v)
    b = L.inner(u, L.apply(v))
    assert abs(a - b) < 1e-9 * (abs(a) + 1)


def test_positivity_with_truncation_sensitivity():
    for h in (0.1, 0.05):
        for ymax in (100.0, 200.0):
            lam = lz.build_L(lz.uniform_grid(h, ymax)).eigenvalues(count=1)[0]
            assert lam >= -(h * h) - 10 / ymax**2


def test_solvability():
    assert abs(lz.solvability(pf.GAMMA)) < 1e-8
    s6 = lz.solvability(0.6)
    assert abs(s6) > 0.1
    assert (s6 - lz.solvability(pf.GAMMA)) / (0.6 - pf.GAMMA) == pytest.approx(-8 / 3, rel=1e-8)


@given(st.floats(-3.0, 3.0))
def test_solvability_affine(g):
    assert lz.solvability(g) == pytest.approx(-8 / 3 * (g - 0.75), abs=1e-9)


def test_F2_far_field():
    # all three terms of F2 fall off like 1/y^2; their sum is -1/y^2
    assert lz.F2(100.0) * 1e4 == pytest.approx(-1.0, rel=2e-3)
    rhs = lz.assemble_F2(0.75)
    assert rhs.order == 2 and np.allclose(rhs.values, lz.F2(rhs.y))
    assert np.allclose(lz.assemble_F1(rhs.y).values, pf.apply_B1(pf.CHI, rhs.y))


def test_voc_reproduces_w2():
    y = np.linspace(0.1, 10.0, 100)
    s = lz.solve_variation_of_constants(lambda t: 2 * pf.GAMMA * pf.xi10(t), 10.0, y=y,
                                        c1_origin=-pf.GAMMA)
    assert np.max(np.abs(s.w - pf.W2.eval(y))) < 1e-10


def test_voc_default_gauge_differs_from_w2_by_zero_mode():
    y = np.linspace(0.1, 10.0, 100)
    s = lz.solve_variation_of_constants(lambda t: 2 * pf.GAMMA * pf.xi10(t), 10.0, y=y)
    a, rest = lz.zero_mode_component(y, s.w, pf.W2.eval(y))
    assert a == pytest.approx(pf.GAMMA / 4, rel=1e-8) and rest < 1e-10


def test_voc_zero_and_B1chi():
    s = lz.solve_variation_of_constants(lambda t: 0 * t, 10.0)
    assert np.all(s.w == 0)
    y = np.linspace(0.1, 10.0, 100)
    s = lz.solve_variation_of_constants(lz.F1, 10.0, y=y)
    a, rest = lz.zero_mode_component(y, s.w, pf.xi10(y))
    assert rest < 1e-10


def test_voc_rejects_singular_rhs():
    with pytest.raises(ValueError):
        lz.solve_variation_of_constants(lambda t: 1 / t, 10.0)
    with pytest.raises(ValueError):
        lz.solve_variation_of_constants(lambda t: np.ones_like(t), 10.0)


def test_wronskian_closed_form():
    y = np.geomspace(0.05, 20, 50)
    w = pf.ETA1.eval(y) * pf.ETA2.deriv1(y) - pf.ETA1.deriv1(y) * pf.ETA2.eval(y)
    assert np.allclose(w, lz.wronskian(y), rtol=1e-10)
