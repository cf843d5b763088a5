import numpy as np
import pytest

from collapse_lab import matched as mt
from collapse_lab.profiles import GAMMA


@pytest.fixture(scope="module")
def sol():
    return mt.solve_phi1(0.1, z_max=200.0)


def test_matching_constant():
    assert mt.matching_constant(np.exp(-1)) == pytest.approx(4.0)
    assert mt.matching_constant(1.0) == 0.0


def test_residual_and_origin(sol):
    assert np.nanmax(np.abs(sol.residual)) <= 1e-6
    assert abs(sol(1e-6) - 1) < 1e-5


def test_inner_branch(sol):
    z = 1e-4
    expected = -(GAMMA / 4) * (np.log(z / 0.1**4) - 7 / 3)
    assert (sol(z) - 1) / z == pytest.approx(expected, rel=0.01)
    assert mt.inner_log_coefficient(sol) == pytest.approx(-GAMMA / 4, rel=0.01)


def test_decays_outward(sol):
    z, p = sol.z_grid, sol.phi
    out = z >= 20
    assert np.all(np.diff(np.abs(p[out])) < 0)
    # leading decay is c z^(-1/2) plus the particular 2/(gamma z)
    c = mt.fit_outer(sol).c
    zm = z[-1]
    assert np.sqrt(zm) * (p[-1] - 2 / (GAMMA * zm)) == pytest.approx(c, rel=0.01)


def test_outer_fit(sol):
    fit = mt.fit_outer(sol)
    assert fit.fit_residual < 1e-3
    zm = sol.z_grid[-1]
    left = zm * (sol.phi[-1] - (mt.outer_model(zm, fit) - fit.particular / zm))
    assert left == pytest.approx(2 / GAMMA, rel=0.05)
    free = mt.fit_outer(sol, z_lo=20.0, free_particular=True)
    assert free.particular == pytest.approx(8 / 3, rel=0.05)
    assert mt.outer_model(1.0, fit) == pytest.approx(sol(1.0), rel=0.05)


def test_outer_constant_is_window_stable(sol):
    cs = [mt.fit_outer(sol, z_lo=z).c for z in (5.0, 10.0, 20.0)]
    assert np.ptp(cs) < 1e-6 * abs(cs[0])


def test_homogeneous_basis_solves_homogeneous_ode():
    z = np.geomspace(1.0, 80.0, 3000)
    H = mt.homogeneous_basis(z)
    # the equation is linear: N(h) = res(h) - res(0)
    base = mt.ode_residual(z, np.zeros_like(z))
    for k in range(2):
        r = mt.ode_residual(z, H[:, k]) - base
        assert np.nanmax(np.abs(r) / np.max(np.abs(H[:, k]))) < 1e-6


def test_lambda_dot_enters_through_log():
    a = mt.solve_phi1(0.1, z_max=20.0)
    b = mt.solve_phi1(0.3, z_max=20.0)
    z = np.array([1e-5, 1e-4, 1e-3])
    diff = b(z) - a(z)
    expected = (GAMMA / 4) * z * np.log(0.3**4 / 0.1**4)
    assert np.allclose(diff, expected, rtol=0.02)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        mt.solve_phi1(1.5)
    with pytest.raises(ValueError):
        mt.solve_phi1(0.1, z_max=5.0)
    with pytest.raises(ValueError):
        mt.matching_constant(0.0)


def test_far_field_decay():
    rep = mt.far_field_decay_check(0.1, np.geomspace(1e3, 1e5, 9))
    assert rep.conclusive and rep.exponent == pytest.approx(-1.0, rel=0.1)
    assert not mt.far_field_decay_check(0.1, [1.0]).conclusive
    assert not mt.far_field_decay_check(0.1, [1.0, 2.0]).conclusive
