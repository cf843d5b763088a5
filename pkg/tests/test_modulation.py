import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate
from scipy.special import gamma as Gamma, gammaincc

from collapse_lab import modulation as m

G = 0.75


def J_oracle(a):
    # e^a Gamma(3/2, a)
    return np.exp(a) * gammaincc(1.5, a) * Gamma(1.5)


def t_star_oracle(l0, v0):
    # sqrt(3/2) int_0^l0 sqrt(ln(1/(c l))) dl straight in lambda
    c = np.exp(-2 / (3 * v0 * v0)) / l0
    val, _ = integrate.quad(lambda l: np.sqrt(np.log(1 / (c * l))), 0, l0, epsabs=1e-14,
                            epsrel=1e-13, limit=400)
    return np.sqrt(1.5) * val


def test_closed_form_c():
    assert m.closed_form_c(1, -1) == pytest.approx(np.exp(-2 / 3), rel=1e-15)
    assert m.closed_form_c(1, -1) == pytest.approx(0.513417, abs=1e-6)
    with pytest.raises(ValueError):
        m.closed_form_c(1, 0)


@given(st.floats(0.01, 100), st.floats(-5, 5).filter(lambda v: abs(v) > 1e-2),
       st.floats(0.1, 10))
def test_c_properties(l0, v0, mu):
    c = m.closed_form_c(l0, v0)
    assert c * l0 < 1
    assert m.closed_form_c(l0 / mu, v0) == pytest.approx(mu * c, rel=1e-12)
    assert m.first_integral((l0, v0), c) == pytest.approx(1 / (2 * G), rel=1e-12)


def test_first_integral_domain_and_static():
    with pytest.raises(ValueError):
        m.first_integral((2.0, -1.0), 0.6)
    assert m.first_integral((1.0, 0.0), 0.5) == 0.0
    s = m.ModulationState(0.0, 1.0, -1.0)
    assert m.first_integral(s, m.closed_form_c(1, -1)) == pytest.approx(2 / 3, rel=1e-15)
    with pytest.raises(ValueError):
        m.ModulationState(0.0, 0.0, 1.0)


@given(st.floats(0.0, 40.0))
def test_J_against_incomplete_gamma(a):
    assert m.J(a) == pytest.approx(J_oracle(a), rel=1e-11)


def test_collapse_time_values():
    ct = m.collapse_time(1, -1)
    assert ct.t_star == pytest.approx(t_star_oracle(1, -1), rel=1e-10)
    assert ct.t_star == pytest.approx(1.5247408647766887, rel=1e-12)
    assert ct.rough_estimate == 1.0
    with pytest.raises(ValueError):
        m.collapse_time(1, 0.5)


@given(st.floats(0.1, 10), st.floats(-3, -0.05), st.floats(0.2, 5))
def test_collapse_time_scaling(l0, v0, mu):
    assert m.collapse_time(l0 / mu, v0).t_star == pytest.approx(
        m.collapse_time(l0, v0).t_star / mu, rel=1e-10)


def test_static_fixed_point():
    tr = m.integrate_modulation(1.0, 0.0, dt=0.01, t_end=5.0)
    assert np.all(tr.lam == 1.0) and tr.status == "t_end"


def test_case_b_trajectory():
    tr = m.integrate_modulation(1.0, -1.0, lambda_min=1e-3)
    assert tr.status == "collapsed"
    assert np.all(np.diff(tr.lam) < 0)
    assert np.all(tr.lam_dot < 0) and np.all(np.diff(np.abs(tr.lam_dot)) < 0)
    c = m.closed_form_c(1, -1)
    fi = m.first_integral((tr.lam, tr.lam_dot), c)
    assert np.max(np.abs(fi - 2 / 3)) < 1e-8
    assert np.all(c * tr.lam < 1)
    lo, hi = tr.blowup_bracket
    ts = m.collapse_time(1, -1).t_star
    assert lo <= ts <= hi
    assert abs(0.5 * (lo + hi) - ts) / ts < 1e-4
    assert m.fit_lambda_dot_exponent(tr) == pytest.approx(-0.5, rel=0.02)


def test_first_integral_error_is_fourth_order():
    c = m.closed_form_c(1, -1)
    drift = []
    for dt in (0.04, 0.02):
        tr = m.integrate_modulation(1.0, -1.0, dt=dt, eta=1.0, t_end=1.2, lambda_min=1e-9)
        fi = m.first_integral((tr.lam, tr.lam_dot), c)
        drift.append(np.max(np.abs(fi - 2 / 3)))
    assert drift[0] / drift[1] == pytest.approx(16, rel=0.2)


@given(st.floats(0.3, 4.0))
def test_trajectory_scaling(mu):
    a = m.integrate_modulation(1.0, -0.8, dt=1e-3, t_end=1.0)
    b = m.integrate_modulation(1.0 / mu, -0.8, dt=1e-3 / mu, t_end=1.0 / mu)
    # lambda_mu(t) = lambda(mu t) / mu
    lb = np.interp(a.t / mu, b.t, b.lam)
    assert np.max(np.abs(mu * lb / a.lam - 1)) < 1e-6


def test_case_a():
    tr = m.integrate_modulation(1.0, 0.5)
    assert tr.status == "expanding"
    assert np.all(np.diff(tr.lam_dot) > 0)
    c = m.closed_form_c(1, 0.5)
    assert np.all(np.diff(c * tr.lam) > 0) and c * tr.lam[-1] < 1
    rep = m.case_a_asymptotics(tr)
    assert rep.conclusive
    assert rep.exponent == pytest.approx(2 / 3, rel=0.05)
    assert rep.amplitude == pytest.approx((1.5 * c * c) ** (1 / 3), rel=0.10)
    assert rep.expected_amplitude == pytest.approx((1.5 * c * c) ** (1 / 3), rel=1e-12)


def test_case_a_report_on_collapsing_branch():
    rep = m.case_a_asymptotics(m.integrate_modulation(1.0, -1.0, lambda_min=1e-2))
    assert not rep.conclusive


def test_asymptotic_law():
    assert m.asymptotic_lambda_tau(np.exp(-1.0)) == pytest.approx(np.sqrt(2 / 3) / np.e)
    with pytest.raises(ValueError):
        m.asymptotic_lambda_tau(1.0)
    with pytest.raises(ValueError):
        m.asymptotic_lambda(2.0, 1.5)


def test_asymptotic_ratio_one_sided_and_converging():
    c = m.closed_form_c(1, -1)
    xs = np.array([3, 5, 10, 20, 40, 60, 100, 200])
    dev = np.array([m.exact_lambda(np.exp(-x), c) / m.asymptotic_lambda_tau(np.exp(-x)) - 1
                    for x in xs])
    assert np.all(dev < 0) and np.all(np.diff(np.abs(dev)) < 0)
    assert abs(dev[xs == 40][0]) <= 0.05


def test_exact_lambda_inverts_time_to_collapse():
    c = m.closed_form_c(1, -1)
    for lam in (0.5, 1e-3, 1e-20):
        tau = m.time_to_collapse(lam, c)
        assert m.exact_lambda(tau, c) == pytest.approx(lam, rel=1e-10)


def test_integrator_tracks_exact_solution():
    tr = m.integrate_modulation(1.0, -1.0, lambda_min=1e-4)
    c = m.closed_form_c(1, -1)
    ts = m.collapse_time(1, -1).t_star
    k = len(tr.t) // 2
    assert m.exact_lambda(ts - tr.t[k], c) == pytest.approx(tr.lam[k], rel=1e-8)


def test_extended_equation_changes_dynamics():
    a = m.integrate_modulation(1.0, -1.0, lambda_min=1e-3)
    b = m.integrate_modulation(1.0, -1.0, lambda_min=1e-3, extended_coeff=0.5)
    assert b.t[-1] != pytest.approx(a.t[-1], rel=1e-3)
