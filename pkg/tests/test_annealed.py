import math

import numpy as np
import pytest
from scipy import integrate

from pamlab import annealed as an


def test_H_at_zero():
    assert an.cumulant_H(0.0, 2.5) == 0.0
    assert an.cumulant_H_rho2(0.0) == 0.0
    with pytest.raises(ValueError):
        an.cumulant_H(-1.0, 2.0)


@pytest.mark.parametrize("t", [0.1, 0.5, 0.99, 1.0, 2.0, 5.0, 20.0])
def test_H_closed_form_at_two(t):
    assert an.cumulant_H(t, 2.0) == pytest.approx(an.cumulant_H_rho2(t), rel=1e-11, abs=1e-13)


@pytest.mark.parametrize("rho", [1.5, 2.0, 3.0])
def test_H_convex_with_mean_slope(rho):
    ts = np.linspace(0.0, 4.0, 41)
    H = np.array([an.cumulant_H(t, rho) for t in ts])
    assert np.all(np.diff(H, 2) > 0)
    eps = 1e-4
    assert an.cumulant_H(eps, rho) / eps == pytest.approx(an.weibull_moment(1, rho), rel=1e-3)


def test_weibull_moments_by_quadrature():
    for rho in (1.5, 2.0, 3.0):
        for j in (0, 1, 2, 5):
            num = integrate.quad(lambda y: y**j * y ** (rho - 1) * math.exp(-(y**rho) / rho), 0, np.inf)[0]
            assert an.weibull_moment(j, rho) == pytest.approx(num, rel=1e-9)


@pytest.mark.parametrize("rho", [1.5, 2.0, 3.0])
def test_asymptote_constant(rho):
    ts = (4.0, 16.0, 64.0)
    lap = [abs(an.cumulant_H(t, rho) - an.cumulant_asymptote(t, rho, "two_pi")) for t in ts]
    # at rho = 2 the remainder reaches rounding level by t = 16
    assert all(b < a or b < 1e-10 for a, b in zip(lap, lap[1:]))
    assert lap[-1] < 0.01
    pi_const = an.cumulant_H(64.0, rho) - an.cumulant_asymptote(64.0, rho, "pi")
    assert pi_const == pytest.approx(0.5 * math.log(2), abs=0.01)


def test_taylor_low_order():
    rho, k = 2.0, 0.7
    c = an.taylor_coefficients(rho, k, 1, order=3)
    m1, m2, m3 = (an.weibull_moment(j, rho) for j in (1, 2, 3))
    # the Laplacian annihilates constants, and E[(Laplacian v)(0)] = 0
    assert c[:3] == pytest.approx([1.0, m1, m2], rel=1e-13)
    # E[v(0) (k Laplacian v)(0)] = k (2 m1^2 - 2 m2) is the first genuine cross term
    assert c[3] == pytest.approx(m3 + k * (2 * m1 * m1 - 2 * m2), rel=1e-13)


def test_mc_zero_H_is_exact():
    est = an.annealed_mean_mc(1.0, 2.0, n_paths=500, zero_H=True)
    assert est.log_mean == 0.0


@pytest.mark.parametrize("rho,t", [(2.0, 0.5), (3.0, 0.8)])
def test_mc_matches_taylor(rho, t):
    est = an.annealed_mean_mc(t, rho, n_paths=40_000, seed=0)
    exact = math.log(an.taylor_mean(t, rho, order=12))
    assert abs(est.log_mean - exact) < 3 * est.stderr


def test_mc_reproducible():
    a = an.annealed_mean_mc(1.0, 2.0, n_paths=3000, seed=5, chunk=1000)
    b = an.annealed_mean_mc(1.0, 2.0, n_paths=3000, seed=5, chunk=1000)
    assert a == b


def test_formula_example():
    # rho = 2, t = 1: the t^{2-rho'} correction cancels kappa t
    assert an.annealed_asymptotic_formula(1.0, 2.0) == pytest.approx(0.5 * math.log(math.pi) + 0.5)
    # rho = 2, t = 4: 16/2 - 2 (4 - 1)
    assert an.annealed_asymptotic_formula(4.0, 2.0) == pytest.approx(0.5 * math.log(math.pi) + 2.0, rel=1e-15)
    assert an.annealed_asymptotic_formula(2.0, 3.0, kappa=1.0, variant="kappa2") == pytest.approx(an.annealed_asymptotic_formula(2.0, 3.0))
    assert an.annealed_asymptotic_formula(2.0, 3.0, kappa=2.0, variant="kappa2") != an.annealed_asymptotic_formula(2.0, 3.0, kappa=2.0)


def test_series_first_term():
    t, rho = 3.0, 2.5
    rp = rho / (rho - 1)
    _, terms = an.annealed_series(t, rho, n_max=3)
    assert terms[0] == pytest.approx(t ** (1 - rp / 2))
    assert all(x > 0 for x in terms)


@pytest.mark.parametrize("t,rho,kappa,d", [(2.0, 2.5, 1.0, 1), (3.0, 3.0, 0.5, 1), (2.0, 2.5, 1.0, 2)])
def test_s1_paths_match_closed_form(t, rho, kappa, d):
    m_max = 4 if d == 1 else 3
    paths = an.s1_path_sum(t, rho, kappa, d, m_max)
    closed = an.s1_closed_form_terms(t, rho, kappa, d, m_max)
    assert paths == pytest.approx(closed, rel=1e-13)
    full = an.s1_closed_form(t, rho, kappa, d)
    assert sum(an.s1_closed_form_terms(t, rho, kappa, d, 40)) == pytest.approx(full, rel=1e-13)


def test_s2_geometric():
    t, rho = 4.0, 2.5
    assert sum(an.s2_geometric_terms(t, rho, m_max=200)) == pytest.approx(an.s2_closed_form(t, rho), rel=1e-13)
    with pytest.raises(ValueError):
        an.s2_closed_form(1.0, 2.5)
    # single excursion to a neighbour: path and geometric terms agree
    assert an.s2_path_sum(t, rho, m_max=1)[0] == pytest.approx(an.s2_geometric_terms(t, rho, m_max=1)[0], rel=1e-13)


@pytest.mark.parametrize("ns", [(1,), (3,), (1, 1), (2, 3), (1, 2, 3), (2, 2, 2, 2), (1, 1, 1, 5)])
def test_simplex_integral(ns):
    num, exact = an.j_integral_check(ns)
    assert num == pytest.approx(exact, rel=1e-10)


def test_simplex_closed_form_on_u():
    # int_{x+y<u} x y dx dy = u^4 / 24
    nodes, weights = np.polynomial.legendre.leggauss(6)
    assert float(an._J_recursive((2, 2), 1.7, nodes, weights)) == pytest.approx(1.7**4 / 24, rel=1e-13)
    with pytest.raises(ValueError):
        an.j_integral_check((1, 1, 1, 1, 1))


def test_log_gamma_ratio():
    assert an.log_gamma_ratio(5, 3) == pytest.approx(math.log(12))
