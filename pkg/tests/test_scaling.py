import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pamlab import scaling as sc

# zeta_1(s) for d=1, kappa=1 from a 30-digit mpmath double integral over the
# two neighbour values (independent of the package quadrature)
ZETA1_ORACLE = {
    (0.0, 2.0): 0.41111229050718743593,
    (1.0, 2.0): 0.073953774518272721136,
    (3.0, 2.0): 0.000041196178537633328527,
    (2.0, 1.5): 0.015711381797710241206,
}


@pytest.mark.parametrize("rho,M", [(1.5, 1), (2.0, 2), (2.5, 2), (3.0, 3), (3.5, 3), (1.0001, 1)])
def test_compute_M(rho, M):
    assert sc.compute_M(rho) == M
    rp = rho / (rho - 1)
    assert 2 * M * rp > 2 * (M + 1)


def test_compute_M_domain():
    with pytest.raises(sc.DomainError):
        sc.compute_M(1.0)
    with pytest.raises(sc.DomainError):
        sc.ScalingConstants(0.9, 1.0)


def test_constants_identities():
    c = sc.ScalingConstants(3.0, 0.5)
    assert c.rho_prime == 1.5
    assert c.gamma1 == pytest.approx(0.5)
    assert c.A0 == pytest.approx(1.0)
    assert sc.K_constants(c)["K5"] == pytest.approx(0.75)
    for rho in (1.5, 2.5, 3.7):
        c = sc.ScalingConstants(rho, 1.0)
        assert c.rho_prime / rho == pytest.approx(c.rho_prime - 1)
        assert sc.ScalingConstants(rho, c.gamma1).alpha == pytest.approx(1.0)
        assert c.A0 ** c.rho == pytest.approx(c.alpha ** c.rho_prime)


def test_loop_counts():
    assert [sc.loop_count(1, j) for j in (1, 2, 3)] == [2, 6, 20]
    assert [sc.loop_count(2, j) for j in (1, 2)] == [4, 36]


def test_B_script():
    assert sc.B_script(1, 1) == pytest.approx(4 / 3)
    assert sc.B_script(1, 2) == pytest.approx(4 / (1 + 4 / 16))
    assert sc.B_script(2, 1) == pytest.approx(2 / (1 + 2 / 4 + 6 / 16))


@pytest.mark.parametrize("d,N", [(1, 1), (1, 2), (2, 1)])
def test_B_N_at_zero_is_deterministic(d, N):
    c = sc.ScalingConstants(2.0, 1.0, d=d)
    env = np.random.default_rng(0).weibull(2.0, (5, (2 * N + 1) ** d))
    assert np.allclose(sc.B_N(0.0, env, N, c), c.B_script(N), rtol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 20), st.floats(0.01, 5), st.integers(0, 10**6))
def test_B_N_increasing_in_s(s, ds, seed):
    c = sc.ScalingConstants(2.0, 1.0)
    env = np.random.default_rng(seed).weibull(2.0, (3, 5))
    assert np.all(sc.B_N(s + ds, env, 2, c) > sc.B_N(s, env, 2, c))


def test_B_N_restricts_larger_box():
    c = sc.ScalingConstants(2.0, 1.0)
    env = np.random.default_rng(1).weibull(2.0, 7)
    assert sc.B_N(2.0, env, 1, c) == pytest.approx(sc.B_N(2.0, env[2:5], 1, c), rel=1e-15)


@pytest.mark.parametrize("key", sorted(ZETA1_ORACLE))
def test_zeta_quadrature_matches_oracle(key):
    s, rho = key
    est = sc.zeta_N(s, 1, sc.ScalingConstants(rho, 1.0), estimator="quadrature")
    assert est.value == pytest.approx(ZETA1_ORACLE[key], rel=1e-11)


def test_zeta_at_zero_exact():
    for d, N in ((1, 1), (1, 2), (2, 1)):
        c = sc.ScalingConstants(2.0, 1.0, d=d)
        est = sc.zeta_N(0.0, N, c, n=2000)
        assert est.value == pytest.approx(math.exp(-c.B_script(N) ** 2 / 2), rel=1e-13)


def test_zeta_mc_against_oracle():
    c = sc.ScalingConstants(2.0, 1.0)
    est = sc.zeta_N(1.0, 1, c, n=200_000, seed=3)
    assert abs(est.value - ZETA1_ORACLE[(1.0, 2.0)]) < 4 * est.error


def test_zeta_common_random_numbers_monotone():
    c = sc.ScalingConstants(2.0, 1.0)
    sample = sc.sample_environments(5000, 2, 1, 2.0, seed=1)
    vals = [sc.log_zeta_mc(s, sample, 2, c) for s in np.linspace(0, 10, 41)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_zeta_errors():
    c = sc.ScalingConstants(2.0, 1.0)
    with pytest.raises(sc.DomainError):
        sc.zeta_N(-1.0, 1, c)
    with pytest.raises(NotImplementedError):
        sc.zeta_N(1.0, 2, c, estimator="quadrature")
    with pytest.raises(ValueError):
        sc.zeta_N(1.0, 1, c, estimator="bogus")


def test_tau_log_L_roundtrip():
    c = sc.ScalingConstants(2.5, 0.7, d=2)
    assert sc.tau_from_log_L(sc.log_L_from_tau(13.0, c), c) == pytest.approx(13.0)


def test_solve_h_boundary_and_domain():
    c = sc.ScalingConstants(1.5, 1.0)
    sample = sc.sample_environments(2000, 1, 1, 1.5, seed=0)
    edge = c.B_script(1) ** 1.5 / 1.5
    assert sc.solve_h(edge, c, sample=sample).h == 0.0
    with pytest.raises(sc.DomainError):
        sc.solve_h(0.9 * edge, c, sample=sample)


def test_solve_h_residual_and_monotone():
    c = sc.ScalingConstants(2.0, 1.0)
    sample = sc.sample_environments(5000, 2, 1, 2.0, seed=0)
    hs = []
    for log_L in (2.0, 5.0, 10.0, 20.0):
        sol = sc.solve_h(log_L, c, sample=sample)
        assert sol.residual < 1e-8
        hs.append(sol.h)
    assert all(b > a for a, b in zip(hs, hs[1:]))


def test_h_expansion_leading_term():
    c = sc.ScalingConstants(3.0, 0.5)
    terms = sc.h_expansion(16.0, c, n=2000)
    assert terms[0] == pytest.approx(2.0)
    assert len(terms) == c.M + 1
    with pytest.raises(sc.DomainError):
        sc.h_expansion(1.0, c, n=100)


def test_corollary_variants():
    tau = 50.0
    for rho in (1.5, 1.8):
        c = sc.ScalingConstants(rho, 1.0)
        assert sc.explicit_h_expansion(tau, c) == pytest.approx(c.A0 * tau ** (c.rho_prime - 1) - 2)
    c = sc.ScalingConstants(2.5, 1.0)
    assert sc.explicit_h_expansion(tau, c, "cubic") != sc.explicit_h_expansion(tau, c, "inverse")
    c = sc.ScalingConstants(2.5, sc.ScalingConstants(2.5, 1.0).gamma1)
    assert sc.explicit_h_expansion(tau, c, "cubic") == pytest.approx(sc.explicit_h_expansion(tau, c, "inverse"))
    with pytest.raises(sc.DomainError):
        sc.explicit_h_expansion(tau, sc.ScalingConstants(3.6, 1.0))


def test_corollary_tracks_solved_h():
    # rho in [2,3): the second-order term brings the closed form within O(tau^{1-rho'}) of h
    c = sc.ScalingConstants(2.5, sc.ScalingConstants(2.5, 1.0).gamma1)
    sample = sc.sample_environments(20000, c.M, 1, c.rho, seed=0)
    gaps = []
    for tau in (20.0, 80.0):
        h = sc.solve_h(sc.log_L_from_tau(tau, c), c, sample=sample).h
        first = c.A0 * tau ** (c.rho_prime - 1) - 2
        gaps.append((abs(h - first), abs(h - sc.explicit_h_expansion(tau, c))))
    for crude, fine in gaps:
        assert fine < crude


@pytest.mark.parametrize("tau", [1e2, 1e4, 1e6])
def test_saddle_point_is_maximum(tau):
    c = sc.ScalingConstants(3.5, sc.ScalingConstants(3.5, 1.0).gamma1)
    rep = sc.saddle_point_check(tau, c)
    assert not rep["boundary"]
    assert abs(rep["r_prime"]) < 1e-8 * max(1.0, rep["x_t"] ** (c.rho - 1))
    assert rep["r_second"] < 0
    assert rep["lead_a0k1"] == pytest.approx(rep["lead_k1"])


def test_saddle_ratio_tends_to_one():
    c = sc.ScalingConstants(3.5, sc.ScalingConstants(3.5, 1.0).gamma1)
    dev = [abs(sc.saddle_point_check(t, c)["ratio_a0k1"] - 1) for t in (1e2, 1e4, 1e6, 1e8)]
    assert all(b < a for a, b in zip(dev, dev[1:]))
    assert dev[-1] < 0.01
    with pytest.raises(sc.DomainError):
        sc.saddle_point_check(100.0, sc.ScalingConstants(2.5, 1.0))
