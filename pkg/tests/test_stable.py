import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pamlab import stable as sb
from pamlab.scaling import ScalingConstants


def test_cf_at_zero_and_domain():
    for a in (0.3, 1.0, 1.7):
        assert sb.stable_cf(a, 0.0) == 1.0
    for a in (0.0, 2.0, -1.0):
        with pytest.raises(sb.DomainError):
            sb.StableLaw(a)


@pytest.mark.parametrize("u", [0.5, 1.0, 3.0])
def test_cf_half_is_levy_distribution(u):
    # alpha = 1/2 is the Levy distribution with scale pi/2: phi(u) = exp(-sqrt(-2 i c u))
    c = math.pi / 2
    assert sb.stable_cf(0.5, u) == pytest.approx(cmath.exp(-cmath.sqrt(-2j * c * u)), abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 1.95), st.floats(-20, 20))
def test_cf_hermitian_and_bounded(a, u):
    phi = sb.stable_cf(a, u)
    assert abs(phi) <= 1 + 1e-12
    assert sb.stable_cf(a, -u) == pytest.approx(phi.conjugate(), abs=1e-13)


def test_cf_array_input():
    u = np.array([[0.5, 1.0], [-1.0, 2.0]])
    out = sb.stable_cf(sb.StableLaw(1.5), u)
    assert out.shape == (2, 2)
    assert out[1, 0] == pytest.approx(out[0, 1].conjugate())


def test_drift_constant():
    assert sb.drift_nu(0.5) == pytest.approx(math.pi / (2 * math.sqrt(2)), rel=1e-15)


@pytest.mark.parametrize("nu,s2", [(0.3, 0.0), (-1.2, 0.5)])
def test_infdiv_without_jumps(nu, s2):
    t = sb.LevyTriple(nu, s2)
    for u in (-2.0, 0.7, 3.0):
        assert sb.infdiv_cf(t, u) == pytest.approx(cmath.exp(1j * nu * u - s2 * u * u / 2), abs=1e-15)


@pytest.mark.parametrize("alpha", [0.5, 1.5])
@pytest.mark.parametrize("u", [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])
def test_stable_equals_levy_khintchine(alpha, u):
    triple = sb.LevyTriple(sb.drift_nu(alpha), 0.0, power_alpha=alpha)
    assert abs(sb.infdiv_cf(triple, u) - sb.stable_cf(alpha, u)) < 1e-9


def test_discrete_spectral_function():
    t = sb.LevyTriple(0.0, atoms=np.array([2.0, 1.0]), masses=np.array([0.5, 0.25]))
    assert t.spectral_function(np.array([0.5, 1.0, 1.5, 3.0])).tolist() == [-0.75, -0.5, -0.5, 0.0]
    u = 0.8
    want = cmath.exp(sum(m * (cmath.exp(1j * u * x) - 1 - 1j * u * x / (1 + x * x)) for x, m in ((2.0, 0.5), (1.0, 0.25))))
    assert sb.infdiv_cf(t, u) == pytest.approx(want, abs=1e-15)


def test_pareto_diagnostics():
    n = 1000.0
    Y = sb.pareto_surrogate(0.5, n, 10**6, seed=0)
    sample = sb.TriangularArraySample(1.0, n, Y)
    x = np.array([0.5, 1.0, 2.0, 4.0])
    d = sb.triangular_diagnostics(sample, x, 1.0)
    # about 1400 exceedances at x = 0.5: binomial noise is under 3%
    assert np.allclose(d.L_hat, -(x**-0.5), rtol=0.1)
    s2 = [sb.triangular_diagnostics(sample, x, y).sigma2 for y in (1.0, 0.1, 0.01)]
    assert s2[0] > s2[1] > s2[2]
    assert s2[2] < 0.05 * s2[0]


def test_degenerate_sample():
    sample = sb.TriangularArraySample(1.0, 10.0, np.zeros(50))
    d = sb.triangular_diagnostics(sample, np.array([0.5, 1.0]), 1.0)
    assert np.all(d.L_hat == 0) and d.sigma2 == 0 and d.nu == 0
    assert sb.tail_exponent_check(np.zeros(1), 10.0)["wide"]


def test_regime_centering():
    Y = np.array([0.5, 2.0, 0.25])
    assert sb.TriangularArraySample(1, 3, Y, "below_gamma1").centering() == 0.0
    assert sb.TriangularArraySample(1, 3, Y, "gamma1").centering() == pytest.approx(0.25)
    assert sb.TriangularArraySample(1, 3, Y, "above_gamma1").centering() == pytest.approx(2.75 / 3)


def test_truncated_moments_half():
    n = 1e4
    Y = sb.pareto_surrogate(0.5, n, 4 * 10**6, seed=1)
    r = sb.truncated_moment_check(Y, n, 0.5)
    assert r["first_limit"] == 1.0 and r["second_limit"] == pytest.approx(1 / 3)
    assert r["first_rel_err"] < 0.05 and r["second_rel_err"] < 0.05


def test_truncated_moments_three_halves():
    n, a = 1e4, 1.5
    Y = sb.pareto_surrogate(a, n, 4 * 10**6, seed=2)
    # exact mean of Y on Y <= 1 for the surrogate: (n E[Y; Y<=1] -> ) a/(1-a) - a/(1-a) n^{1-1/a}
    centering = a / (a - 1) * n ** (-1 / a)
    r = sb.truncated_moment_check(Y, n, a, centering=centering)
    assert r["first_rel_err"] < 0.05 and r["second_rel_err"] < 0.05


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_tail_exponent_pareto(alpha):
    # the fitting band n P(Y > u) in [0.25, 4] needs enough samples beyond 0.25 / n
    Y = sb.pareto_surrogate(alpha, 100.0, 10**5, seed=3)
    r = sb.tail_exponent_check(Y, 100.0)
    assert r["alpha_hat"] == pytest.approx(alpha, rel=0.05)
    assert not r["wide"]


def test_cf_distance_pareto_half():
    # Monte Carlo error of the n-th power of the sample CF is about sqrt(n / size)
    n = 100.0
    Y = sb.pareto_surrogate(0.5, n, 10**6, seed=4)
    dist, _, _ = sb.cf_distance(Y, n, 0.5, np.linspace(0.25, 2, 8))
    assert dist < 0.05


def test_regime_of():
    c = ScalingConstants(2.0, 1.5)
    assert sb.regime_of(c) == "above_gamma1"
    assert sb.regime_of(ScalingConstants(2.0, c.gamma1)) == "gamma1"
    assert sb.regime_of(ScalingConstants(2.0, 0.5)) == "below_gamma1"


def test_simulate_mL_small():
    c = ScalingConstants(2.0, 0.7)
    s = sb.simulate_mL(c, 3.0, seed=0, n_env=200, h_samples=5000)
    assert s.Y.shape == (200,) and np.all(s.Y >= 0)
    m = s.meta
    assert m["box_side"] == m["l"] - 2 * m["r"]
    assert s.n_t == (m["L"] // m["l"]) ** 1
    again = sb.simulate_mL(c, 3.0, seed=0, n_env=200, h_samples=5000)
    assert np.array_equal(s.Y, again.Y)
    with pytest.raises(NotImplementedError):
        sb.simulate_mL(ScalingConstants(2.0, 0.7, d=2), 3.0, 0, 10)
