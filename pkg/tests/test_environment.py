import math

import numpy as np
import pytest
from scipy import stats

from pamlab.environment import (
    ParameterError,
    Potential,
    WeibullParams,
    extreme_value_diagnostics,
    gumbel_cdf,
    gumbel_normalizers,
    ks_distance,
    order_statistics,
    replica_maxima,
    sample_potential,
)
from pamlab.lattice import Box


def test_rho_must_exceed_one():
    with pytest.raises(ParameterError):
        WeibullParams(1.0)
    with pytest.raises(ParameterError):
        sample_potential(Box.centered(1), 0.5, 0)


@pytest.mark.parametrize("rho", [1.1, 1.5, 2.0, 3.7])
def test_conjugate_exponent(rho):
    p = WeibullParams(rho)
    assert 1 / rho + 1 / p.rho_prime == pytest.approx(1.0, abs=1e-15)


def test_survival_at_sqrt2():
    pot = sample_potential(Box.centered(500_000), WeibullParams(2.0), seed=3)
    frac = float(np.mean(pot.values > math.sqrt(2)))
    p = math.exp(-1)
    se = math.sqrt(p * (1 - p) / pot.values.size)
    assert abs(frac - p) <= 3 * se
    assert np.all(pot.values >= 0)


def test_probability_integral_transform():
    params = WeibullParams(2.5)
    pot = sample_potential(Box.centered(5000), params, seed=11)
    u = params.survival(pot.values)
    assert stats.kstest(u, "uniform").pvalue > 1e-3


def test_determinism_and_site_locality():
    params = WeibullParams(2.0)
    a = sample_potential(Box.centered(5, 2), params, 7)
    b = sample_potential(Box.centered(5, 2), params, 7)
    assert np.array_equal(a.values, b.values)
    # a site's value does not depend on the box it is drawn in
    small = sample_potential(Box((1, 1), 1), params, 7).as_dict()
    big = a.as_dict()
    assert all(big[s] == v for s, v in small.items())
    assert not np.array_equal(a.values, sample_potential(Box.centered(5, 2), params, 8).values)


def test_order_statistics_examples():
    box = Box.centered(1)
    p = Potential(box, np.array([3.0, 1.0, 2.0]), 0, 2.0)
    o = order_statistics(p)
    assert list(o.sorted_values) == [3.0, 2.0, 1.0]
    assert [tuple(s) for s in o.sites] == [(-1,), (1,), (0,)]
    flat = order_statistics(Potential(Box.centered(1, 2), np.ones(9), 0, 2.0))
    assert [tuple(s) for s in flat.sites] == [tuple(s) for s in Box.centered(1, 2).sites()]
    single = order_statistics(Potential(Box.centered(0), np.array([4.2]), 0, 2.0))
    assert single.sorted_values[0] == 4.2


def test_order_statistics_is_sorted_permutation():
    pot = sample_potential(Box.centered(20, 2), WeibullParams(1.7), 5)
    o = order_statistics(pot)
    assert np.all(np.diff(o.sorted_values) <= 0)
    assert np.array_equal(np.sort(o.sorted_values), np.sort(pot.values))
    d = pot.as_dict()
    assert all(d[tuple(s)] == v for s, v in zip(o.sites, o.sorted_values))


def test_gumbel_normalizers_examples():
    a, b = gumbel_normalizers(math.exp(2), WeibullParams(2.0))
    assert (a, b) == pytest.approx((2.0, 0.5), rel=1e-14)
    a, b = gumbel_normalizers(math.exp(8), WeibullParams(2.0))
    assert (a, b) == pytest.approx((4.0, 0.25), rel=1e-14)


@pytest.mark.parametrize("rho,n", [(1.5, 100), (2.0, 1000), (3.0, 17)])
def test_gumbel_normalizer_identity(rho, n):
    # a / b = (rho log n)^{1/rho} (rho log n)^{1 - 1/rho} = rho log n
    a, b = gumbel_normalizers(n, rho)
    assert a / b == pytest.approx(rho * math.log(n), rel=1e-13)
    with pytest.raises(ParameterError):
        gumbel_normalizers(1, rho)


def test_ks_distance_against_exact_quantiles():
    x = -np.log(-np.log((np.arange(1, 1001) - 0.5) / 1000))
    assert ks_distance(x, gumbel_cdf) == pytest.approx(0.5 / 1000, abs=1e-12)


def test_replica_maxima_worker_independent():
    params = WeibullParams(2.0)
    a = replica_maxima(params, 64, 3000, 1, workers=1)
    b = replica_maxima(params, 64, 3000, 1, workers=2)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert np.all(a[0] >= a[1])


def test_extreme_value_report():
    rep = extreme_value_diagnostics(WeibullParams(2.0), Box.centered(15), 2000, 0)
    assert rep["box_size"] == 31
    first = rep["exceed"][0]
    assert first["bound_v1"] == pytest.approx(1.0)
    assert first["freq_v1"] <= 1.1 * first["bound_v1"]
    assert all(e["freq_v2"] <= e["bound_v2"] for e in rep["exceed"])
    with pytest.raises(ParameterError):
        extreme_value_diagnostics(WeibullParams(2.0), 31, 999, 0)


def test_ks_decreases_with_box_side_on_average():
    params = WeibullParams(2.0)
    ks = np.array([[extreme_value_diagnostics(params, n, 10_000, s)["ks"] for n in (32, 128, 512)]
                   for s in range(4)]).mean(axis=0)
    assert ks[0] > ks[1] > ks[2]
