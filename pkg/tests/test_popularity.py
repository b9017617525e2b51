import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from popcache.errors import InvalidParameterError
from popcache.models import PopularityModel, build_popularity, cumulative_mass


def test_uniform_popularity():
    model = build_popularity(4, 0.0)
    np.testing.assert_allclose(model.p, [0.25]*4)
    np.testing.assert_allclose(model.prefix, [0, 0.25, 0.5, 0.75, 1])


def test_harmonic_popularity():
    model = build_popularity(3, 1.0)
    np.testing.assert_allclose(model.p, [6/11, 3/11, 2/11], rtol=1E-14)
    assert cumulative_mass(model, 1, 3) == pytest.approx(5/11, rel=1E-14)
    assert model.cumulative_mass(0, 0) == 0


@settings(max_examples=100, derandomize=True, deadline=None)
@given(N=st.integers(1, 5000), alpha=st.floats(0, 3))
def test_normalized_and_sorted(N, alpha):
    model = PopularityModel(N, alpha)
    assert abs(math.fsum(model.p) - 1) <= 1E-12
    assert model.prefix[-1] == pytest.approx(1, abs=1E-12)
    assert np.all(np.diff(model.p) <= 0)
    assert np.all(model.p > 0)


def test_prefix_matches_direct_sums():
    model = build_popularity(6000, 0.8)
    for lo, hi in [(0, 6000), (0, 157), (157, 1278), (1278, 6000), (5999, 6000)]:
        assert model.cumulative_mass(lo, hi) == pytest.approx(math.fsum(model.p[lo:hi]), rel=1E-10, abs=1E-15)


def test_steep_exponent_concentrates_mass():
    model = build_popularity(10, 50.0)
    assert model.p[0] > 1 - 1E-14
    assert abs(math.fsum(model.p) - 1) <= 1E-12


@pytest.mark.parametrize("N, alpha", [(0, 1.0), (10, -0.1), (10, float("nan")), (10, float("inf"))])
def test_invalid_model(N, alpha):
    with pytest.raises(InvalidParameterError):
        PopularityModel(N, alpha)


@pytest.mark.parametrize("lo, hi", [(2, 1), (-1, 2), (0, 4)])
def test_invalid_range(lo, hi):
    with pytest.raises(InvalidParameterError):
        build_popularity(3, 1.0).cumulative_mass(lo, hi)


def test_range_masses_add_up_exactly():
    model = build_popularity(6000, 0.8)
    rng = np.random.default_rng(5)
    for lo, hi, hj in np.sort(rng.integers(0, 6001, size=(10000, 3)), axis=1):
        assert model.cumulative_mass(lo, hi) + model.cumulative_mass(hi, hj) == model.cumulative_mass(lo, hj)


def test_prefix_strictly_increasing_on_steep_tail():
    # p_N is about 8e-19 here, below the float64 spacing near 1
    model = build_popularity(10**6, 3.0)
    assert np.all(np.diff(model.prefix_units) > 0)
    assert np.all(np.diff(model.prefix) > 0)
    assert float(model.prefix[-1]) == pytest.approx(1, abs=1E-12)
