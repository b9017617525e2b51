import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from popcache.constants import MEMORY_SHARING_MAX_LOSS
from popcache.errors import ConstraintViolationError, InvalidParameterError
from popcache.models import (
    RedundancyAllocation,
    Segmentation,
    SystemConfig,
    build_popularity,
    check_feasibility,
    delay_bound,
    effective_dof,
    expected_delay,
    memory_sharing_split,
    uniform_delay,
    upper_clamps,
)


@pytest.mark.parametrize("K, expected", [(300, 10.8), (500, 18.0), (1000, 36.0), (2000, 72.0)])
def test_uniform_delay_scenario_1(scenario1, K, expected):
    assert uniform_delay(scenario1(K)) == pytest.approx(expected, rel=1E-12)


def test_uniform_delay_scenario_2(scenario2):
    assert uniform_delay(scenario2(1000)) == pytest.approx(122.5, rel=1E-12)


def test_uniform_popularity_two_files():
    cfg = SystemConfig(N=2, K=40, K_T=4, gamma=0.25, gamma_T=0.5, F=4, Lambda=4)
    model = build_popularity(2, 0.0)
    seg = Segmentation([0, 1, 2], 2)
    alloc = RedundancyAllocation([1, 2, 2])
    assert expected_delay(cfg, model, seg, alloc) == pytest.approx(uniform_delay(cfg), rel=1E-14)
    assert uniform_delay(cfg) == pytest.approx(7.5)


def test_unsegmented_delay_is_uniform(scenario1):
    cfg = scenario1(500)
    model = build_popularity(cfg.N, 1.2)
    seg = Segmentation([cfg.N], cfg.N)
    assert expected_delay(cfg, model, seg, RedundancyAllocation([cfg.L])) == pytest.approx(uniform_delay(cfg))


def test_upper_clamps(toy):
    model = build_popularity(8, 1.0)
    seg = Segmentation([3, 4, 8], 8)
    U = upper_clamps(toy, model, seg)
    masses = seg.masses(model.prefix)
    assert U[0] == 1
    np.testing.assert_allclose(U[1:], np.minimum(4, 10*masses[1:]))


@pytest.mark.parametrize("Lvec, constraint", [
    ([1.0, 0.5, 2.6], "dimension"),
    ([1.5, 2.6], "broadcast-redundancy"),
])
def test_feasibility_dimension_and_broadcast(toy, Lvec, constraint):
    model = build_popularity(8, 1.0)
    seg = Segmentation([3, 8], 8)
    with pytest.raises(ConstraintViolationError) as error:
        check_feasibility(toy, model, seg, RedundancyAllocation(Lvec))
    assert error.value.constraint == constraint


def test_feasibility_lower_upper_budget(toy):
    model = build_popularity(8, 0.0)
    seg = Segmentation([0, 2, 8], 8)
    with pytest.raises(ConstraintViolationError) as error:
        check_feasibility(toy, model, seg, RedundancyAllocation([1, 0.5, 2]))
    assert error.value.constraint == "lower-bound"

    # U_2 = min(4, 10*2/8) = 2.5
    with pytest.raises(ConstraintViolationError) as error:
        check_feasibility(toy, model, seg, RedundancyAllocation([1, 2.6, 1]))
    assert error.value.constraint == "upper-bound"
    check_feasibility(toy, model, seg, RedundancyAllocation([1, 2.6, 1]), upper_clamp=False)

    with pytest.raises(ConstraintViolationError) as error:
        check_feasibility(toy, model, seg, RedundancyAllocation([1, 2.5, 2.5]))
    assert error.value.constraint == "budget"


def test_memory_sharing_split():
    split = memory_sharing_split(2.3)
    assert (split.floor, split.ceil) == (2, 3)
    assert split.p == pytest.approx(0.3)
    assert split.loss_ratio == pytest.approx(1 + 0.21/6)
    assert memory_sharing_split(1.5).loss_ratio == pytest.approx(1.125)
    assert memory_sharing_split(3.0) == (3, 4, 0.0, 1.0)
    with pytest.raises(InvalidParameterError):
        memory_sharing_split(0.5)


@settings(max_examples=200, derandomize=True)
@given(L=st.floats(1, 60))
def test_memory_sharing_loss_is_bounded(L):
    split = memory_sharing_split(L)
    assert 1 <= split.loss_ratio <= MEMORY_SHARING_MAX_LOSS + 1E-12
    assert split.p*split.ceil + (1 - split.p)*split.floor == pytest.approx(L, rel=1E-9)


def test_effective_dof(scenario1):
    cfg = scenario1(300)
    assert effective_dof(3.0, cfg) == pytest.approx(15)
    assert effective_dof(1.5, cfg) == pytest.approx(1/(0.5/10 + 0.5/5))
    assert effective_dof(1.5, cfg, memory_sharing=False) == pytest.approx(7.5)


@settings(max_examples=100, derandomize=True)
@given(L=st.floats(1, 50))
def test_effective_dof_matches_loss_ratio(L):
    cfg = SystemConfig(N=6000, K=300, K_T=50, gamma=0.1, gamma_T=0.1, F=100000)
    relaxed = effective_dof(L, cfg, memory_sharing=False)
    assert relaxed/effective_dof(L, cfg) == pytest.approx(memory_sharing_split(L).loss_ratio, rel=1E-9)


def test_delay_bound_uniform_popularity(scenario1):
    cfg = scenario1(500)
    bound = delay_bound(cfg, build_popularity(cfg.N, 0.0))
    assert bound.gmax == pytest.approx(1.0)
    assert bound.lower_bound_delay == pytest.approx(uniform_delay(cfg))


def test_delay_bound_grows_with_skew(scenario1):
    cfg = scenario1(500)
    gains = [delay_bound(cfg, build_popularity(cfg.N, alpha)).gmax for alpha in (0.0, 0.4, 0.8, 1.2, 1.6)]
    assert all(b > a for a, b in zip(gains, gains[1:]))
    bound = delay_bound(cfg, build_popularity(cfg.N, 0.8))
    assert bound.lower_bound_delay == pytest.approx(uniform_delay(cfg)/bound.gmax)


def test_delay_is_convex_in_redundancy(toy):
    model = build_popularity(8, 1.0)
    seg = Segmentation([3, 8], 8)
    delays = [expected_delay(toy, model, seg, RedundancyAllocation([1, L]), check=False) for L in np.linspace(1, 4, 31)]
    second = np.diff(delays, 2)
    assert np.all(second > 0)
    assert all(math.isfinite(d) for d in delays)


def test_memory_sharing_worst_case_on_grid():
    grid = np.round(np.arange(1000, 50001)*1E-3, 3)
    losses = np.array([memory_sharing_split(L).loss_ratio for L in grid])
    assert losses.max() == pytest.approx(MEMORY_SHARING_MAX_LOSS, abs=1E-12)
    assert grid[losses.argmax()] == 1.5
    assert np.all(losses <= MEMORY_SHARING_MAX_LOSS + 1E-12)
