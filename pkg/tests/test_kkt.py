import math
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from popcache.constants import BROADCAST, CHI, PHI, PSI, UNIFORM
from popcache.errors import InfeasibleError
from popcache.models import (
    RedundancyAllocation,
    Segmentation,
    SystemConfig,
    build_popularity,
    expected_delay,
    uniform_delay,
    upper_clamps,
)
from popcache.optimization import (
    build_solution,
    certify,
    complementarity_violations,
    optimized_delay,
    segment_objective,
    solve_allocation,
    stationarity_values,
    water_fill,
)

H3 = 11/6
H8 = 761/280

# N=200, K_T=10, L=3, Lambda=40, t=4
IMPROVEMENT_CONFIG = SystemConfig(N=200, K=2000, K_T=10, gamma=0.1, gamma_T=0.3, F=100000)


def test_water_fill_interior():
    fill = water_fill([0.5, 0.3, 0.2], [1, 1, 1], [math.inf]*3, 4.0)
    assert fill.labels == [CHI]*3
    assert math.fsum(fill.levels) == pytest.approx(4.0)
    ratios = [L/math.sqrt(pi) for L, pi in zip(fill.levels, [0.5, 0.3, 0.2])]
    assert ratios == pytest.approx([ratios[0]]*3)


def test_water_fill_upper_clamp():
    fill = water_fill([0.5, 0.3, 0.2], [1, 1, 1], [1.2, math.inf, math.inf], 4.0)
    assert fill.labels == [PSI, CHI, CHI]
    assert fill.levels[0] == 1.2
    assert fill.Psi_S == pytest.approx(1.2)
    assert math.fsum(fill.levels) == pytest.approx(4.0)
    assert fill.levels[1]/fill.levels[2] == pytest.approx(math.sqrt(0.3/0.2))


def test_water_fill_lower_clamp():
    fill = water_fill([0.5, 0.3, 0.2], [1, 1, 1], [math.inf]*3, 3.0)
    assert fill.levels == pytest.approx([1, 1, 1])
    assert fill.labels[1:] == [PHI, PHI]


def test_water_fill_massless_sublibrary():
    fill = water_fill([1.0, 0.0], [1, 1], [math.inf]*2, 3.0)
    assert fill.labels == [CHI, PHI]
    assert fill.levels == pytest.approx([2.0, 1.0])


def test_unsegmented_allocation(toy):
    model = build_popularity(8, 1.0)
    alloc = solve_allocation(toy, model, Segmentation([8], 8))
    assert alloc.Lvec.tolist() == [2.0]
    assert alloc.labels == (UNIFORM,)
    assert optimized_delay(toy, model, Segmentation([8], 8)) == uniform_delay(toy)


def test_toy_interior_allocation(toy):
    model = build_popularity(8, 1.0)
    seg = Segmentation([3, 8], 8)
    alloc = solve_allocation(toy, model, seg)
    assert alloc.labels == (BROADCAST, CHI)
    assert alloc.Lvec == pytest.approx([1, 2.6])
    pi_2 = 1 - H3/H8
    assert optimized_delay(toy, model, seg) == pytest.approx(3 + 15*pi_2/2.6, rel=1E-12)
    assert alloc.active_set.chi == (2,)
    assert alloc.active_set.residual_budget == pytest.approx(13)


def test_toy_upper_clamped_allocation(toy):
    model = build_popularity(8, 1.0)
    seg = Segmentation([4, 8], 8)
    alloc = solve_allocation(toy, model, seg)
    assert alloc.labels == (BROADCAST, PSI)
    # U_2 = K pi_2/Lambda, so the coded sub-library costs Lambda(1-gamma)/(1+t)
    assert optimized_delay(toy, model, seg) == pytest.approx(4 + toy.sublibrary_floor, rel=1E-12)
    assert alloc.Lvec[1] == pytest.approx(upper_clamps(toy, model, seg)[1])


def test_infeasible_clamp(toy):
    model = build_popularity(8, 1.0)
    seg = Segmentation([7, 8], 8)
    with pytest.raises(InfeasibleError):
        solve_allocation(toy, model, seg)
    with pytest.raises(InfeasibleError):
        optimized_delay(toy, model, seg)
    violation, delay = segment_objective(toy, model.prefix_list, seg.boundaries)
    assert violation > 0
    assert math.isinf(delay)
    # without the clamp the same segmentation is feasible
    assert math.isfinite(optimized_delay(toy, model, seg, upper_clamp=False))


@pytest.mark.parametrize("K, alpha, boundaries, expected", [
    (500, 0.4, (0, 1923, 6000), [1, 6.2933, 4.39]),
    (2000, 1.0, (0, 157, 1278, 6000), [1, 30.38, 8.14, 3.41]),
])
def test_reference_allocations(scenario1, zipf, K, alpha, boundaries, expected):
    cfg = scenario1(K)
    model = zipf(cfg.N, alpha)
    seg = Segmentation(boundaries, cfg.N)
    alloc = solve_allocation(cfg, model, seg)
    assert alloc.Lvec == pytest.approx(expected, rel=1E-2)
    assert alloc.labels[1] == PSI
    assert set(alloc.labels[2:]) == {CHI}


def test_broadcast_top_file_clamped(scenario1, zipf):
    cfg = scenario1(300)
    model = zipf(cfg.N, 1.6)
    alloc = solve_allocation(cfg, model, Segmentation([1, cfg.N], cfg.N))
    assert alloc.labels == (BROADCAST, PSI)
    assert alloc.Lvec[1] == pytest.approx(7.5*(1 - model.p[0]), rel=1E-12)
    assert alloc.Lvec[1] == pytest.approx(4.2058, rel=1E-3)


@pytest.mark.parametrize("K, alpha, boundaries", [
    (500, 0.4, (0, 1923, 6000)),
    (2000, 1.0, (0, 157, 1278, 6000)),
    (2000, 0.8, (12, 400, 2500, 6000)),
    (1000, 1.2, (0, 60, 6000)),
])
def test_kkt_certificates(scenario1, zipf, K, alpha, boundaries):
    cfg = scenario1(K)
    model = zipf(cfg.N, alpha)
    seg = Segmentation(boundaries, cfg.N)
    solution = build_solution(cfg, model, seg)
    alloc = solution.allocation

    assert solution.expected_delay == pytest.approx(optimized_delay(cfg, model, seg), rel=1E-12)
    values = stationarity_values(model, seg, alloc)
    if values.size:
        assert values.max() - values.min() <= 1E-8*values.max()
        # interior sub-libraries exhaust the budget
        assert math.fsum(alloc.Lvec*seg.widths) == pytest.approx(cfg.L*cfg.N, rel=1E-9)
    for check in certify(cfg, model, solution):
        assert check.passed, check


def test_certificates_skip_empty_broadcast(scenario1, zipf):
    cfg = scenario1(500)
    model = zipf(cfg.N, 0.4)
    seg = Segmentation((0, 1923, 6000), cfg.N)
    solution = build_solution(cfg, model, seg)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert complementarity_violations(cfg, model, seg, solution.allocation) == []
        assert all(check.passed for check in certify(cfg, model, solution))


def _grid_minimum(cfg, model, seg, upper_clamp=True, points=20001):
    masses = seg.masses(model.prefix)
    widths = seg.widths
    U = upper_clamps(cfg, model, seg) if upper_clamp else np.full(3, np.inf)
    residual = cfg.L*cfg.N - seg.broadcast_size
    top = min(U[1], (residual - widths[2])/widths[1])
    L2 = np.linspace(1, top, points)
    L3 = np.minimum(U[2], (residual - widths[1]*L2)/widths[2])
    delays = seg.broadcast_size + cfg.delay_scale*(masses[1]/L2 + masses[2]/L3)
    return delays[L3 >= 1].min()


@pytest.mark.parametrize("upper_clamp", [True, False])
@pytest.mark.parametrize("alpha, boundaries", [
    (1.0, (2, 4, 8)),
    (0.6, (0, 3, 8)),
    (1.4, (1, 2, 8)),
])
def test_against_grid_search(toy, alpha, boundaries, upper_clamp):
    model = build_popularity(8, alpha)
    seg = Segmentation(boundaries, 8)
    try:
        kkt = optimized_delay(toy, model, seg, upper_clamp)
    except InfeasibleError:
        pytest.skip("clamp below one")
    grid = _grid_minimum(toy, model, seg, upper_clamp)
    assert kkt <= grid*(1 + 1E-12)
    assert grid <= kkt*(1 + 1E-5)


def test_budget_shift_between_interior_sublibraries_costs_delay(scenario1, zipf):
    cfg = scenario1(2000)
    model = zipf(cfg.N, 1.0)
    seg = Segmentation((0, 157, 1278, 6000), cfg.N)
    alloc = solve_allocation(cfg, model, seg)
    best = expected_delay(cfg, model, seg, alloc)
    # move 1% of sub-library 3's memory to sub-library 4 and back
    for sign in (1, -1):
        delta = sign*0.01*alloc.Lvec[2]
        Lvec = alloc.Lvec.copy()
        Lvec[2] += delta
        Lvec[3] -= delta*seg.widths[2]/seg.widths[3]
        assert expected_delay(cfg, model, seg, RedundancyAllocation(Lvec)) > best


def test_uniform_popularity_keeps_uniform_delay(scenario1, zipf):
    cfg = scenario1(2000)
    model = zipf(cfg.N, 0.0)
    seg = Segmentation((0, 1000, 6000), cfg.N)
    alloc = solve_allocation(cfg, model, seg)
    assert alloc.Lvec[1:] == pytest.approx([cfg.L, cfg.L])
    assert optimized_delay(cfg, model, seg) == pytest.approx(uniform_delay(cfg), rel=1E-12)


def test_expected_demand_covers_delivery_rate(scenario1, zipf):
    cfg = scenario1(1000)
    assert cfg.Lambda >= 1/(1 - cfg.gamma)
    model = zipf(cfg.N, 1.2)
    seg = Segmentation((3, 80, 900, 6000), cfg.N)
    alloc = solve_allocation(cfg, model, seg)
    masses = seg.masses(model.prefix)
    assert np.all(alloc.Lvec[1:]*(1 + cfg.t) <= cfg.K*masses[1:]*(1 + 1E-9))


@settings(max_examples=150, derandomize=True, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(
    inner=st.lists(st.integers(1, 199), min_size=1, max_size=4, unique=True),
    alpha=st.floats(0.2, 2.0),
)
def test_segmenting_never_loses_to_uniform(inner, alpha):
    cfg = IMPROVEMENT_CONFIG
    model = build_popularity(cfg.N, alpha)
    seg = Segmentation([0] + sorted(inner) + [cfg.N], cfg.N)
    U = upper_clamps(cfg, model, seg)
    # the uniform allocation must be feasible on this segmentation
    assume(np.all(U[1:] > cfg.L*(1 + 1E-6)))
    uniform = expected_delay(cfg, model, seg, RedundancyAllocation([1.0] + [cfg.L]*(seg.Q - 1)))
    assert uniform == pytest.approx(uniform_delay(cfg), rel=1E-12)
    assert optimized_delay(cfg, model, seg) < uniform


@settings(max_examples=150, derandomize=True, deadline=None)
@given(
    inner=st.lists(st.integers(1, 199), min_size=1, max_size=5, unique=True),
    alpha=st.floats(0.0, 2.0),
)
def test_kkt_conditions_hold(inner, alpha):
    cfg = IMPROVEMENT_CONFIG
    model = build_popularity(cfg.N, alpha)
    inner = sorted(inner)
    seg = Segmentation(inner + [cfg.N], cfg.N)
    try:
        solution = build_solution(cfg, model, seg)
    except InfeasibleError:
        assert np.any(upper_clamps(cfg, model, seg)[1:] < 1)
        return
    assert solution.expected_delay == pytest.approx(optimized_delay(cfg, model, seg), rel=1E-12)
    for check in certify(cfg, model, solution):
        if check.name != "gain":
            assert check.passed, check
