import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from popcache.constants import CHI
from popcache.errors import CapacityError, ConstraintViolationError, InfeasibleError
from popcache.models import RedundancyAllocation, Segmentation, SystemConfig, build_popularity
from popcache.optimization import solve_allocation
from popcache.placement import pieces_per_file, place_receivers, place_transmitters

# K_T = 5, gamma_T = 0.4: L = 2 and 24 files per transmitter
SMALL = SystemConfig(N=60, K=2000, K_T=5, gamma=0.1, gamma_T=0.4, F=100000)


def _check_coverage(placement, seg, alloc, files):
    for file in files:
        q = int(seg.sublibrary_of(np.array([file]))[0])
        Lq = float(alloc.Lvec[q - 1])
        floor = math.floor(Lq + 1E-9)
        frac = Lq - floor
        width = placement.piece_width
        covered = 0.0
        for start, end, holders in placement.coverage(file):
            assert len(holders) == len(set(holders))
            # the first frac of every piece has one extra copy
            expected = floor + 1 if math.fmod((end + start)/2, width) < frac*width else floor
            assert len(holders) == expected, (file, start, end, holders, Lq)
            covered += end - start
        assert covered == pytest.approx(1.0)
        assert math.fsum(piece.fraction for _, piece in placement.holders(file)) == pytest.approx(Lq)


def test_toy_cyclic_placement():
    cfg = SystemConfig(N=6, K=12, K_T=3, gamma=0.5, gamma_T=0.5, F=2, Lambda=2)
    seg = Segmentation([3, 6], 6)
    alloc = RedundancyAllocation([1, 2])
    placement = place_transmitters(cfg, seg, alloc)
    assert [placement.files_at(tx) for tx in range(3)] == [{1, 4, 5}, {2, 4, 6}, {3, 5, 6}]
    assert placement.loads.tolist() == [3, 3, 3]
    assert placement.cursor_trace == (0.0, 0.0)
    assert all(piece.fraction == 1.0 for pieces in placement.per_tx for piece in pieces)
    assert placement.redundancy_of(4) == 2


def test_integer_redundancy_whole_files():
    cfg = SystemConfig(N=6, K=12, K_T=3, gamma=0.5, gamma_T=0.5, F=2, Lambda=2)
    placement = place_transmitters(cfg, Segmentation([0, 3, 6], 6), RedundancyAllocation([1, 2, 1]))
    for file in range(1, 7):
        holders = placement.holders(file)
        assert len(holders) == (2 if file <= 3 else 1)
        assert all(piece.fraction == 1.0 and piece.offset == 0.0 for _, piece in holders)


def test_fractional_redundancy_split():
    cfg = SystemConfig(N=6, K=12, K_T=3, gamma=0.5, gamma_T=0.5, F=2, Lambda=2)
    seg = Segmentation([6], 6)
    alloc = RedundancyAllocation([1.5])
    placement = place_transmitters(cfg, seg, alloc)
    _check_coverage(placement, seg, alloc, range(1, 7))
    assert placement.loads == pytest.approx([3, 3, 3])


def test_reference_placement(scenario1, zipf):
    cfg = scenario1(2000)
    model = zipf(cfg.N, 1.0)
    seg = Segmentation((0, 157, 1278, 6000), cfg.N)
    alloc = solve_allocation(cfg, model, seg)
    placement = place_transmitters(cfg, seg, alloc)
    _check_coverage(placement, seg, alloc, range(1, cfg.N + 1, 7))
    # the budget is tight, so every transmitter is full
    assert placement.loads == pytest.approx(np.full(cfg.K_T, cfg.transmitter_capacity), rel=1E-6)


@settings(max_examples=100, derandomize=True, deadline=None)
@given(
    inner=st.lists(st.integers(1, 59), min_size=1, max_size=4, unique=True),
    alpha=st.floats(0.0, 1.5),
)
def test_random_placements_respect_capacity(inner, alpha):
    model = build_popularity(SMALL.N, alpha)
    seg = Segmentation(sorted(inner) + [SMALL.N], SMALL.N)
    try:
        alloc = solve_allocation(SMALL, model, seg)
    except InfeasibleError:
        return
    placement = place_transmitters(SMALL, seg, alloc)
    assert np.all(placement.loads <= SMALL.transmitter_capacity*(1 + 1E-9))
    if CHI in alloc.labels:
        assert placement.loads == pytest.approx(np.full(SMALL.K_T, SMALL.transmitter_capacity), rel=1E-9)
    _check_coverage(placement, seg, alloc, range(1, SMALL.N + 1))


# gamma_T*N = 3.5: every transmitter holds three and a half files
HALVES = SystemConfig(N=7, K=40, K_T=4, gamma=0.25, gamma_T=0.5, F=10)


def test_fractional_capacity_is_filled_exactly():
    seg = Segmentation([7], 7)
    alloc = RedundancyAllocation([2.0])
    placement = place_transmitters(HALVES, seg, alloc)
    assert pieces_per_file(HALVES) == 2
    assert placement.piece_width == 0.5
    assert placement.loads == pytest.approx([3.5]*4)
    _check_coverage(placement, seg, alloc, range(1, 8))


def test_fractional_capacity_segmented():
    seg = Segmentation([2, 7], 7)
    alloc = RedundancyAllocation([1.0, 2.4])
    placement = place_transmitters(HALVES, seg, alloc)
    assert placement.loads == pytest.approx([3.5]*4)
    _check_coverage(placement, seg, alloc, range(1, 8))


def test_pieces_per_file():
    assert pieces_per_file(SMALL) == 1
    assert pieces_per_file(SystemConfig(N=7, K=40, K_T=4, gamma=0.25, gamma_T=0.3, F=10)) == 10
    assert pieces_per_file(SystemConfig(N=6000, K=300, K_T=50, gamma=0.1, gamma_T=0.1, F=100000)) == 1


@settings(max_examples=60, derandomize=True, deadline=None)
@given(
    N=st.integers(5, 40),
    K_T=st.integers(4, 6),
    gamma_T=st.sampled_from([0.3, 0.35, 0.45, 0.5, 0.55, 0.7]),
    cut=st.integers(1, 4),
    alpha=st.floats(0.0, 1.5),
)
def test_fractional_capacity_placements(N, K_T, gamma_T, cut, alpha):
    cfg = SystemConfig(N=N, K=2000, K_T=K_T, gamma=0.1, gamma_T=gamma_T, F=100000)
    capacity = cfg.transmitter_capacity
    uniform = place_transmitters(cfg, Segmentation([N], N), RedundancyAllocation([cfg.L]))
    assert uniform.loads == pytest.approx(np.full(K_T, capacity), rel=1E-7)

    seg = Segmentation([min(cut, N - 1), N], N)
    try:
        alloc = solve_allocation(cfg, build_popularity(N, alpha), seg)
    except InfeasibleError:
        return
    placement = place_transmitters(cfg, seg, alloc)
    assert np.all(placement.loads <= capacity*(1 + 1E-7))
    _check_coverage(placement, seg, alloc, range(1, N + 1))


def test_capacity_errors():
    cfg = SystemConfig(N=6, K=12, K_T=3, gamma=0.5, gamma_T=0.5, F=2, Lambda=2)
    seg = Segmentation([3, 6], 6)
    with pytest.raises(CapacityError):
        place_transmitters(cfg, seg, RedundancyAllocation([1, 4]))
    with pytest.raises(CapacityError):
        place_transmitters(cfg, seg, RedundancyAllocation([1, 3]))
    with pytest.raises(ConstraintViolationError):
        place_transmitters(cfg, seg, RedundancyAllocation([1, 0.5]))
    with pytest.raises(ConstraintViolationError):
        place_transmitters(cfg, seg, RedundancyAllocation([1, 2, 2]))


def test_receiver_placement_scenario_1(scenario1):
    placement = place_receivers(scenario1(300))
    assert placement.num_subfiles == math.comb(40, 4) == 91390
    assert all(contents.size == math.comb(39, 3) == 9139 for contents in placement.cache_contents)
    assert placement.subfiles.shape == (91390, 4)


def test_receiver_placement_structure():
    cfg = SystemConfig(N=10, K=50, K_T=4, gamma=0.2, gamma_T=0.5, F=100, Lambda=10)
    placement = place_receivers(cfg)
    assert placement.num_subfiles == math.comb(10, 2)
    assert np.all(np.diff(placement.subfiles, axis=1) > 0)
    for cache, contents in enumerate(placement.cache_contents, start=1):
        assert np.all(np.any(placement.subfiles[contents] == cache, axis=1))
        assert contents.size == math.comb(9, 1)
    assert placement.users_of(1).tolist() == [1, 11, 21, 31, 41]
    assert np.bincount(placement.user_to_cache)[1:].tolist() == [5]*10
    manifest = placement.to_dict()
    assert manifest["num_subfiles"] == 45
    assert manifest["caches"][0]["users"] == [1, 11, 21, 31, 41]
