import itertools
import logging
import math
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from popcache.constants import (
    DOMINANCE_TOLERANCE,
    GENERAL_ENUMERATION_MAX_N,
    ORACLE_MAX_N,
)
from popcache.errors import InfeasibleError, InvalidParameterError, InvalidSegmentationError, OracleScaleError
from popcache.models import PopularityModel, Segmentation, Solution, SystemConfig
from popcache.optimization.kkt import build_solution, coded_delay, segment_objective, water_fill

logger = logging.getLogger(__name__)


class GeneralSegmentation():
    """
    Arbitrary (not necessarily consecutive) assignment of files to Q
    sub-libraries; label 1 is the broadcast sub-library.
    """
    def __init__(self, labels: Sequence[int], Q: int):
        labels = np.asarray(labels, dtype=int)
        if labels.ndim != 1 or labels.size == 0:
            raise InvalidSegmentationError("a general segmentation needs one label per file")
        if Q < 1 or labels.min() < 1 or labels.max() > Q:
            raise InvalidSegmentationError(f"labels must lie in 1..{Q}")
        self.__labels = labels
        self.__Q = Q

    @property
    def labels(self) -> np.ndarray:
        """
        Get the sub-library label of every file (1-based)
        """
        return self.__labels

    @property
    def Q(self) -> int:
        return self.__Q

    @property
    def N(self) -> int:
        return self.__labels.size

    @property
    def broadcast_size(self) -> int:
        return int(np.count_nonzero(self.__labels == 1))

    def blocks(self, p: np.ndarray) -> Tuple[list, list]:
        """
        Masses and sizes of the non-empty coded sub-libraries
        """
        masses, widths = [], []
        for q in range(2, self.Q + 1):
            members = self.__labels == q
            size = int(np.count_nonzero(members))
            if size:
                masses.append(math.fsum(p[members]))
                widths.append(size)
        return masses, widths

    def is_consecutive(self) -> bool:
        return bool(np.all(np.diff(self.__labels) >= 0))

    def __repr__(self) -> str:
        return f"GeneralSegmentation({self.__labels.tolist()}, Q={self.Q})"


def consecutive_count(N: int, Q: int, allow_empty_broadcast: bool = True) -> int:
    """
    Number of consecutive segmentations of N files into Q sub-libraries
    """
    if Q == 1:
        return 1
    count = math.comb(N - 1, Q - 1)
    if allow_empty_broadcast:
        count += math.comb(N - 1, Q - 2)
    return count


def enumerate_consecutive(N: int, Q: int, allow_empty_broadcast: bool = True) -> Iterator[Segmentation]:
    """
    Every consecutive segmentation of N files into Q sub-libraries, in
    lexicographic order of the boundaries

    Parameters:
    - N: int - library size
    - Q: int - number of sub-libraries
    - allow_empty_broadcast: bool - include segmentations with n_1 = 0

    Returns:
    - segmentations: Iterator[Segmentation]
    """
    if N < 1 or not 1 <= Q <= N:
        raise InvalidParameterError(f"need 1 <= Q <= N, got N={N}, Q={Q}")
    if Q == 1:
        yield Segmentation((N,), N)
        return
    if allow_empty_broadcast:
        for inner in itertools.combinations(range(1, N), Q - 2):
            yield Segmentation((0,) + inner + (N,), N)
    for inner in itertools.combinations(range(1, N), Q - 1):
        yield Segmentation(inner + (N,), N)


def enumerate_general(N: int, Q: int) -> Iterator[GeneralSegmentation]:
    """
    All Q^N label vectors
    """
    if N > GENERAL_ENUMERATION_MAX_N:
        raise OracleScaleError(f"Q^N enumeration is limited to N <= {GENERAL_ENUMERATION_MAX_N}, got N={N}")
    for labels in itertools.product(range(1, Q + 1), repeat=N):
        yield GeneralSegmentation(labels, Q)


def general_delay(
        cfg: SystemConfig,
        model: PopularityModel,
        seg: GeneralSegmentation,
        upper_clamp: bool = True
    ) -> float:
    """
    Optimized delay of an arbitrary segmentation; inf when an upper clamp
    falls below one. Empty coded sub-libraries are dropped.
    """
    if seg.N != model.N:
        raise InvalidParameterError(f"segmentation over {seg.N} files, model over {model.N}")
    masses, widths = seg.blocks(model.p)
    if not masses:
        return float(seg.broadcast_size)
    violation, delay = coded_delay(cfg, seg.broadcast_size, masses, widths, upper_clamp)
    return delay


def brute_optimal(
        cfg: SystemConfig,
        model: PopularityModel,
        Q: int,
        upper_clamp: bool = True
    ) -> Tuple[Solution, int]:
    """
    Exhaustive search over every consecutive segmentation with Q
    sub-libraries

    Parameters:
    - cfg: SystemConfig - system parameters, N <= ORACLE_MAX_N
    - model: PopularityModel - file popularity
    - Q: int - number of sub-libraries
    - upper_clamp: bool - enforce L_q <= U_q

    Returns:
    - solution: Solution - optimal segmentation (first in lexicographic order on ties)
    - checked: int - number of segmentations enumerated
    """
    if cfg.N > ORACLE_MAX_N:
        raise OracleScaleError(f"exhaustive search is limited to N <= {ORACLE_MAX_N}, got N={cfg.N}")
    best, best_delay, checked = None, math.inf, 0
    prefix = model.prefix_list
    for seg in enumerate_consecutive(cfg.N, Q):
        checked += 1
        violation, delay = segment_objective(cfg, prefix, seg.boundaries, upper_clamp)
        if violation == 0 and delay < best_delay:
            best, best_delay = seg, delay
    if best is None:
        raise InfeasibleError(f"no consecutive segmentation with Q={Q} is feasible")
    return build_solution(cfg, model, best, upper_clamp), checked


def swap_delay_change(cfg: SystemConfig, p_a: float, p_b: float, L_a: float, L_b: float) -> float:
    """
    Delay saved by moving the more popular file a (at redundancy L_a) into
    the slot of the less popular file b (at redundancy L_b > L_a) and back

    c*(p_a - p_b)(L_b - L_a)/(L_a L_b), non-negative when p_a >= p_b and L_b >= L_a.
    A broadcast slot has L_b = inf and the change is c*(p_a - p_b)/L_a.
    """
    if math.isinf(L_b):
        return cfg.delay_scale*(p_a - p_b)/L_a
    return cfg.delay_scale*(p_a - p_b)*(L_b - L_a)/(L_a*L_b)


class DominanceReport():
    """
    Outcome of comparing the best consecutive segmentation with general ones
    """
    def __init__(self, seed: Optional[int]):
        self.seed = seed
        self.checked = 0
        self.skipped = 0
        self.violations = 0
        self.worst_gap = -math.inf
        self.swaps_checked = 0
        self.swap_violations = 0

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.swap_violations == 0

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "checked": self.checked,
            "skipped": self.skipped,
            "violations": self.violations,
            "worst_gap": self.worst_gap,
            "swaps_checked": self.swaps_checked,
            "swap_violations": self.swap_violations,
        }


def _fixed_allocation_delay(cfg: SystemConfig, p: np.ndarray, broadcast: int, levels: np.ndarray) -> float:
    return broadcast + cfg.delay_scale*math.fsum(p/levels)


def _check_swap(cfg: SystemConfig, model: PopularityModel, seg: GeneralSegmentation,
                rng: np.random.Generator, report: DominanceReport, upper_clamp: bool) -> None:
    masses, widths = seg.blocks(model.p)
    # broadcast files count as one more redundancy class, at L = inf
    if not masses or len(masses) + (seg.broadcast_size > 0) < 2:
        return
    uppers = [min(cfg.K_T, cfg.K*pi/cfg.Lambda) if upper_clamp else math.inf for pi in masses]
    fill = water_fill(masses, widths, uppers, cfg.L*cfg.N - seg.broadcast_size)
    coded = [q for q in range(2, seg.Q + 1) if np.any(seg.labels == q)]
    level_of = dict(zip(coded, fill.levels))
    level_of[1] = math.inf
    levels = np.array([level_of[label] for label in seg.labels], dtype=float)

    a, b = rng.choice(seg.N, size=2, replace=False)
    if model.p[a] < model.p[b]:
        a, b = b, a
    # only a popular file sitting on the smaller redundancy gains from the swap
    if not levels[a] < levels[b]:
        return
    p = model.p
    swapped = levels.copy()
    swapped[a], swapped[b] = levels[b], levels[a]
    before = _fixed_allocation_delay(cfg, p, seg.broadcast_size, levels)
    saved = before - _fixed_allocation_delay(cfg, p, seg.broadcast_size, swapped)
    predicted = swap_delay_change(cfg, p[a], p[b], levels[a], levels[b])
    report.swaps_checked += 1
    if saved < -DOMINANCE_TOLERANCE*before or abs(saved - predicted) > DOMINANCE_TOLERANCE*before:
        report.swap_violations += 1


def verify_consecutive_dominance(
        cfg: SystemConfig,
        model: PopularityModel,
        Q: int,
        trials: Optional[int] = None,
        seed: Optional[int] = 0,
        upper_clamp: bool = False
    ) -> DominanceReport:
    """
    Check that no general segmentation beats the best consecutive one

    A labeling into 1..Q may leave sub-libraries empty, so it is compared
    with the best consecutive segmentation over every Q' <= Q. Every Q^N
    labeling is tried when trials is None (N <= 12); otherwise `trials`
    labelings are drawn uniformly with the given seed. Each labeling also
    gets one random popularity-ordered swap checked against its
    closed-form delay change. The exchange argument holds for the
    redundancy range [1, inf), hence upper_clamp defaults to False.

    Returns:
    - report: DominanceReport - counts, worst gap (consecutive minus general) and swap checks
    """
    best_delay = math.inf
    for Q_prime in range(1, min(Q, cfg.N) + 1):
        try:
            solution, _ = brute_optimal(cfg, model, Q_prime, upper_clamp)
        except InfeasibleError:
            continue
        delay = segment_objective(cfg, model.prefix_list, solution.segmentation.boundaries, upper_clamp)[1]
        best_delay = min(best_delay, delay)

    rng = np.random.default_rng(seed)
    report = DominanceReport(seed)
    if trials is None:
        candidates = enumerate_general(cfg.N, Q)
    else:
        candidates = (GeneralSegmentation(rng.integers(1, Q + 1, size=cfg.N), Q) for _ in range(trials))

    for seg in candidates:
        delay = general_delay(cfg, model, seg, upper_clamp)
        if not math.isfinite(delay):
            report.skipped += 1
            continue
        report.checked += 1
        gap = best_delay - delay
        report.worst_gap = max(report.worst_gap, gap)
        if gap > DOMINANCE_TOLERANCE*delay:
            report.violations += 1
            logger.warning("general segmentation %s beats the consecutive optimum by %g", seg, gap)
        _check_swap(cfg, model, seg, rng, report, upper_clamp)

    logger.info("dominance check: %s", report.to_dict())
    return report


__all__ = [
    "DominanceReport",
    "GeneralSegmentation",
    "brute_optimal",
    "consecutive_count",
    "enumerate_consecutive",
    "enumerate_general",
    "general_delay",
    "swap_delay_change",
    "verify_consecutive_dominance",
]
