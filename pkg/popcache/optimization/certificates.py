import math
from typing import List, NamedTuple

from popcache.constants import (
    BUDGET_TOLERANCE,
    CHI,
    CLAMP_TOLERANCE,
    PHI,
    PSI,
    STATIONARITY_TOLERANCE,
)
from popcache.errors import ConstraintViolationError
from popcache.models import (
    PopularityModel,
    RedundancyAllocation,
    Segmentation,
    Solution,
    SystemConfig,
    broadcast_delay_bound,
    delay_bound,
    expected_delay,
    upper_clamps,
)
from popcache.optimization.kkt import stationarity_values


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def budget_gap(cfg: SystemConfig, seg: Segmentation, alloc: RedundancyAllocation) -> float:
    """
    L*N minus the memory used, n_1 + sum L_q w_q
    """
    return cfg.L*cfg.N - math.fsum(alloc.Lvec*seg.widths)


def stationarity_spread(model: PopularityModel, seg: Segmentation, alloc: RedundancyAllocation) -> float:
    """
    Relative spread (max - min)/max of pi_q/(L_q^2 w_q) over the interior sub-libraries
    """
    values = stationarity_values(model, seg, alloc)
    if values.size < 2:
        return 0.0
    return float((values.max() - values.min())/values.max())


def complementarity_violations(
        cfg: SystemConfig,
        model: PopularityModel,
        seg: Segmentation,
        alloc: RedundancyAllocation
    ) -> List[int]:
    """
    Sub-libraries (1-based) whose clamp label disagrees with the common
    interior level: a phi member that would rise above 1, a psi member
    that would fall below U_q, or an interior value outside [1, U_q]
    """
    if seg.is_unsegmented:
        return []
    masses = seg.masses(model.prefix)
    widths = seg.widths
    U = upper_clamps(cfg, model, seg)
    chi = [q for q, label in enumerate(alloc.labels) if label == CHI]
    if not chi:
        return []
    q0 = chi[0]
    level = alloc.Lvec[q0]/math.sqrt(masses[q0]/widths[q0])
    broken = []
    for q, label in enumerate(alloc.labels[1:], start=1):
        ideal = level*math.sqrt(masses[q]/widths[q])
        if label == PHI and ideal > 1 + CLAMP_TOLERANCE:
            broken.append(q + 1)
        elif label == PSI and ideal < U[q]*(1 - CLAMP_TOLERANCE):
            broken.append(q + 1)
        elif label == CHI and not 1 - CLAMP_TOLERANCE <= alloc.Lvec[q] <= U[q]*(1 + CLAMP_TOLERANCE):
            broken.append(q + 1)
    return broken


def certify(cfg: SystemConfig, model: PopularityModel, solution: Solution, upper_clamp: bool = True) -> List[CheckResult]:
    """
    Optimality and consistency certificates of a solution

    Returns one CheckResult per certificate: feasibility, budget identity
    (tight whenever an interior sub-library exists), stationarity on the
    interior set, clamp complementarity, the relaxed bound at the
    solution's own broadcast size, and gain >= 1.
    """
    seg, alloc = solution.segmentation, solution.allocation
    results = []

    try:
        delay = expected_delay(cfg, model, seg, alloc, upper_clamp=upper_clamp)
        results.append(CheckResult("feasibility", True, "all placement constraints hold"))
    except ConstraintViolationError as error:
        delay = expected_delay(cfg, model, seg, alloc, check=False)
        results.append(CheckResult("feasibility", False, str(error)))

    gap = budget_gap(cfg, seg, alloc)
    interior = CHI in alloc.labels and not seg.is_unsegmented
    tight = abs(gap) <= BUDGET_TOLERANCE*cfg.L*cfg.N
    results.append(CheckResult(
        "budget",
        tight if interior or seg.is_unsegmented else gap >= -BUDGET_TOLERANCE*cfg.L*cfg.N,
        f"L*N - used = {gap:.3e}",
    ))

    spread = stationarity_spread(model, seg, alloc)
    results.append(CheckResult("stationarity", spread <= STATIONARITY_TOLERANCE, f"relative spread {spread:.3e}"))

    broken = complementarity_violations(cfg, model, seg, alloc) if upper_clamp else []
    results.append(CheckResult("complementarity", not broken, f"mislabelled sub-libraries {broken}"))

    bound = delay_bound(cfg, model)
    relaxed = broadcast_delay_bound(cfg, model, seg.broadcast_size)
    results.append(CheckResult(
        "bound",
        delay >= relaxed*(1 - BUDGET_TOLERANCE),
        f"delay {delay:.6f} vs relaxed bound {relaxed:.6f} at n_1={seg.broadcast_size}",
    ))

    gain = solution.uniform_delay/delay
    results.append(CheckResult("gain", gain >= 1 - BUDGET_TOLERANCE, f"gain {gain:.6f}, gmax {bound.gmax:.6f}"))
    return results
