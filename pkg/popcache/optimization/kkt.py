import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from popcache.constants import BROADCAST, CHI, PHI, PSI, UNIFORM
from popcache.errors import InfeasibleError, InvalidParameterError
from popcache.models import (
    ActiveSetState,
    PopularityModel,
    RedundancyAllocation,
    Segmentation,
    Solution,
    SystemConfig,
    expected_delay,
    uniform_delay,
)

logger = logging.getLogger(__name__)


class WaterFill():
    """
    Result of the water-filling over the coded sub-libraries (0-based,
    broadcast excluded)
    """
    __slots__ = ("levels", "labels", "level", "Phi_S", "Psi_S", "residual")

    def __init__(self, levels, labels, level, Phi_S, Psi_S, residual):
        self.levels = levels
        self.labels = labels
        self.level = level
        self.Phi_S = Phi_S
        self.Psi_S = Psi_S
        self.residual = residual


def water_fill(
        masses: Sequence[float],
        widths: Sequence[float],
        uppers: Sequence[float],
        budget: float
    ) -> WaterFill:
    """
    Minimize sum pi_q/L_q subject to sum L_q w_q <= budget and 1 <= L_q <= U_q

    Interior redundancies share one level: L_q = level*sqrt(pi_q/w_q).
    Each round computes the level for the free sub-libraries, then clamps
    the violators of the side whose total violation is larger (both on a
    tie). Clamping that side moves the level away from the clamped ones,
    so clamped sub-libraries never need releasing and at most one round
    per sub-library is run.

    Parameters:
    - masses: Sequence[float] - popularity mass pi_q per sub-library
    - widths: Sequence[float] - number of files w_q per sub-library
    - uppers: Sequence[float] - upper clamps U_q (inf when unclamped), all >= 1
    - budget: float - memory left for the coded sub-libraries, >= sum w_q

    Returns:
    - fill: WaterFill - redundancies, labels and the active-set totals
    """
    m = len(masses)
    scales = [math.sqrt(pi/w) for pi, w in zip(masses, widths)]
    roots = [math.sqrt(pi*w) for pi, w in zip(masses, widths)]
    levels = [0.0]*m
    labels = [CHI]*m
    free = list(range(m))
    Phi_S = 0.0
    Psi_S = 0.0
    rounds = 0
    while free:
        rounds += 1
        residual = budget - Phi_S - Psi_S
        denom = math.fsum(roots[i] for i in free)
        if denom <= 0:
            # only massless sub-libraries are left
            lower, upper = list(free), []
            deficit, excess = 1.0, 0.0
        else:
            level = residual/denom
            lower = [i for i in free if scales[i]*level < 1]
            upper = [i for i in free if scales[i]*level > uppers[i]]
            if not lower and not upper:
                break
            deficit = math.fsum(widths[i]*(1 - scales[i]*level) for i in lower)
            excess = math.fsum(widths[i]*(scales[i]*level - uppers[i]) for i in upper)

        fixed = set()
        if deficit >= excess:
            for i in lower:
                levels[i] = 1.0
                labels[i] = PHI
                Phi_S += widths[i]
                fixed.add(i)
        if excess >= deficit:
            for i in upper:
                levels[i] = float(uppers[i])
                labels[i] = PSI
                Psi_S += uppers[i]*widths[i]
                fixed.add(i)
        free = [i for i in free if i not in fixed]
        logger.debug("water-fill round %d clamped %d, %d free", rounds, len(fixed), len(free))

    residual = budget - Phi_S - Psi_S
    level = None
    if free:
        level = residual/math.fsum(roots[i] for i in free)
        for i in free:
            levels[i] = scales[i]*level
    return WaterFill(levels, labels, level, Phi_S, Psi_S, residual)


def coded_delay(
        cfg: SystemConfig,
        broadcast_size: int,
        masses: Sequence[float],
        widths: Sequence[float],
        upper_clamp: bool = True
    ) -> Tuple[float, float]:
    """
    Optimized delay of a broadcast block plus coded sub-libraries

    Returns (violation, delay). The violation sums 1 - U_q over the
    sub-libraries whose upper clamp falls below one; those placements are
    infeasible and their delay is inf.
    """
    uppers = _uppers(cfg, masses, upper_clamp)
    violation = math.fsum(max(0.0, 1 - u) for u in uppers)
    if violation > 0:
        return violation, math.inf
    fill = water_fill(masses, widths, uppers, cfg.L*cfg.N - broadcast_size)
    return 0.0, broadcast_size + cfg.delay_scale*_coded_sum(masses, widths, uppers, fill)


def segment_objective(
        cfg: SystemConfig,
        prefix: List[float],
        boundaries: Sequence[int],
        upper_clamp: bool = True
    ) -> Tuple[float, float]:
    """
    (violation, delay) of consecutive boundaries n_1..n_Q under the
    optimal allocation; prefix is the popularity prefix-sum list
    """
    if len(boundaries) == 1:
        return 0.0, uniform_delay(cfg)
    masses = [prefix[boundaries[q]] - prefix[boundaries[q - 1]] for q in range(1, len(boundaries))]
    widths = [boundaries[q] - boundaries[q - 1] for q in range(1, len(boundaries))]
    return coded_delay(cfg, boundaries[0], masses, widths, upper_clamp)


def _uppers(cfg: SystemConfig, masses: Sequence[float], upper_clamp: bool) -> List[float]:
    if not upper_clamp:
        return [math.inf]*len(masses)
    return [min(cfg.K_T, cfg.K*pi/cfg.Lambda) for pi in masses]


def _coded_sum(masses, widths, uppers, fill: WaterFill) -> float:
    # sum_phi pi + sum_psi pi/U + (sum_chi sqrt(pi w))^2/residual
    terms = []
    roots = []
    for i, label in enumerate(fill.labels):
        if label == PHI:
            terms.append(masses[i])
        elif label == PSI:
            terms.append(masses[i]/uppers[i])
        else:
            roots.append(math.sqrt(masses[i]*widths[i]))
    if roots:
        terms.append(math.fsum(roots)**2/fill.residual)
    return math.fsum(terms)


def _coded_blocks(cfg: SystemConfig, model: PopularityModel, seg: Segmentation):
    if model.N != seg.N or cfg.N != seg.N:
        raise InvalidParameterError(f"segmentation over {seg.N} files, model over {model.N}, config N={cfg.N}")
    masses = seg.masses(model.prefix)[1:].tolist()
    widths = seg.widths[1:].tolist()
    return masses, widths


def _check_clamps(uppers: Sequence[float]) -> None:
    for i, u in enumerate(uppers):
        if u < 1:
            raise InfeasibleError(f"upper clamp U_{i + 2}={u} is below 1")


def solve_allocation(
        cfg: SystemConfig,
        model: PopularityModel,
        seg: Segmentation,
        upper_clamp: bool = True
    ) -> RedundancyAllocation:
    """
    KKT-optimal redundancies for a fixed segmentation

    Parameters:
    - cfg: SystemConfig - system parameters
    - model: PopularityModel - file popularity
    - seg: Segmentation - consecutive segmentation
    - upper_clamp: bool - enforce L_q <= U_q

    Returns:
    - allocation: RedundancyAllocation - L_1..L_Q labelled broadcast/phi/psi/chi,
      with the ActiveSetState attached
    """
    if seg.is_unsegmented:
        if model.N != seg.N or cfg.N != seg.N:
            raise InvalidParameterError(f"segmentation over {seg.N} files, model over {model.N}, config N={cfg.N}")
        return RedundancyAllocation([cfg.L], [UNIFORM])

    masses, widths = _coded_blocks(cfg, model, seg)
    uppers = _uppers(cfg, masses, upper_clamp)
    _check_clamps(uppers)
    fill = water_fill(masses, widths, uppers, cfg.L*cfg.N - seg.broadcast_size)
    state = ActiveSetState(
        phi=[i + 2 for i, label in enumerate(fill.labels) if label == PHI],
        psi=[i + 2 for i, label in enumerate(fill.labels) if label == PSI],
        chi=[i + 2 for i, label in enumerate(fill.labels) if label == CHI],
        Phi_S=fill.Phi_S,
        Psi_S=fill.Psi_S,
        residual_budget=fill.residual,
        level=fill.level,
    )
    logger.debug("allocation for %s: %s", seg, state)
    return RedundancyAllocation([1.0] + fill.levels, [BROADCAST] + fill.labels, state)


def optimized_delay(
        cfg: SystemConfig,
        model: PopularityModel,
        seg: Segmentation,
        upper_clamp: bool = True
    ) -> float:
    """
    Closed-form delay at the KKT-optimal allocation

    n_1 + c*(sum_phi pi_q + sum_psi pi_q/U_q + (sum_chi sqrt(pi_q w_q))^2/(L N - n_1 - Phi_S - Psi_S))
    with c = K(1-gamma)/(1+Lambda*gamma). A sub-library clamped at
    U_q = K pi_q/Lambda contributes exactly Lambda(1-gamma)/(1+Lambda*gamma).

    Parameters:
    - cfg: SystemConfig - system parameters
    - model: PopularityModel - file popularity
    - seg: Segmentation - consecutive segmentation
    - upper_clamp: bool - enforce L_q <= U_q

    Returns:
    - delay: float - optimized expected delay
    """
    if seg.is_unsegmented:
        return uniform_delay(cfg)
    masses, widths = _coded_blocks(cfg, model, seg)
    uppers = _uppers(cfg, masses, upper_clamp)
    _check_clamps(uppers)
    fill = water_fill(masses, widths, uppers, cfg.L*cfg.N - seg.broadcast_size)
    return seg.broadcast_size + cfg.delay_scale*_coded_sum(masses, widths, uppers, fill)


def stationarity_values(
        model: PopularityModel,
        seg: Segmentation,
        alloc: RedundancyAllocation
    ) -> np.ndarray:
    """
    pi_q/(L_q^2 w_q) on the interior sub-libraries; the KKT conditions
    make these all equal
    """
    if seg.is_unsegmented:
        return np.array([])
    masses = seg.masses(model.prefix)
    chi = [q for q, label in enumerate(alloc.labels) if label == CHI]
    return np.array([masses[q]/(alloc.Lvec[q]**2*seg.widths[q]) for q in chi])


def build_solution(
        cfg: SystemConfig,
        model: PopularityModel,
        seg: Segmentation,
        upper_clamp: bool = True,
        trace=None
    ) -> Solution:
    """
    Solve the allocation of a segmentation and wrap it with its delays
    """
    alloc = solve_allocation(cfg, model, seg, upper_clamp)
    uniform = uniform_delay(cfg)
    if seg.is_unsegmented:
        delay = uniform
    else:
        delay = expected_delay(cfg, model, seg, alloc, upper_clamp=upper_clamp)
    return Solution(seg, alloc, delay, uniform, alloc.active_set, trace)
