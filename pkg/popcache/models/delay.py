import math
from typing import NamedTuple

import numpy as np

from popcache.constants import BUDGET_TOLERANCE, CLAMP_TOLERANCE
from popcache.errors import ConstraintViolationError, InvalidParameterError
from popcache.models.memory_sharing import MemorySharingSplit, memory_sharing_split
from popcache.models.popularity import PopularityModel
from popcache.models.segmentation import RedundancyAllocation, Segmentation
from popcache.models.system_config import SystemConfig


class DelayBound(NamedTuple):
    """
    Lower bound on the expected delay over every segmentation and the
    matching upper bound on the gain
    """
    lower_bound_delay: float
    gmax: float


def uniform_delay(cfg: SystemConfig) -> float:
    """
    Delay of the unsegmented library cached at redundancy L

    K(1-gamma)/(L(1+Lambda*gamma))
    """
    return cfg.delay_scale/cfg.L


def upper_clamps(cfg: SystemConfig, model: PopularityModel, seg: Segmentation) -> np.ndarray:
    """
    Upper redundancy clamps U_q = min(K_T, K*pi_q/Lambda)

    The clamp keeps the multiplicative DoF L_q(1+Lambda*gamma) below the
    expected number of requests K*pi_q. Entry 1 is the broadcast
    redundancy 1 when Q >= 2.

    Parameters:
    - cfg: SystemConfig - system parameters
    - model: PopularityModel - file popularity
    - seg: Segmentation - consecutive segmentation

    Returns:
    - U: np.ndarray - U_1..U_Q
    """
    masses = seg.masses(model.prefix)
    U = np.minimum(cfg.K_T, cfg.K*masses/cfg.Lambda)
    if not seg.is_unsegmented:
        U[0] = 1.0
    return U


def check_feasibility(
        cfg: SystemConfig,
        model: PopularityModel,
        seg: Segmentation,
        alloc: RedundancyAllocation,
        upper_clamp: bool = True
    ) -> None:
    """
    Raise ConstraintViolationError when the allocation breaks a placement
    constraint: dimension, broadcast redundancy, 1 <= L_q <= U_q or the
    memory budget n_1 + sum L_q w_q <= L*N.
    """
    if model.N != seg.N or cfg.N != seg.N:
        raise ConstraintViolationError("dimension", f"segmentation over {seg.N} files, model over {model.N}, config N={cfg.N}")
    if alloc.Q != seg.Q:
        raise ConstraintViolationError("dimension", f"{alloc.Q} redundancies for {seg.Q} sub-libraries")
    Lvec = alloc.Lvec
    if not np.all(np.isfinite(Lvec)):
        raise ConstraintViolationError("lower-bound", "redundancies must be finite")
    if seg.is_unsegmented:
        if Lvec[0] < 1 - CLAMP_TOLERANCE:
            raise ConstraintViolationError("lower-bound", f"L_1={Lvec[0]} < 1")
    else:
        if abs(Lvec[0] - 1) > CLAMP_TOLERANCE:
            raise ConstraintViolationError("broadcast-redundancy", f"L_1 must be 1, got {Lvec[0]}")
        low = np.nonzero(Lvec[1:] < 1 - CLAMP_TOLERANCE)[0]
        if low.size:
            q = low[0] + 2
            raise ConstraintViolationError("lower-bound", f"L_{q}={Lvec[q - 1]} < 1")
        if upper_clamp:
            U = upper_clamps(cfg, model, seg)
            high = np.nonzero(Lvec[1:] > U[1:]*(1 + CLAMP_TOLERANCE))[0]
            if high.size:
                q = high[0] + 2
                raise ConstraintViolationError("upper-bound", f"L_{q}={Lvec[q - 1]} > U_{q}={U[q - 1]}")
    used = math.fsum(Lvec*seg.widths)
    if used > cfg.L*cfg.N*(1 + BUDGET_TOLERANCE):
        raise ConstraintViolationError("budget", f"cached {used} files exceeds L*N={cfg.L*cfg.N}")


def expected_delay(
        cfg: SystemConfig,
        model: PopularityModel,
        seg: Segmentation,
        alloc: RedundancyAllocation,
        check: bool = True,
        upper_clamp: bool = True
    ) -> float:
    """
    Expected delivery delay of a segmented placement

    n_1 + sum_{q>=2} K pi_q (1-gamma)/(L_q (1+Lambda*gamma)); the
    unsegmented library has no broadcast term. While L_q <= U_q holds the
    demand is large enough that the min with K pi_q never binds.

    Parameters:
    - cfg: SystemConfig - system parameters
    - model: PopularityModel - file popularity
    - seg: Segmentation - consecutive segmentation
    - alloc: RedundancyAllocation - redundancies L_1..L_Q
    - check: bool - validate the placement constraints first
    - upper_clamp: bool - include L_q <= U_q in the validation

    Returns:
    - delay: float - expected delay in file units
    """
    if check:
        check_feasibility(cfg, model, seg, alloc, upper_clamp)
    masses = seg.masses(model.prefix)
    if seg.is_unsegmented:
        return cfg.delay_scale*masses[0]/alloc.Lvec[0]
    coded = math.fsum(masses[1:]/alloc.Lvec[1:])
    return seg.broadcast_size + cfg.delay_scale*coded


def delay_bound(cfg: SystemConfig, model: PopularityModel) -> DelayBound:
    """
    Bound on the delay of any segmentation

    Relaxing the clamps and letting every file be its own sub-library,
    the optimum is K(1-gamma)/(L N (1+Lambda*gamma)) (sum q^(-alpha/2))^2/sum q^(-alpha),
    and the gain over the uniform delay is at most
    N sum q^(-alpha)/(sum q^(-alpha/2))^2.

    Returns:
    - bound: DelayBound - (lower_bound_delay, gmax)
    """
    ranks = np.arange(1, model.N + 1, dtype=float)
    full = math.fsum(ranks**(-model.alpha))
    half = math.fsum(ranks**(-model.alpha/2))
    gmax = model.N*full/half**2
    return DelayBound(uniform_delay(cfg)/gmax, gmax)


def broadcast_delay_bound(cfg: SystemConfig, model: PopularityModel, broadcast_size: int = 0) -> float:
    """
    Relaxed bound on the delay of any solution broadcasting the first
    broadcast_size files

    Every coded file gets its own unconstrained redundancy:
    n_1 + K(1-gamma)/(1+Lambda*gamma) (sum_{n>n_1} sqrt(p_n))^2/(L N - n_1).
    Equal to the lower bound of delay_bound when n_1 = 0.
    """
    if not 0 <= broadcast_size < model.N:
        raise InvalidParameterError(f"broadcast size must lie in [0, N), got {broadcast_size}")
    roots = math.fsum(np.sqrt(model.p[broadcast_size:]))
    return broadcast_size + cfg.delay_scale*roots**2/(cfg.L*cfg.N - broadcast_size)


def effective_dof(Lq: float, cfg: SystemConfig, memory_sharing: bool = True) -> float:
    """
    Delivery rate of a coded sub-library cached at redundancy Lq

    With memory sharing the two integer parts are delivered one after the
    other, so the rate is the harmonic mix
    1/(p/(ceil*(1+t)) + (1-p)/(floor*(1+t))); without it the relaxed rate
    Lq(1+t) is returned.
    """
    if not memory_sharing:
        if Lq < 1 - CLAMP_TOLERANCE:
            raise InvalidParameterError(f"redundancy must be at least 1, got {Lq}")
        return Lq*(1 + cfg.t)
    split = memory_sharing_split(Lq)
    inverse = (1 - split.p)/(split.floor*(1 + cfg.t))
    if split.p > 0:
        inverse += split.p/(split.ceil*(1 + cfg.t))
    return 1/inverse


__all__ = [
    "DelayBound",
    "MemorySharingSplit",
    "broadcast_delay_bound",
    "check_feasibility",
    "delay_bound",
    "effective_dof",
    "expected_delay",
    "memory_sharing_split",
    "uniform_delay",
    "upper_clamps",
]
