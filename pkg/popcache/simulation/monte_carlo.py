import logging
from typing import Optional, Union

import numpy as np
from numpy.random import SeedSequence

from popcache.errors import InvalidParameterError
from popcache.models import (
    PopularityModel,
    RedundancyAllocation,
    Segmentation,
    Solution,
    SystemConfig,
    effective_dof,
)

logger = logging.getLogger(__name__)

SeedLike = Union[int, SeedSequence, np.random.Generator, list, tuple]


class DemandSample():
    """
    One demand realization: the file each user requests and the request
    counts it induces on a segmentation
    """
    def __init__(self, requests: np.ndarray, per_q_count: np.ndarray, distinct_b1: int):
        self.requests = requests
        self.per_q_count = per_q_count
        self.distinct_b1 = distinct_b1

    def __repr__(self) -> str:
        return f"DemandSample(per_q_count={self.per_q_count.tolist()}, distinct_b1={self.distinct_b1})"


class SimulationReport():
    """
    Monte Carlo statistics of the realized delay and the sum-DoF
    """
    def __init__(self, delays: np.ndarray, dofs: np.ndarray, seed: int, strict_b1: bool):
        self.delays = delays
        self.dofs = dofs
        self.seed = seed
        self.strict_b1 = strict_b1

    @property
    def trials(self) -> int:
        return self.delays.size

    @property
    def std_defined(self) -> bool:
        """
        Get whether a sample standard deviation exists (more than one trial)
        """
        return self.trials > 1

    @property
    def delay_mean(self) -> float:
        return float(np.mean(self.delays))

    @property
    def delay_std(self) -> float:
        return float(np.std(self.delays, ddof=1)) if self.std_defined else 0.0

    @property
    def dof_mean(self) -> float:
        return float(np.mean(self.dofs))

    @property
    def dof_std(self) -> float:
        return float(np.std(self.dofs, ddof=1)) if self.std_defined else 0.0

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "strict_b1": self.strict_b1,
            "delay_mean": self.delay_mean,
            "delay_std": self.delay_std,
            "dof_mean": self.dof_mean,
            "dof_std": self.dof_std,
            "std_defined": self.std_defined,
        }


def sample_demand(
        model: PopularityModel,
        K: int,
        rng_seed: SeedLike,
        segmentation: Optional[Segmentation] = None
    ) -> DemandSample:
    """
    Draw K independent requests from the popularity distribution

    Parameters:
    - model: PopularityModel - file popularity
    - K: int - number of users
    - rng_seed: SeedLike - seed, seed sequence or generator
    - segmentation: Segmentation - counts are reported per sub-library of
      this segmentation (the unsegmented library when omitted)

    Returns:
    - sample: DemandSample - requests (1-based files), per-sub-library counts, distinct broadcast files requested
    """
    if K < 1:
        raise InvalidParameterError(f"K must be positive, got {K}")
    if segmentation is None:
        segmentation = Segmentation((model.N,), model.N)
    rng = np.random.default_rng(rng_seed)
    requests = rng.choice(model.N, size=K, p=model.p) + 1
    per_q_count = np.bincount(segmentation.sublibrary_of(requests) - 1, minlength=segmentation.Q)
    n1 = segmentation.broadcast_size
    distinct_b1 = int(np.unique(requests[requests <= n1]).size)
    return DemandSample(requests, per_q_count, distinct_b1)


def realized_delay(
        cfg: SystemConfig,
        seg: Segmentation,
        alloc: RedundancyAllocation,
        sample: DemandSample,
        strict_b1: bool = False,
        memory_sharing: bool = True
    ) -> float:
    """
    Delivery delay of one demand realization

    D_1 + sum_q K_q (1-gamma)/min(R_q, K_q), where R_q is the effective
    DoF of sub-library q. D_1 counts the distinct broadcast files requested,
    or the whole broadcast sub-library whenever any of it is requested
    when strict_b1 is set.

    Parameters:
    - cfg: SystemConfig - system parameters
    - seg: Segmentation - consecutive segmentation
    - alloc: RedundancyAllocation - redundancies L_1..L_Q
    - sample: DemandSample - demand realization on seg
    - strict_b1: bool - charge the full broadcast sub-library
    - memory_sharing: bool - use the memory-sharing rate instead of L_q(1+t)

    Returns:
    - delay: float - realized delay in file units
    """
    counts = sample.per_q_count
    if counts.size != seg.Q or alloc.Q != seg.Q:
        raise InvalidParameterError(f"sample has {counts.size} counts, allocation {alloc.Q}, segmentation {seg.Q}")
    first_coded = 0 if seg.is_unsegmented else 1
    delay = 0.0
    if first_coded:
        if strict_b1:
            delay += seg.broadcast_size if counts[0] > 0 else 0
        else:
            delay += sample.distinct_b1
    for q in range(first_coded, seg.Q):
        K_q = counts[q]
        if K_q == 0:
            continue
        rate = effective_dof(float(alloc.Lvec[q]), cfg, memory_sharing)
        delay += K_q*(1 - cfg.gamma)/min(rate, K_q)
    return delay


def run_simulation(
        cfg: SystemConfig,
        model: PopularityModel,
        solution: Solution,
        trials: int,
        seed: int,
        strict_b1: bool = False,
        memory_sharing: bool = True
    ) -> SimulationReport:
    """
    Monte Carlo estimate of the delay and sum-DoF of a solution

    Trial i draws from default_rng(SeedSequence([seed, i])), so any trial
    can be reproduced on its own.

    Parameters:
    - cfg: SystemConfig - system parameters
    - model: PopularityModel - file popularity
    - solution: Solution - optimized segmentation and allocation
    - trials: int - number of demand realizations
    - seed: int - base seed
    - strict_b1: bool - charge the full broadcast sub-library
    - memory_sharing: bool - use the memory-sharing rate

    Returns:
    - report: SimulationReport - per-trial delays and DoF with their statistics
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be positive, got {trials}")
    seg, alloc = solution.segmentation, solution.allocation
    delays = np.empty(trials)
    for trial in range(trials):
        sample = sample_demand(model, cfg.K, SeedSequence([seed, trial]), seg)
        delays[trial] = realized_delay(cfg, seg, alloc, sample, strict_b1, memory_sharing)
    dofs = cfg.K*(1 - cfg.gamma)/delays
    report = SimulationReport(delays, dofs, seed, strict_b1)
    logger.info("simulated %d trials: DoF %.4f +/- %.4f", trials, report.dof_mean, report.dof_std)
    return report
