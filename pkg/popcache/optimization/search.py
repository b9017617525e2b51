import logging
import math
from typing import Dict, Optional, Tuple

from popcache.constants import DEFAULT_Q_MAX, DELAY_RELATIVE_TOLERANCE, PLATEAU_PATIENCE
from popcache.errors import InfeasibleError, InvalidParameterError
from popcache.models import PopularityModel, Segmentation, Solution, SystemConfig, uniform_delay
from popcache.optimization.kkt import build_solution, segment_objective

logger = logging.getLogger(__name__)


class SearchSpace():
    """
    Bracket [lo, hi] searched for boundary n_q
    """
    __slots__ = ("q", "lo", "hi")

    def __init__(self, q: int, lo: int, hi: int):
        self.q = q
        self.lo = lo
        self.hi = hi

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def __repr__(self) -> str:
        return f"SearchSpace(q={self.q}, lo={self.lo}, hi={self.hi})"


class SearchTrace():
    """
    Bookkeeping of a boundary search: objective evaluations and the best
    boundaries found for every Q tried
    """
    def __init__(self):
        self.evaluations = 0
        self.best_per_Q: Dict[int, Tuple[list, float]] = {}
        self.Q_star: Optional[int] = None
        self.stop_reason: Optional[str] = None

    def record(self, Q: int, boundaries, delay: float, evaluations: int) -> None:
        self.best_per_Q[Q] = (list(boundaries), delay)
        self.evaluations += evaluations

    def to_dict(self) -> dict:
        return {
            "evaluations": self.evaluations,
            "Q_star": self.Q_star,
            "stop_reason": self.stop_reason,
            "best_per_Q": {
                str(Q): {"boundaries": boundaries, "delay": delay}
                for Q, (boundaries, delay) in sorted(self.best_per_Q.items())
            },
        }


class BoundarySearch():
    """
    Recursive discrete bisection over the boundaries n_1..n_{Q-1} for a
    fixed Q.

    Level q brackets n_q in [n_{q-1}+1, N+q-Q] (n_1 starts at 0) and
    bisects on the sign of f(m+1) - f(m), where f(m) is the delay with n_q
    = m and the remaining boundaries optimized recursively. Candidates are
    ranked by (clamp violation, delay) so infeasible regions push the
    bracket toward feasible ones. Results are memoized per prefix
    n_1..n_{q-1}: the shared memory budget couples every sub-library, so
    the suffix optimum depends on the whole prefix.
    """
    def __init__(
            self,
            cfg: SystemConfig,
            model: PopularityModel,
            Q: int,
            upper_clamp: bool = True
        ):
        if cfg.N != model.N:
            raise InvalidParameterError(f"config has N={cfg.N}, popularity model has N={model.N}")
        if not 1 <= Q <= cfg.N:
            raise InvalidParameterError(f"Q must lie in [1, N={cfg.N}], got {Q}")
        self.__cfg = cfg
        self.__model = model
        self.__Q = Q
        self.__upper_clamp = upper_clamp
        self.__prefix = model.prefix_list
        self.__leaves: Dict[tuple, Tuple[float, float]] = {}
        self.__suffixes: Dict[tuple, Tuple[tuple, Tuple[float, float]]] = {}

    @property
    def Q(self) -> int:
        return self.__Q

    @property
    def evaluations(self) -> int:
        """
        Get the number of distinct boundary vectors evaluated
        """
        return len(self.__leaves)

    def run(self) -> Tuple[tuple, Tuple[float, float]]:
        """
        Search the boundaries

        Returns:
        - boundaries: tuple - n_1..n_Q
        - key: Tuple[float, float] - (violation, delay) of the result
        """
        return self.__update(())

    def __objective(self, boundaries: tuple) -> Tuple[float, float]:
        key = self.__leaves.get(boundaries)
        if key is None:
            key = segment_objective(self.__cfg, self.__prefix, boundaries, self.__upper_clamp)
            self.__leaves[boundaries] = key
        return key

    def __update(self, prefix: tuple) -> Tuple[tuple, Tuple[float, float]]:
        N = self.__cfg.N
        q = len(prefix) + 1
        if q == self.__Q:
            boundaries = prefix + (N,)
            return boundaries, self.__objective(boundaries)
        cached = self.__suffixes.get(prefix)
        if cached is not None:
            return cached

        space = SearchSpace(q, prefix[-1] + 1 if prefix else 0, N + q - self.__Q)
        lo, hi = space.lo, space.hi
        while lo < hi:
            mid = (lo + hi)//2
            # ties keep the smaller index
            if self.__update(prefix + (mid + 1,))[1] < self.__update(prefix + (mid,))[1]:
                lo = mid + 1
            else:
                hi = mid
        result = self.__update(prefix + (lo,))
        self.__suffixes[prefix] = result
        return result


def optimize_boundaries(
        cfg: SystemConfig,
        model: PopularityModel,
        Q: int,
        upper_clamp: bool = True
    ) -> Tuple[Segmentation, float, SearchTrace]:
    """
    Best consecutive segmentation with Q sub-libraries

    Parameters:
    - cfg: SystemConfig - system parameters
    - model: PopularityModel - file popularity
    - Q: int - number of sub-libraries, 1 <= Q <= N
    - upper_clamp: bool - enforce L_q <= U_q

    Returns:
    - segmentation: Segmentation - boundaries found
    - delay: float - optimized delay of that segmentation
    - trace: SearchTrace - evaluation count for this Q
    """
    search = BoundarySearch(cfg, model, Q, upper_clamp)
    if Q == 1:
        boundaries, (violation, delay) = (cfg.N,), (0.0, uniform_delay(cfg))
    else:
        boundaries, (violation, delay) = search.run()
    if violation > 0:
        raise InfeasibleError(f"no segmentation with Q={Q} keeps every upper clamp at or above 1")
    trace = SearchTrace()
    trace.record(Q, boundaries, delay, max(1, search.evaluations))
    trace.Q_star = Q
    logger.info("Q=%d: boundaries=%s delay=%.6f after %d evaluations", Q, list(boundaries), delay, trace.evaluations)
    return Segmentation(boundaries, cfg.N), delay, trace


def optimize_all(
        cfg: SystemConfig,
        model: PopularityModel,
        q_max: int = DEFAULT_Q_MAX,
        upper_clamp: bool = True
    ) -> Solution:
    """
    Best segmentation over Q = 1..q_max

    The scan stops at the first Q whose delay rises, after PLATEAU_PATIENCE
    Q values without strict improvement, or once (Q-1) coded
    sub-libraries at their least delay Lambda(1-gamma)/(1+Lambda*gamma)
    already cost as much as the best delay. Ties keep the smaller Q.

    Parameters:
    - cfg: SystemConfig - system parameters
    - model: PopularityModel - file popularity
    - q_max: int - largest Q tried
    - upper_clamp: bool - enforce L_q <= U_q

    Returns:
    - solution: Solution - best segmentation with its allocation and trace
    """
    if q_max < 1:
        raise InvalidParameterError(f"q_max must be at least 1, got {q_max}")
    trace = SearchTrace()
    best_seg, best_delay = None, math.inf
    previous = math.inf
    stale = 0
    trace.stop_reason = "q_max"
    for Q in range(1, min(q_max, cfg.N) + 1):
        if upper_clamp and (Q - 1)*cfg.sublibrary_floor >= best_delay:
            trace.stop_reason = "floor"
            break
        try:
            seg, delay, q_trace = optimize_boundaries(cfg, model, Q, upper_clamp)
        except InfeasibleError:
            logger.info("Q=%d is infeasible, stopping", Q)
            trace.stop_reason = "infeasible"
            break
        trace.record(Q, seg.boundaries, delay, q_trace.evaluations)

        if delay < best_delay*(1 - DELAY_RELATIVE_TOLERANCE):
            best_seg, best_delay = seg, delay
            stale = 0
        elif delay > previous*(1 + DELAY_RELATIVE_TOLERANCE):
            trace.stop_reason = "increase"
            break
        else:
            stale += 1
            if stale >= PLATEAU_PATIENCE:
                trace.stop_reason = "plateau"
                break
        previous = delay

    trace.Q_star = best_seg.Q
    logger.info("Q*=%d (%s), delay=%.6f, %d evaluations", trace.Q_star, trace.stop_reason, best_delay, trace.evaluations)
    return build_solution(cfg, model, best_seg, upper_clamp, trace)
