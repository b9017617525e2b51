import logging
import math
from typing import List

from popcache.constants import DOMINANCE_TOLERANCE, GENERAL_ENUMERATION_MAX_N, ORACLE_MAX_N
from popcache.errors import InfeasibleError
from popcache.files import RunConfig
from popcache.models import Solution, build_popularity
from popcache.optimization import (
    CheckResult,
    brute_optimal,
    certify,
    optimize_all,
    optimize_boundaries,
    verify_consecutive_dominance,
)

logger = logging.getLogger(__name__)

# exhaustive general labelings are tried up to this library size
DOMINANCE_MAX_N = 10


class VerificationReport():
    """
    Collected outcomes of the desk-scale verification suite
    """
    def __init__(self):
        self.checks: List[CheckResult] = []
        self.points: List[dict] = []

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def add(self, name: str, passed: bool, detail: str) -> None:
        self.checks.append(CheckResult(name, bool(passed), detail))

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": len(self.checks),
            "failures": [check._asdict() for check in self.failures],
            "points": self.points,
        }


def _oracle_agreement(report: VerificationReport, label: str, cfg, model, Q: int) -> None:
    try:
        _, searched, _ = optimize_boundaries(cfg, model, Q)
    except InfeasibleError:
        searched = math.inf
    try:
        brute, _ = brute_optimal(cfg, model, Q)
        exhaustive = brute.expected_delay
    except InfeasibleError:
        exhaustive = math.inf
    if math.isinf(searched) or math.isinf(exhaustive):
        agree = searched == exhaustive
    else:
        agree = abs(searched - exhaustive) <= DOMINANCE_TOLERANCE*exhaustive
    report.add(f"{label} Q={Q} oracle", agree, f"search {searched}, exhaustive {exhaustive}")


def run_verification(config: RunConfig, perturb: float = 0.0) -> VerificationReport:
    """
    Run the optimality checks on every grid point of a small configuration

    For each (K, alpha): bisection against exhaustive search for every
    Q <= q_max, the certificates of the optimized solution (feasibility,
    budget identity, stationarity, complementarity, bound, gain) and, for
    N <= 10, dominance of consecutive segmentations over general ones.
    At alpha = 0 the gain must be exactly 1 unless files are broadcast.
    A non-zero perturb shifts the first coded redundancy of each solution
    before it is certified.

    Parameters:
    - config: RunConfig - desk-scale configuration (N <= 20)
    - perturb: float - shift applied to the first coded redundancy

    Returns:
    - report: VerificationReport - every check with its outcome
    """
    report = VerificationReport()
    for K, alpha in config.grid():
        cfg = config.system_config(K)
        model = build_popularity(cfg.N, alpha)
        label = f"K={K} alpha={alpha}"

        if cfg.N <= ORACLE_MAX_N:
            for Q in range(2, min(config.q_max, cfg.N) + 1):
                _oracle_agreement(report, label, cfg, model, Q)

        solution = optimize_all(cfg, model, config.q_max)
        if perturb:
            q = 1 if solution.segmentation.is_unsegmented else 2
            solution = Solution(
                solution.segmentation,
                solution.allocation.perturbed(q, perturb),
                solution.expected_delay,
                solution.uniform_delay,
                solution.active_set,
            )
        for check in certify(cfg, model, solution):
            report.add(f"{label} {check.name}", check.passed, check.detail)
        report.points.append({"K": K, "alpha": alpha, "Q": solution.Q, "gain": solution.gain})
        if alpha == 0:
            # coded sub-libraries alone never beat uniform placement under uniform popularity
            n_1 = solution.segmentation.broadcast_size
            uniform = solution.gain == 1.0 if n_1 == 0 else solution.gain > 1.0
            report.add(f"{label} uniform popularity", uniform, f"gain {solution.gain} with n_1={n_1}")

        if cfg.N <= min(DOMINANCE_MAX_N, GENERAL_ENUMERATION_MAX_N):
            dominance = verify_consecutive_dominance(cfg, model, min(3, cfg.N), seed=config.seed)
            report.add(f"{label} dominance", dominance.passed, str(dominance.to_dict()))

    logger.info("verification: %d checks, %d failures", len(report.checks), len(report.failures))
    return report
