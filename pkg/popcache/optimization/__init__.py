from .kkt import (
    build_solution,
    coded_delay,
    optimized_delay,
    segment_objective,
    solve_allocation,
    stationarity_values,
    water_fill,
)
from .search import BoundarySearch, SearchSpace, SearchTrace, optimize_all, optimize_boundaries
from .oracle import (
    DominanceReport,
    GeneralSegmentation,
    brute_optimal,
    consecutive_count,
    enumerate_consecutive,
    enumerate_general,
    general_delay,
    swap_delay_change,
    verify_consecutive_dominance,
)
from .certificates import CheckResult, budget_gap, certify, complementarity_violations, stationarity_spread
