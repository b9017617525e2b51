from .system_config import SystemConfig, choose_lambda
from .popularity import PopularityModel, build_popularity, cumulative_mass
from .memory_sharing import MemorySharingSplit, memory_sharing_split
from .segmentation import ActiveSetState, RedundancyAllocation, Segmentation, Solution
from .delay import (
    DelayBound,
    broadcast_delay_bound,
    check_feasibility,
    delay_bound,
    effective_dof,
    expected_delay,
    uniform_delay,
    upper_clamps,
)
