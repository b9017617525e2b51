import math
from typing import NamedTuple

from popcache.constants import INTEGER_SNAP_TOLERANCE
from popcache.errors import InvalidParameterError


class MemorySharingSplit(NamedTuple):
    """
    A non-integer redundancy realized by two integer ones.

    A fraction p of every file is cached on `ceil` transmitters and the
    rest on `floor` transmitters, so that p*ceil + (1-p)*floor = L.
    """
    floor: int
    ceil: int
    p: float
    loss_ratio: float


def snap_redundancy(Lq: float) -> float:
    """
    Round redundancies within INTEGER_SNAP_TOLERANCE of an integer
    """
    nearest = round(Lq)
    if abs(Lq - nearest) <= INTEGER_SNAP_TOLERANCE*max(1.0, abs(Lq)):
        return float(nearest)
    return float(Lq)


def memory_sharing_split(Lq: float) -> MemorySharingSplit:
    """
    Split a redundancy into its two neighbouring integers

    The loss ratio compares the effective delivery rate of the split with
    the relaxed rate L(1+Lambda*gamma): 1 + r(1-r)/(floor(floor+1)), which
    peaks at 1.125 for L = 1.5 and is 1 on integers.

    Parameters:
    - Lq: float - redundancy, Lq >= 1

    Returns:
    - split: MemorySharingSplit - (floor, ceil, p, loss_ratio)
    """
    if not math.isfinite(Lq) or Lq < 1 - INTEGER_SNAP_TOLERANCE:
        raise InvalidParameterError(f"redundancy must be finite and at least 1, got {Lq}")
    Lq = max(1.0, snap_redundancy(Lq))
    floor = math.floor(Lq)
    p = Lq - floor
    loss_ratio = 1 + p*(1 - p)/(floor*(floor + 1))
    return MemorySharingSplit(floor, floor + 1, p, loss_ratio)
