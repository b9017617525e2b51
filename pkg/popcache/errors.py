class PopCacheError(Exception):
    """
    Base class for every error raised by popcache
    """


class InvalidParameterError(PopCacheError, ValueError):
    """
    A system or model parameter is out of its valid range
    """


class InfeasibleError(PopCacheError):
    """
    No configuration satisfies the constraints (subpacketization, clamps, ...)
    """


class InvalidSegmentationError(PopCacheError, ValueError):
    """
    Segmentation boundaries are malformed
    """


class ConstraintViolationError(PopCacheError):
    """
    An allocation breaks one of the placement constraints.

    The `constraint` attribute names the broken constraint: one of
    dimension, broadcast-redundancy, lower-bound, upper-bound, budget.
    """
    def __init__(self, constraint: str, message: str):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint


class CapacityError(PopCacheError):
    """
    A transmitter cache would overflow its capacity
    """


class OracleScaleError(PopCacheError):
    """
    Exhaustive enumeration requested on a library that is too large
    """
