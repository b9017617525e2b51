import math
import numpy as np

from popcache.constants import NORMALIZATION_TOLERANCE, PREFIX_BITS
from popcache.errors import InvalidParameterError


class PopularityModel():
    """
    Zipf file popularity over a library of N files sorted by popularity.

    p_n = n^(-alpha)/sum_k k^(-alpha), with a prefix-sum table so that the
    mass of any index range costs one subtraction. The table is kept in
    integer units of 2^-62 and exposed in extended precision, so range
    masses add up exactly and the table increases strictly wherever
    p_n >= 2^-63.
    """
    def __init__(self, N: int, alpha: float):
        """
        Initializes the popularity model

        Parameters:
        - N: int - library size
        - alpha: float - Zipf exponent, alpha >= 0
        """
        if N < 1:
            raise InvalidParameterError(f"N must be positive, got {N}")
        if not np.isfinite(alpha) or alpha < 0:
            raise InvalidParameterError(f"alpha must be finite and non-negative, got {alpha}")

        weights = np.arange(1, N + 1, dtype=float)**(-float(alpha))
        # compensated sum
        total = math.fsum(weights)
        self.__N = int(N)
        self.__alpha = float(alpha)
        self.__p = weights/total
        # fixed-point prefix in units of 2^-PREFIX_BITS, exact under integer arithmetic
        units = np.zeros(N + 1, dtype=np.int64)
        np.cumsum(np.rint(np.ldexp(self.__p, PREFIX_BITS)).astype(np.int64), out=units[1:])
        self.__prefix_units = units
        self.__prefix = np.ldexp(units.astype(np.longdouble), -PREFIX_BITS)
        self.__prefix_list = self.__prefix.astype(float).tolist()

        if abs(math.fsum(self.__p) - 1) > NORMALIZATION_TOLERANCE:
            raise InvalidParameterError(f"popularity does not normalize for N={N}, alpha={alpha}")

    @property
    def N(self) -> int:
        """
        Get the library size
        """
        return self.__N

    @property
    def alpha(self) -> float:
        """
        Get the Zipf exponent
        """
        return self.__alpha

    @property
    def p(self) -> np.ndarray:
        """
        Get the popularity vector p_1..p_N
        """
        return self.__p

    @property
    def prefix_units(self) -> np.ndarray:
        """
        Get the prefix sums as int64 multiples of 2^-PREFIX_BITS
        """
        return self.__prefix_units

    @property
    def prefix(self) -> np.ndarray:
        """
        Get the prefix sums in extended precision, prefix[i] = p_1 + ... + p_i with prefix[0] = 0
        """
        return self.__prefix

    @property
    def prefix_list(self) -> list:
        """
        Get the prefix sums as a python list, for scalar hot loops
        """
        return self.__prefix_list

    def cumulative_mass(self, lo: int, hi: int) -> np.longdouble:
        """
        Probability mass of the files lo+1..hi

        Parameters:
        - lo: int - exclusive lower index, 0 <= lo
        - hi: int - inclusive upper index, lo <= hi <= N

        Returns:
        - mass: np.longdouble - p_{lo+1} + ... + p_hi, exact difference of the prefix table
        """
        if not 0 <= lo <= hi <= self.N:
            raise InvalidParameterError(f"range ({lo}, {hi}] is outside 0..{self.N}")
        return self.__prefix[hi] - self.__prefix[lo]

    def __repr__(self) -> str:
        return f"PopularityModel(N={self.N}, alpha={self.alpha})"


def build_popularity(N: int, alpha: float) -> PopularityModel:
    return PopularityModel(N, alpha)


def cumulative_mass(model: PopularityModel, lo: int, hi: int) -> np.longdouble:
    return model.cumulative_mass(lo, hi)
