import logging
import math
from fractions import Fraction
from typing import Optional

from popcache.constants import GAMMA_MAX_DENOMINATOR, INTEGER_SNAP_TOLERANCE
from popcache.errors import InfeasibleError, InvalidParameterError

logger = logging.getLogger(__name__)


def _as_fraction(value: float, name: str) -> Fraction:
    fraction = Fraction(value).limit_denominator(GAMMA_MAX_DENOMINATOR)
    if abs(float(fraction) - value) > INTEGER_SNAP_TOLERANCE:
        raise InvalidParameterError(f"{name}={value} is not a rational with denominator <= {GAMMA_MAX_DENOMINATOR}")
    return fraction


def choose_lambda(gamma: float, F: int, K: int) -> int:
    """
    Choose the number of receiver caches

    The largest Lambda <= K with Lambda*gamma integer and
    binom(Lambda, Lambda*gamma) <= F. The binomial grows with Lambda at a
    fixed ratio, so the scan stops at the first multiple that overflows F.

    Parameters:
    - gamma: float - receiver cache fraction, 0 < gamma < 1
    - F: int - subpacketization budget
    - K: int - number of users

    Returns:
    - Lambda: int - number of receiver caches
    """
    if not 0 < gamma < 1:
        raise InvalidParameterError(f"gamma must lie in (0, 1), got {gamma}")
    if F < 1 or K < 1:
        raise InvalidParameterError(f"F and K must be positive, got F={F}, K={K}")
    step = _as_fraction(gamma, "gamma").denominator
    best = None
    Lambda = step
    while Lambda <= K and math.comb(Lambda, round(Lambda*gamma)) <= F:
        best = Lambda
        Lambda += step
    if best is None:
        raise InfeasibleError(
            f"no Lambda <= K={K} with integer Lambda*gamma and binom(Lambda, Lambda*gamma) <= F={F}"
        )
    logger.debug("chose Lambda=%d for gamma=%s, F=%s, K=%d", best, gamma, F, K)
    return best


class SystemConfig():
    """
    Parameters of a multi-transmitter coded caching network.

    N files, K users sharing Lambda receiver caches of fraction gamma, and
    K_T transmitters each caching a fraction gamma_T of the library.
    """
    def __init__(
            self,
            N: int,
            K: int,
            K_T: int,
            gamma: float,
            gamma_T: float,
            F: int,
            Lambda: Optional[int] = None
        ):
        """
        Initializes and validates the configuration. Lambda is chosen with
        choose_lambda when omitted.

        Parameters:
        - N: int - library size
        - K: int - number of users
        - K_T: int - number of transmitters
        - gamma: float - receiver cache fraction
        - gamma_T: float - transmitter cache fraction
        - F: int - subpacketization budget
        - Lambda: int - number of receiver caches (optional)
        """
        if N < 1 or K < 1 or K_T < 1:
            raise InvalidParameterError(f"N, K and K_T must be positive, got N={N}, K={K}, K_T={K_T}")
        if not 0 < gamma < 1:
            raise InvalidParameterError(f"gamma must lie in (0, 1), got {gamma}")
        if gamma_T > 1 or gamma_T*K_T < 1 - INTEGER_SNAP_TOLERANCE:
            raise InvalidParameterError(f"gamma_T must lie in [1/K_T, 1], got {gamma_T} with K_T={K_T}")
        if Lambda is None:
            Lambda = choose_lambda(gamma, F, K)
        if Lambda < 1 or Lambda > K:
            raise InvalidParameterError(f"Lambda must lie in [1, K={K}], got {Lambda}")

        t = Lambda*gamma
        if abs(t - round(t)) > INTEGER_SNAP_TOLERANCE:
            raise InfeasibleError(f"Lambda*gamma must be an integer, got {Lambda}*{gamma}={t}")
        t = round(t)
        if math.comb(Lambda, t) > F:
            raise InfeasibleError(f"binom({Lambda}, {t}) exceeds the subpacketization budget F={F}")

        self.__N = int(N)
        self.__K = int(K)
        self.__K_T = int(K_T)
        self.__gamma = float(gamma)
        self.__gamma_T = float(gamma_T)
        self.__F = int(F)
        self.__Lambda = int(Lambda)
        self.__t = t

    @property
    def N(self) -> int:
        """
        Get the library size
        """
        return self.__N

    @property
    def K(self) -> int:
        """
        Get the number of users
        """
        return self.__K

    @property
    def K_T(self) -> int:
        """
        Get the number of transmitters
        """
        return self.__K_T

    @property
    def gamma(self) -> float:
        """
        Get the receiver cache fraction
        """
        return self.__gamma

    @property
    def gamma_T(self) -> float:
        """
        Get the transmitter cache fraction
        """
        return self.__gamma_T

    @property
    def F(self) -> int:
        """
        Get the subpacketization budget
        """
        return self.__F

    @property
    def Lambda(self) -> int:
        """
        Get the number of receiver caches
        """
        return self.__Lambda

    @property
    def t(self) -> int:
        """
        Get the receiver-side caching gain Lambda*gamma
        """
        return self.__t

    @property
    def L(self) -> float:
        """
        Get the average transmitter redundancy K_T*gamma_T
        """
        return self.K_T*self.gamma_T

    @property
    def delay_scale(self) -> float:
        """
        Get K(1-gamma)/(1+Lambda*gamma), the delay of a sub-library with unit mass and unit redundancy
        """
        return self.K*(1 - self.gamma)/(1 + self.t)

    @property
    def sublibrary_floor(self) -> float:
        """
        Get Lambda(1-gamma)/(1+Lambda*gamma), the least delay of a coded sub-library at its upper clamp
        """
        return self.Lambda*(1 - self.gamma)/(1 + self.t)

    @property
    def transmitter_capacity(self) -> float:
        """
        Get the per-transmitter capacity gamma_T*N in files
        """
        return self.gamma_T*self.N

    def with_users(self, K: int) -> 'SystemConfig':
        """
        Copy of this configuration serving K users with the same Lambda
        """
        return SystemConfig(self.N, K, self.K_T, self.gamma, self.gamma_T, self.F, self.Lambda)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "K": self.K,
            "K_T": self.K_T,
            "gamma": self.gamma,
            "gamma_T": self.gamma_T,
            "F": self.F,
            "Lambda": self.Lambda,
            "L": self.L,
        }

    def __repr__(self) -> str:
        return (
            f"SystemConfig(N={self.N}, K={self.K}, K_T={self.K_T}, gamma={self.gamma}, "
            f"gamma_T={self.gamma_T}, F={self.F}, Lambda={self.Lambda})"
        )
