import itertools
import math
from typing import Tuple

import numpy as np

from popcache.errors import InfeasibleError
from popcache.models import SystemConfig


class ReceiverPlacement():
    """
    Receiver-side placement: every file is split into binom(Lambda, t)
    subfiles labelled by t-subsets tau of the Lambda caches, and cache l
    stores the subfiles whose tau contains l. Users are spread over the
    caches round-robin.
    """
    def __init__(self, subfiles: np.ndarray, cache_contents: Tuple[np.ndarray, ...], user_to_cache: np.ndarray):
        self.__subfiles = subfiles
        self.__cache_contents = cache_contents
        self.__user_to_cache = user_to_cache

    @property
    def subfiles(self) -> np.ndarray:
        """
        Get the tau label of every subfile, one row of 1-based cache indices per subfile
        """
        return self.__subfiles

    @property
    def num_subfiles(self) -> int:
        return self.__subfiles.shape[0]

    @property
    def cache_contents(self) -> Tuple[np.ndarray, ...]:
        """
        Get the subfile indices stored in each cache (0-based cache, 0-based subfile)
        """
        return self.__cache_contents

    @property
    def user_to_cache(self) -> np.ndarray:
        """
        Get the 1-based cache of each user (user k at position k-1)
        """
        return self.__user_to_cache

    def users_of(self, cache: int) -> np.ndarray:
        """
        1-based users attached to a 1-based cache
        """
        return np.nonzero(self.__user_to_cache == cache)[0] + 1

    def to_dict(self) -> dict:
        return {
            "num_subfiles": self.num_subfiles,
            "caches": [
                {
                    "cache": cache + 1,
                    "users": self.users_of(cache + 1).tolist(),
                    "subfiles": self.__subfiles[contents].tolist(),
                }
                for cache, contents in enumerate(self.__cache_contents)
            ],
        }


def place_receivers(cfg: SystemConfig) -> ReceiverPlacement:
    """
    Build the receiver caches of a configuration

    Parameters:
    - cfg: SystemConfig - system parameters

    Returns:
    - placement: ReceiverPlacement - subfile labels, cache contents and user mapping
    """
    Lambda, t = cfg.Lambda, cfg.t
    if math.comb(Lambda, t) > cfg.F:
        raise InfeasibleError(f"binom({Lambda}, {t}) exceeds the subpacketization budget F={cfg.F}")
    subfiles = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(1, Lambda + 1), t)),
        dtype=np.int32,
    ).reshape(-1, t)
    cache_contents = tuple(np.nonzero((subfiles == cache).any(axis=1))[0] for cache in range(1, Lambda + 1))
    user_to_cache = np.arange(cfg.K) % Lambda + 1
    return ReceiverPlacement(subfiles, cache_contents, user_to_cache)
