from typing import Optional, Sequence, Tuple

import numpy as np

from popcache.constants import BROADCAST, FREE
from popcache.errors import InvalidSegmentationError


class Segmentation():
    """
    Consecutive split of the popularity-sorted library into Q sub-libraries.

    Boundaries n_1 < n_2 < ... < n_Q = N (n_1 may be 0). For Q >= 2 the
    first sub-library, files 1..n_1, is broadcast; sub-library q >= 2
    holds files n_{q-1}+1..n_q. Q = 1 is the unsegmented library.
    """
    def __init__(self, boundaries: Sequence[int], N: int):
        """
        Initializes and validates a segmentation

        Parameters:
        - boundaries: Sequence[int] - n_1..n_Q
        - N: int - library size
        """
        boundaries = tuple(int(n) for n in boundaries)
        if len(boundaries) == 0:
            raise InvalidSegmentationError("a segmentation needs at least one boundary")
        if boundaries[-1] != N:
            raise InvalidSegmentationError(f"last boundary must be N={N}, got {boundaries[-1]}")
        if boundaries[0] < 0:
            raise InvalidSegmentationError(f"n_1 must be non-negative, got {boundaries[0]}")
        if len(boundaries) == 1 and N < 1:
            raise InvalidSegmentationError("the library is empty")
        for q in range(1, len(boundaries)):
            if boundaries[q] <= boundaries[q - 1]:
                raise InvalidSegmentationError(
                    f"boundaries must be strictly increasing, got n_{q}={boundaries[q - 1]} >= n_{q + 1}={boundaries[q]}"
                )
        self.__boundaries = boundaries
        self.__N = int(N)

    @property
    def boundaries(self) -> Tuple[int, ...]:
        """
        Get the boundaries n_1..n_Q
        """
        return self.__boundaries

    @property
    def N(self) -> int:
        """
        Get the library size
        """
        return self.__N

    @property
    def Q(self) -> int:
        """
        Get the number of sub-libraries
        """
        return len(self.__boundaries)

    @property
    def is_unsegmented(self) -> bool:
        return self.Q == 1

    @property
    def broadcast_size(self) -> int:
        """
        Get n_1, the number of broadcast files (0 for the unsegmented library)
        """
        return 0 if self.is_unsegmented else self.__boundaries[0]

    @property
    def widths(self) -> np.ndarray:
        """
        Get the sub-library sizes w_q = n_q - n_{q-1}, with w_1 = n_1
        """
        return np.diff((0,) + self.__boundaries)

    @property
    def table_boundaries(self) -> list:
        """
        Get the boundaries without the trailing N. The unsegmented library
        reads [0]: the same placement as an empty broadcast sub-library
        followed by one coded sub-library.
        """
        if self.is_unsegmented:
            return [0]
        return list(self.__boundaries[:-1])

    def bounds(self, q: int) -> Tuple[int, int]:
        """
        Index range of sub-library q (1-based): files lo+1..hi
        """
        if not 1 <= q <= self.Q:
            raise InvalidSegmentationError(f"sub-library {q} outside 1..{self.Q}")
        lo = 0 if q == 1 else self.__boundaries[q - 2]
        return lo, self.__boundaries[q - 1]

    def masses(self, prefix: Sequence[float]) -> np.ndarray:
        """
        Popularity mass pi_q of every sub-library

        Parameters:
        - prefix: Sequence[float] - prefix sums of the popularity vector

        Returns:
        - masses: np.ndarray - pi_1..pi_Q
        """
        prefix = np.asarray(prefix)
        edges = np.array((0,) + self.__boundaries)
        return (prefix[edges[1:]] - prefix[edges[:-1]]).astype(float)

    def sublibrary_of(self, files: np.ndarray) -> np.ndarray:
        """
        Sub-library index (1-based) of each 1-based file index
        """
        return np.searchsorted(np.array(self.__boundaries), files, side="left") + 1

    def __eq__(self, other) -> bool:
        return isinstance(other, Segmentation) and self.N == other.N and self.boundaries == other.boundaries

    def __hash__(self) -> int:
        return hash((self.N, self.boundaries))

    def __repr__(self) -> str:
        return f"Segmentation({list(self.boundaries)}, N={self.N})"


class RedundancyAllocation():
    """
    Transmitter redundancy L_q of each sub-library, with the active-set
    label the allocation solver gave it.
    """
    def __init__(
            self,
            Lvec: Sequence[float],
            labels: Optional[Sequence[str]] = None,
            active_set: Optional['ActiveSetState'] = None
        ):
        Lvec = np.asarray(Lvec, dtype=float)
        if Lvec.ndim != 1 or Lvec.size == 0:
            raise InvalidSegmentationError("an allocation needs a non-empty one-dimensional redundancy vector")
        if labels is None:
            labels = [BROADCAST if q == 0 and Lvec.size > 1 else FREE for q in range(Lvec.size)]
        if len(labels) != Lvec.size:
            raise InvalidSegmentationError(f"{len(labels)} labels for {Lvec.size} redundancies")
        self.__Lvec = Lvec
        self.__Lvec.setflags(write=False)
        self.__labels = tuple(labels)
        self.__active_set = active_set

    @property
    def active_set(self) -> Optional['ActiveSetState']:
        """
        Get the active-set state the solver produced, if any
        """
        return self.__active_set

    @property
    def Lvec(self) -> np.ndarray:
        """
        Get the redundancies L_1..L_Q
        """
        return self.__Lvec

    @property
    def labels(self) -> Tuple[str, ...]:
        """
        Get the active-set label of every sub-library
        """
        return self.__labels

    @property
    def Q(self) -> int:
        return self.__Lvec.size

    @property
    def coded(self) -> list:
        """
        Get the redundancies of the non-broadcast sub-libraries
        """
        return self.__Lvec[1:].tolist() if self.Q > 1 else self.__Lvec.tolist()

    def perturbed(self, q: int, delta: float) -> 'RedundancyAllocation':
        """
        Copy with L_q shifted by delta (1-based q)
        """
        Lvec = self.__Lvec.copy()
        Lvec[q - 1] += delta
        return RedundancyAllocation(Lvec, self.__labels, self.__active_set)

    def __repr__(self) -> str:
        return f"RedundancyAllocation({self.__Lvec.tolist()}, {list(self.__labels)})"


class ActiveSetState():
    """
    Outcome of the active-set resolution: the clamped and interior
    sub-libraries (1-based indices, broadcast excluded) and the budget left
    for the interior ones.
    """
    def __init__(
            self,
            phi: Sequence[int],
            psi: Sequence[int],
            chi: Sequence[int],
            Phi_S: float,
            Psi_S: float,
            residual_budget: float,
            level: Optional[float]
        ):
        self.phi = tuple(phi)
        self.psi = tuple(psi)
        self.chi = tuple(chi)
        self.Phi_S = Phi_S
        self.Psi_S = Psi_S
        self.residual_budget = residual_budget
        # interior redundancies are level*sqrt(pi_q/w_q)
        self.level = level

    def to_dict(self) -> dict:
        return {
            "phi": list(self.phi),
            "psi": list(self.psi),
            "chi": list(self.chi),
            "Phi_S": self.Phi_S,
            "Psi_S": self.Psi_S,
            "residual_budget": self.residual_budget,
        }

    def __repr__(self) -> str:
        return f"ActiveSetState(phi={self.phi}, psi={self.psi}, chi={self.chi})"


class Solution():
    """
    An optimized segmentation with its allocation and delays
    """
    def __init__(
            self,
            segmentation: Segmentation,
            allocation: RedundancyAllocation,
            expected_delay: float,
            uniform_delay: float,
            active_set: Optional[ActiveSetState] = None,
            trace=None
        ):
        self.__segmentation = segmentation
        self.__allocation = allocation
        self.__expected_delay = float(expected_delay)
        self.__uniform_delay = float(uniform_delay)
        self.__active_set = active_set
        self.__trace = trace

    @property
    def segmentation(self) -> Segmentation:
        return self.__segmentation

    @property
    def allocation(self) -> RedundancyAllocation:
        return self.__allocation

    @property
    def expected_delay(self) -> float:
        """
        Get the expected delivery delay of this solution
        """
        return self.__expected_delay

    @property
    def uniform_delay(self) -> float:
        """
        Get the delay of the unsegmented library at redundancy L
        """
        return self.__uniform_delay

    @property
    def gain(self) -> float:
        """
        Get uniform_delay/expected_delay
        """
        return self.__uniform_delay/self.__expected_delay

    @property
    def Q(self) -> int:
        return self.__segmentation.Q

    @property
    def active_set(self) -> Optional[ActiveSetState]:
        return self.__active_set

    @property
    def trace(self):
        """
        Get the search trace, when the solution came out of a search
        """
        return self.__trace

    def to_dict(self) -> dict:
        record = {
            "Q": self.Q,
            "boundaries": list(self.__segmentation.boundaries),
            "n_star": self.__segmentation.table_boundaries,
            "L": self.__allocation.Lvec.tolist(),
            "labels": list(self.__allocation.labels),
            "expected_delay": self.expected_delay,
            "uniform_delay": self.uniform_delay,
            "gain": self.gain,
        }
        if self.__active_set is not None:
            record["active_set"] = self.__active_set.to_dict()
        if self.__trace is not None:
            record["trace"] = self.__trace.to_dict()
        return record

    def __repr__(self) -> str:
        return f"Solution(Q={self.Q}, boundaries={list(self.__segmentation.boundaries)}, gain={self.gain:.4f})"
