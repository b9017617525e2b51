import logging
import math
from fractions import Fraction
from typing import Dict, List, NamedTuple, Tuple

import numpy as np

from popcache.constants import BUDGET_TOLERANCE, INTEGER_SNAP_TOLERANCE, PLACEMENT_MAX_PIECES
from popcache.errors import CapacityError, ConstraintViolationError
from popcache.models import RedundancyAllocation, Segmentation, SystemConfig
from popcache.models.memory_sharing import snap_redundancy

logger = logging.getLogger(__name__)


class CachedPiece(NamedTuple):
    """
    Contiguous byte range of one file held by a transmitter; offset and
    fraction are in file units
    """
    file: int
    offset: float
    fraction: float


class TransmitterPlacement():
    """
    Contents of every transmitter cache
    """
    def __init__(
            self,
            per_tx: List[List[CachedPiece]],
            holders: Dict[int, List[Tuple[int, CachedPiece]]],
            cursor_trace: List[float],
            redundancy: Dict[int, float],
            piece_width: float = 1.0
        ):
        self.__per_tx = tuple(per_tx)
        self.__holders = holders
        self.__cursor_trace = tuple(cursor_trace)
        self.__redundancy = redundancy
        self.__piece_width = piece_width
        self.__loads = np.array([math.fsum(piece.fraction for piece in pieces) for pieces in per_tx])

    @property
    def per_tx(self) -> Tuple[List[CachedPiece], ...]:
        """
        Get the pieces cached at each transmitter (0-based transmitter index)
        """
        return self.__per_tx

    @property
    def cursor_trace(self) -> Tuple[float, ...]:
        """
        Get the cursor position where each sub-library started
        """
        return self.__cursor_trace

    @property
    def piece_width(self) -> float:
        """
        Get the width of the equal pieces files were cut into
        """
        return self.__piece_width

    @property
    def loads(self) -> np.ndarray:
        """
        Get the number of files (fractional) stored at each transmitter
        """
        return self.__loads

    def redundancy_of(self, file: int) -> float:
        """
        Redundancy the file was placed with
        """
        return self.__redundancy[file]

    def files_at(self, tx: int) -> set:
        return {piece.file for piece in self.__per_tx[tx]}

    def holders(self, file: int) -> List[Tuple[int, CachedPiece]]:
        """
        (transmitter, piece) pairs storing any part of a file
        """
        return list(self.__holders.get(file, []))

    def coverage(self, file: int) -> List[Tuple[float, float, List[int]]]:
        """
        Split [0, 1) of a file into intervals with the transmitters holding each

        Returns:
        - intervals: List[Tuple[float, float, List[int]]] - (start, end, transmitters)
        """
        spans = [
            (tx, piece.offset, min(piece.offset + piece.fraction, 1.0))
            for tx, piece in self.__holders.get(file, [])
        ]
        cuts = sorted({0.0, 1.0} | {s for _, s, _ in spans} | {e for _, _, e in spans})
        merged = [cuts[0]]
        for cut in cuts[1:]:
            if cut - merged[-1] > INTEGER_SNAP_TOLERANCE:
                merged.append(cut)
        merged[-1] = 1.0
        intervals = []
        for a, b in zip(merged[:-1], merged[1:]):
            middle = (a + b)/2
            intervals.append((a, b, [tx for tx, s, e in spans if s <= middle < e]))
        return intervals

    def to_dict(self) -> dict:
        return {
            "transmitters": [
                [{"file": piece.file, "offset": piece.offset, "fraction": piece.fraction} for piece in pieces]
                for pieces in self.__per_tx
            ],
            "loads": self.__loads.tolist(),
            "cursor_trace": list(self.__cursor_trace),
            "piece_width": self.__piece_width,
        }


def pieces_per_file(cfg: SystemConfig) -> int:
    """
    Number of equal pieces every file is cut into for placement

    The cursor fills one arc of width 1/M per transmitter and lap, so the
    loads stay within gamma_T*N when M*gamma_T*N is a whole number. M is the
    smallest such count (1 for integer capacities).

    Parameters:
    - cfg: SystemConfig - system parameters

    Returns:
    - M: int - pieces per file
    """
    capacity = cfg.transmitter_capacity
    fraction = Fraction(capacity).limit_denominator(PLACEMENT_MAX_PIECES)
    if abs(float(fraction) - capacity) > INTEGER_SNAP_TOLERANCE*max(1.0, capacity):
        raise CapacityError(
            f"transmitter capacity {capacity} is not a multiple of 1/M for any M <= {PLACEMENT_MAX_PIECES}"
        )
    return fraction.denominator


def _cut(file: int, base: float, width: float, offset: float, length: float) -> List[CachedPiece]:
    # offset and length are in arc units; ranges past the piece end wrap to its start
    if offset + length <= 1 + INTEGER_SNAP_TOLERANCE:
        return [CachedPiece(file, base + offset*width, min(length, 1.0)*width)]
    pieces = [CachedPiece(file, base + offset*width, (1 - offset)*width)]
    if offset + length - 1 > INTEGER_SNAP_TOLERANCE:
        pieces.append(CachedPiece(file, base, (offset + length - 1)*width))
    return pieces


def place_transmitters(cfg: SystemConfig, seg: Segmentation, alloc: RedundancyAllocation) -> TransmitterPlacement:
    """
    Cyclic placement of every sub-library over the K_T transmitters

    Every file is cut into M equal pieces (see pieces_per_file) and a
    cursor walks around the transmitters in arcs of one piece width. A
    piece at redundancy L_q covers [c, c+L_q) arcs: every transmitter whose
    arc it overlaps stores the overlapped bytes, and the cursor moves on to
    c+L_q. Copies of a byte are one arc apart, so each byte sits on
    ceil(L_q) or floor(L_q) distinct transmitters, the first
    p = L_q - floor(L_q) of every piece on ceil(L_q). Integer redundancies
    with an integer capacity give whole files on consecutive transmitters.

    Parameters:
    - cfg: SystemConfig - system parameters
    - seg: Segmentation - consecutive segmentation
    - alloc: RedundancyAllocation - redundancies L_1..L_Q

    Returns:
    - placement: TransmitterPlacement - per-transmitter contents and loads
    """
    if alloc.Q != seg.Q:
        raise ConstraintViolationError("dimension", f"{alloc.Q} redundancies for {seg.Q} sub-libraries")
    K_T = cfg.K_T
    M = pieces_per_file(cfg)
    width = 1.0/M
    per_tx = [[] for _ in range(K_T)]
    holders = {}
    redundancy = {}
    cursor_trace = []
    cursor = 0.0
    for q in range(1, seg.Q + 1):
        Lq = snap_redundancy(float(alloc.Lvec[q - 1]))
        if Lq < 1:
            raise ConstraintViolationError("lower-bound", f"L_{q}={Lq} < 1")
        if Lq > K_T:
            raise CapacityError(f"L_{q}={Lq} exceeds the {K_T} transmitters")
        cursor_trace.append(cursor)
        lo, hi = seg.bounds(q)
        for file in range(lo + 1, hi + 1):
            pieces = []
            for index in range(M):
                start, end = cursor, cursor + Lq
                unit = math.floor(start)
                while unit < end:
                    a, b = max(start, unit), min(end, unit + 1)
                    if b - a > INTEGER_SNAP_TOLERANCE:
                        tx = unit % K_T
                        for piece in _cut(file, index*width, width, math.fmod(a - start, 1.0), b - a):
                            per_tx[tx].append(piece)
                            pieces.append((tx, piece))
                    unit += 1
                cursor = math.fmod(end, K_T)
            holders[file] = pieces
            redundancy[file] = Lq
        logger.debug("sub-library %d placed at L=%s, cursor now %.6f", q, Lq, cursor)

    placement = TransmitterPlacement(per_tx, holders, cursor_trace, redundancy, width)
    capacity = cfg.transmitter_capacity
    overflow = np.nonzero(placement.loads > capacity*(1 + BUDGET_TOLERANCE) + BUDGET_TOLERANCE)[0]
    if overflow.size:
        tx = overflow[0]
        raise CapacityError(f"transmitter {tx} stores {placement.loads[tx]} files, capacity is {capacity}")
    return placement
