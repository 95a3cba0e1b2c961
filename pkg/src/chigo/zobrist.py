"""Zobrist hash codes and incremental XOR hashing of board positions.

Every (point, state) pair on the board gets a random 64-bit code, including
the Empty state, so a 19x19 table holds 3*19*19 = 1083 codes.  A position's
hash is the XOR of the codes of all points; placing or removing a stone
XORs out the old state's code and XORs in the new one.  Tables are a pure
function of their seed (numpy PCG64 stream), so hashes are stable across
runs and machines.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gotypes import Point

logger = logging.getLogger(__name__)

# Seed of the production hash table; recorded in dataset headers so chunk
# files are traceable to the table that produced their game replays.
PRODUCTION_SEED = 0x4348_474F_0001
GENERATOR_NAME = "numpy-pcg64"


class PointState:
    """The three states an intersection can be in."""

    empty = 0
    black = 1
    white = 2

    ALL = (empty, black, white)


@dataclass(frozen=True)
class ZobristTable:
    seed: int
    board_size: int
    # shape (3, board_size, board_size), dtype uint64, indexed by PointState
    codes: np.ndarray = field(repr=False)
    empty_board_hash: int = 0

    @property
    def n_codes(self) -> int:
        return self.codes.size

    def code(self, point: Point, state: int) -> int:
        return int(self.codes[state, point.row, point.col])


def build_table(seed: int, board_size: int) -> ZobristTable:
    """Build the code table for a board size, deterministically from seed.

    All codes are pairwise distinct; in the (astronomically unlikely) event
    of a collision the table is regenerated with seed+1, and the retry is
    logged.
    """
    attempt_seed = seed
    while True:
        rng = np.random.Generator(np.random.PCG64(attempt_seed))
        codes = rng.integers(
            0, 2**64, size=(3, board_size, board_size), dtype=np.uint64
        )
        if np.unique(codes).size == codes.size:
            break
        logger.warning(
            "zobrist code collision for seed %d; retrying with seed %d",
            attempt_seed,
            attempt_seed + 1,
        )
        attempt_seed += 1
    empty = int(np.bitwise_xor.reduce(codes[PointState.empty], axis=None))
    return ZobristTable(
        seed=attempt_seed,
        board_size=board_size,
        codes=codes,
        empty_board_hash=empty,
    )


@lru_cache(maxsize=8)
def table_for(board_size: int) -> ZobristTable:
    """The production table for a board size (fixed documented seed)."""
    return build_table(PRODUCTION_SEED, board_size)


def hash_apply(
    h: int, point: Point, from_state: int, to_state: int, table: ZobristTable
) -> int:
    """Update hash h for one intersection changing state.

    XOR is an involution, so applying the reverse transition restores the
    previous hash; capture removal reuses this with the states swapped.
    """
    if from_state == to_state:
        logger.debug("degenerate hash_apply at %s: state %d unchanged", point, from_state)
        return h
    return h ^ table.code(point, from_state) ^ table.code(point, to_state)


def full_hash(grid: dict[Point, int], table: ZobristTable) -> int:
    """Hash a whole position from scratch; grid maps every point to a state.

    Serves as the oracle for the incremental updates.
    """
    h = 0
    for point, state in grid.items():
        h ^= table.code(point, state)
    return h
