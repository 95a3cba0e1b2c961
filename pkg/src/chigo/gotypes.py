"""Core board types: players and points."""

from __future__ import annotations

import enum
from collections import namedtuple
from functools import lru_cache


class Player(enum.Enum):
    black = 1
    white = 2

    @property
    def other(self) -> "Player":
        return Player.black if self == Player.white else Player.white


class Point(namedtuple("Point", "row col")):
    """Zero-indexed board intersection; row 0 is the bottom edge."""

    def neighbors(self):
        return [
            Point(self.row - 1, self.col),
            Point(self.row + 1, self.col),
            Point(self.row, self.col - 1),
            Point(self.row, self.col + 1),
        ]

    def diagonals(self):
        return [
            Point(self.row - 1, self.col - 1),
            Point(self.row - 1, self.col + 1),
            Point(self.row + 1, self.col - 1),
            Point(self.row + 1, self.col + 1),
        ]

    __slots__ = ()


@lru_cache(maxsize=8)
def all_points(board_size: int) -> tuple[Point, ...]:
    """Every point on the board in row-major order."""
    return tuple(
        Point(r, c) for r in range(board_size) for c in range(board_size)
    )


@lru_cache(maxsize=8)
def neighbor_table(board_size: int) -> dict[Point, tuple[Point, ...]]:
    """On-board orthogonal neighbors for every point, precomputed."""
    table = {}
    for p in all_points(board_size):
        table[p] = tuple(
            n
            for n in p.neighbors()
            if 0 <= n.row < board_size and 0 <= n.col < board_size
        )
    return table
