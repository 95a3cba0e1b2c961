"""Board-to-tensor encoding: 11 binary feature planes plus move labels.

Plane order is a frozen contract shared with the dataset format and the
network input layer:

    0-3   black stones bucketed by string liberties (1, 2, 3, >=4)
    4-7   white stones bucketed the same way
    8     all ones iff Black is to move
    9     empty points where the mover has a working ladder escape
    10    empty points forbidden only by the ko/superko rule
"""

from __future__ import annotations

import numpy as np

from .goboard import KO, GameState, Move
from .gotypes import Player, Point, all_points
from .ladder import is_ladder_escape

NUM_PLANES = 11
PLANE_BLACK_LIBERTIES = 0
PLANE_WHITE_LIBERTIES = 4
PLANE_TO_MOVE = 8
PLANE_LADDER_ESCAPE = 9
PLANE_KO = 10


def encode(state: GameState) -> np.ndarray:
    """Encode a position as uint8 planes of shape (11, size, size)."""
    size = state.board.size
    planes = np.zeros((NUM_PLANES, size, size), dtype=np.uint8)

    seen: set[Point] = set()
    for p in all_points(size):
        if p in seen:
            continue
        string = state.board.get_string(p)
        if string is None:
            continue
        seen |= string.stones
        bucket = min(string.num_liberties, 4) - 1
        base = (
            PLANE_BLACK_LIBERTIES
            if string.owner == Player.black
            else PLANE_WHITE_LIBERTIES
        )
        plane = planes[base + bucket]
        for stone in string.stones:
            plane[stone.row, stone.col] = 1

    if state.next_player == Player.black:
        planes[PLANE_TO_MOVE] = 1

    for p in all_points(size):
        if state.board.get(p) is not None:
            continue
        if is_ladder_escape(state, p, state.next_player):
            planes[PLANE_LADDER_ESCAPE, p.row, p.col] = 1
        if state.illegal_reason(Move.play(p)) == KO:
            planes[PLANE_KO, p.row, p.col] = 1

    return planes


def encode_label(move: Move, board_size: int = 19) -> int | None:
    """Class index of a play, or None for pass/resign (no label exists)."""
    if not move.is_play:
        return None
    return move.point.row * board_size + move.point.col


def decode_label(index: int, board_size: int = 19) -> Move:
    if not 0 <= index < board_size * board_size:
        raise ValueError(
            f"label {index} out of range for board size {board_size}"
        )
    return Move.play(Point(index // board_size, index % board_size))
