"""Human-readable board coordinates ("D16" style) for logs and the API.

Columns run A-T left to right with I skipped; rows run 1-19 with row 1 at
the bottom, so "D16" maps to Point(row=15, col=3).
"""

from __future__ import annotations

import re

from .gotypes import Point

COLUMN_LETTERS = "ABCDEFGHJKLMNOPQRST"

_COORD_RE = re.compile(r"^([A-HJ-T])(1[0-9]|[1-9])$")


def to_coords(point: Point) -> str:
    if not (0 <= point.col < len(COLUMN_LETTERS)) or not 0 <= point.row <= 18:
        raise ValueError(f"point off the supported grid: {point}")
    return f"{COLUMN_LETTERS[point.col]}{point.row + 1}"


def from_coords(text: str) -> Point:
    m = _COORD_RE.match(text)
    if m is None:
        raise ValueError(f"bad coordinate: {text!r}")
    col = COLUMN_LETTERS.index(m.group(1))
    row = int(m.group(2)) - 1
    return Point(row=row, col=col)


def is_coord(text: str) -> bool:
    return _COORD_RE.match(text) is not None
