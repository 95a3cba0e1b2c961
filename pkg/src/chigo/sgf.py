"""SGF game-record parsing, serialization, and replay into board states.

Covers the subset KGS archives actually use: GM, SZ, RE, HA, KM plus B/W
move properties; unknown properties are ignored and only the main line of
a game tree is read.  Move letters index from 'a' = 0, column first, so
``B[dd]`` plays Point(row=3, col=3).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .goboard import GameState, IllegalMoveError, Move
from .gotypes import Player, Point

MAX_BOARD_SIZE = 19


class SgfParseError(ValueError):
    """Malformed SGF; carries the byte offset where parsing failed."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class ReplayTruncated(UserWarning):
    """Replay stopped early; carries the index of the offending move."""

    def __init__(self, message: str, move_index: int):
        super().__init__(message)
        self.move_index = move_index


@dataclass
class GameRecord:
    board_size: int = 19
    moves: list[tuple[Player, Move]] = field(default_factory=list)
    result: str | None = None
    handicap: int = 0
    komi: float | None = None
    source_id: str = ""


# ---------------------------------------------------------------------------
# Parsing

class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> SgfParseError:
        return SgfParseError(message, self.pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str | None:
        self.skip_ws()
        if self.pos >= len(self.text):
            return None
        return self.text[self.pos]

    def expect(self, ch: str) -> None:
        got = self.peek()
        if got != ch:
            raise self.error(f"expected {ch!r}, found {got!r}")
        self.pos += 1

    def read_prop_ident(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        if self.pos == start:
            raise self.error("expected property identifier")
        return self.text[start:self.pos].upper()

    def read_prop_value(self) -> str:
        self.expect("[")
        out = []
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated property value")
            ch = self.text[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    raise self.error("dangling escape")
                out.append(self.text[self.pos + 1])
                self.pos += 2
            elif ch == "]":
                self.pos += 1
                return "".join(out)
            else:
                out.append(ch)
                self.pos += 1


def _parse_node(scanner: _Scanner) -> dict[str, list[str]]:
    props: dict[str, list[str]] = {}
    while True:
        ch = scanner.peek()
        if ch is None or not ch.isalpha():
            return props
        ident = scanner.read_prop_ident()
        values = []
        while scanner.peek() == "[":
            values.append(scanner.read_prop_value())
        if not values:
            raise scanner.error(f"property {ident} has no value")
        props.setdefault(ident, []).extend(values)


def _parse_tree(scanner: _Scanner) -> list[dict[str, list[str]]]:
    """Parse one game tree, returning the main-line nodes only."""
    scanner.expect("(")
    nodes: list[dict[str, list[str]]] = []
    while scanner.peek() == ";":
        scanner.pos += 1
        nodes.append(_parse_node(scanner))
    if not nodes:
        raise scanner.error("empty game tree")
    first_child = True
    while scanner.peek() == "(":
        subtree = _parse_tree(scanner)
        if first_child:
            nodes.extend(subtree)  # variations after the first are ignored
            first_child = False
    scanner.expect(")")
    return nodes


def _parse_move_value(value: str, board_size: int, scanner_pos: int) -> Move:
    if value == "" or (value == "tt" and board_size <= 19):
        return Move.pass_turn()
    if len(value) != 2:
        raise SgfParseError(f"bad move value {value!r}", scanner_pos)
    col = ord(value[0]) - ord("a")
    row = ord(value[1]) - ord("a")
    if not (0 <= col < board_size and 0 <= row < board_size):
        raise SgfParseError(f"move {value!r} off the board", scanner_pos)
    return Move.play(Point(row=row, col=col))


def parse_sgf(text: str, source_id: str = "") -> GameRecord:
    """Parse one SGF game into a record of its main-line moves."""
    scanner = _Scanner(text)
    if scanner.peek() is None:
        raise scanner.error("empty input")
    nodes = _parse_tree(scanner)
    if scanner.peek() is not None:
        raise scanner.error("trailing content after game tree")

    record = GameRecord(source_id=source_id)
    root = nodes[0]
    if "SZ" in root:
        try:
            record.board_size = int(root["SZ"][0])
        except ValueError:
            raise SgfParseError(f"bad SZ value {root['SZ'][0]!r}", 0) from None
        if record.board_size > MAX_BOARD_SIZE or record.board_size < 1:
            raise SgfParseError(
                f"unsupported board size {record.board_size}", 0
            )
    if "RE" in root:
        record.result = root["RE"][0]
    if "HA" in root:
        try:
            record.handicap = int(root["HA"][0])
        except ValueError:
            record.handicap = 0
    if "KM" in root:
        try:
            record.komi = float(root["KM"][0])
        except ValueError:
            record.komi = None

    for node in nodes:
        for ident, player in (("B", Player.black), ("W", Player.white)):
            if ident in node:
                move = _parse_move_value(
                    node[ident][0], record.board_size, scanner.pos
                )
                record.moves.append((player, move))
    return record


# ---------------------------------------------------------------------------
# Serialization

def _move_value(move: Move) -> str:
    if move.is_pass:
        return ""
    return chr(ord("a") + move.point.col) + chr(ord("a") + move.point.row)


def serialize_sgf(record: GameRecord) -> str:
    """Render a record back to SGF text (inverse of parse_sgf)."""
    head = f"(;GM[1]FF[4]SZ[{record.board_size}]"
    if record.handicap:
        head += f"HA[{record.handicap}]"
    if record.komi is not None:
        head += f"KM[{record.komi:g}]"
    if record.result is not None:
        head += f"RE[{record.result}]"
    parts = [head]
    for player, move in record.moves:
        ident = "B" if player == Player.black else "W"
        parts.append(f";{ident}[{_move_value(move)}]")
    parts.append(")")
    return "".join(parts)


# ---------------------------------------------------------------------------
# Replay

def replay(record: GameRecord) -> list[tuple[GameState, Move]]:
    """Turn a record into (state before move, move) pairs.

    Stops with a ReplayTruncated warning at the first illegal or
    out-of-turn move; everything before it is still returned.
    """
    state = GameState.new_game(record.board_size)
    pairs: list[tuple[GameState, Move]] = []
    for index, (player, move) in enumerate(record.moves):
        if player != state.next_player:
            warnings.warn(
                ReplayTruncated(
                    f"move {index} out of turn in {record.source_id or 'record'}",
                    index,
                )
            )
            break
        try:
            next_state = state.apply_move(move)
        except IllegalMoveError as exc:
            warnings.warn(
                ReplayTruncated(
                    f"move {index} illegal ({exc.reason}) in "
                    f"{record.source_id or 'record'}",
                    index,
                )
            )
            break
        pairs.append((state, move))
        state = next_state
    return pairs
