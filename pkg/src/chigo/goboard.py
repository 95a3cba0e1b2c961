"""Go rules engine: stone strings, captures, legality, ko, and area scoring.

States are immutable: ``apply_move`` returns a new ``GameState`` and never
touches its input.  Ko is enforced as positional superko — a play is illegal
if the resulting whole-board position (by Zobrist hash) already occurred
earlier in the game.  Boards are mutated only while being built, before a
``GameState`` takes ownership, so states can share board objects freely.
"""

from __future__ import annotations

from dataclasses import dataclass

from .gotypes import Player, Point, all_points, neighbor_table
from .zobrist import PointState, ZobristTable, table_for

SUPPORTED_BOARD_SIZES = (5, 9, 13, 19)
DEFAULT_KOMI = 7.5

OCCUPIED = "occupied"
SUICIDE = "suicide"
KO = "ko"


class IllegalMoveError(Exception):
    """A move that violates the rules; ``reason`` names the violated rule."""

    def __init__(self, reason: str, move: "Move"):
        super().__init__(f"illegal move {move}: {reason}")
        self.reason = reason
        self.move = move


class Move:
    """A player action: play a stone, pass, or resign."""

    __slots__ = ("point", "is_play", "is_pass", "is_resign")

    def __init__(self, point=None, is_pass=False, is_resign=False):
        assert (point is not None) + is_pass + is_resign == 1
        self.point = point
        self.is_play = point is not None
        self.is_pass = is_pass
        self.is_resign = is_resign

    @classmethod
    def play(cls, point: Point) -> "Move":
        return Move(point=point)

    @classmethod
    def pass_turn(cls) -> "Move":
        return Move(is_pass=True)

    @classmethod
    def resign(cls) -> "Move":
        return Move(is_resign=True)

    def __eq__(self, other):
        return (
            isinstance(other, Move)
            and self.point == other.point
            and self.is_pass == other.is_pass
            and self.is_resign == other.is_resign
        )

    def __hash__(self):
        return hash((self.point, self.is_pass, self.is_resign))

    def __repr__(self):
        if self.is_play:
            return f"Move.play({self.point.row}, {self.point.col})"
        return "Move.pass_turn()" if self.is_pass else "Move.resign()"


class GoString:
    """A maximal chain of same-colored stones and its liberties.

    Immutable: liberty changes produce new strings, which lets boards share
    them across copies without defensive deep copies.
    """

    __slots__ = ("owner", "stones", "liberties")

    def __init__(self, owner: Player, stones, liberties):
        self.owner = owner
        self.stones = frozenset(stones)
        self.liberties = frozenset(liberties)

    @property
    def num_liberties(self) -> int:
        return len(self.liberties)

    def without_liberty(self, point: Point) -> "GoString":
        return GoString(self.owner, self.stones, self.liberties - {point})

    def with_liberty(self, point: Point) -> "GoString":
        return GoString(self.owner, self.stones, self.liberties | {point})

    def merged_with(self, other: "GoString") -> "GoString":
        assert other.owner == self.owner
        stones = self.stones | other.stones
        return GoString(
            self.owner, stones, (self.liberties | other.liberties) - stones
        )

    def __eq__(self, other):
        return (
            isinstance(other, GoString)
            and self.owner == other.owner
            and self.stones == other.stones
            and self.liberties == other.liberties
        )

    def __hash__(self):
        return hash((self.owner, self.stones, self.liberties))


_PLAYER_STATE = {Player.black: PointState.black, Player.white: PointState.white}


class Board:
    """Stone placement and capture bookkeeping with an incremental hash."""

    __slots__ = ("size", "_grid", "_hash", "_table", "_neighbors")

    def __init__(self, size: int, table: ZobristTable | None = None):
        self.size = size
        self._grid: dict[Point, GoString] = {}
        self._table = table if table is not None else table_for(size)
        self._hash = self._table.empty_board_hash
        self._neighbors = neighbor_table(size)

    def copy(self) -> "Board":
        new = Board.__new__(Board)
        new.size = self.size
        new._grid = self._grid.copy()
        new._table = self._table
        new._hash = self._hash
        new._neighbors = self._neighbors
        return new

    def is_on_grid(self, point: Point) -> bool:
        return 0 <= point.row < self.size and 0 <= point.col < self.size

    def get(self, point: Point) -> Player | None:
        string = self._grid.get(point)
        return string.owner if string is not None else None

    def get_string(self, point: Point) -> GoString | None:
        return self._grid.get(point)

    @property
    def zobrist_hash(self) -> int:
        return self._hash

    @property
    def table(self) -> ZobristTable:
        return self._table

    def point_states(self) -> dict[Point, int]:
        """Every point's PointState; the input for full-hash recomputation."""
        states = {}
        for p in all_points(self.size):
            string = self._grid.get(p)
            if string is None:
                states[p] = PointState.empty
            else:
                states[p] = _PLAYER_STATE[string.owner]
        return states

    def place_stone(self, player: Player, point: Point) -> None:
        """Place a stone and remove any opponent strings left without liberties.

        Only for boards not yet owned by a GameState; callers copy first.
        """
        assert self.is_on_grid(point), f"off-board point {point}"
        assert self._grid.get(point) is None, f"point {point} occupied"

        adjacent_same: list[GoString] = []
        adjacent_opposite: list[GoString] = []
        liberties: list[Point] = []
        for n in self._neighbors[point]:
            string = self._grid.get(n)
            if string is None:
                liberties.append(n)
            elif string.owner == player:
                if string not in adjacent_same:
                    adjacent_same.append(string)
            elif string not in adjacent_opposite:
                adjacent_opposite.append(string)

        new_string = GoString(player, [point], liberties)
        for same in adjacent_same:
            new_string = new_string.merged_with(same)
        for stone in new_string.stones:
            self._grid[stone] = new_string

        self._hash ^= self._table.code(point, PointState.empty)
        self._hash ^= self._table.code(point, _PLAYER_STATE[player])

        for other in adjacent_opposite:
            shrunk = other.without_liberty(point)
            if shrunk.num_liberties == 0:
                self._remove_string(shrunk)
            else:
                self._replace_string(shrunk)

    def _replace_string(self, string: GoString) -> None:
        for stone in string.stones:
            self._grid[stone] = string

    def _remove_string(self, string: GoString) -> None:
        state = _PLAYER_STATE[string.owner]
        for stone in string.stones:
            del self._grid[stone]
            self._hash ^= self._table.code(stone, state)
            self._hash ^= self._table.code(stone, PointState.empty)
        # Captured points become liberties of every adjacent string.
        for stone in string.stones:
            gained: list[GoString] = []
            for n in self._neighbors[stone]:
                neighbor = self._grid.get(n)
                if neighbor is not None and neighbor not in gained:
                    gained.append(neighbor)
            for neighbor in gained:
                self._replace_string(neighbor.with_liberty(stone))

    @classmethod
    def from_grid(
        cls,
        size: int,
        stones: dict[Point, Player],
        table: ZobristTable | None = None,
    ) -> "Board":
        """Build a board directly from a stone layout (test positions).

        Raises ValueError if any resulting string would have no liberties.
        """
        board = cls(size, table)
        seen: set[Point] = set()
        for start, owner in stones.items():
            if start in seen:
                continue
            chain = [start]
            members: set[Point] = {start}
            liberties: set[Point] = set()
            while chain:
                p = chain.pop()
                for n in board._neighbors[p]:
                    if n in stones and stones[n] == owner:
                        if n not in members:
                            members.add(n)
                            chain.append(n)
                    elif n not in stones:
                        liberties.add(n)
            if not liberties:
                raise ValueError(f"string at {start} would have no liberties")
            string = GoString(owner, members, liberties)
            for stone in members:
                board._grid[stone] = string
                board._hash ^= board._table.code(stone, PointState.empty)
                board._hash ^= board._table.code(stone, _PLAYER_STATE[owner])
            seen |= members
        return board

    def __eq__(self, other):
        return (
            isinstance(other, Board)
            and self.size == other.size
            and self._hash == other._hash
            and self._grid == other._grid
        )


@dataclass(frozen=True)
class GameResult:
    black_area: int
    white_area: int
    komi: float
    winner: Player

    @property
    def margin(self) -> float:
        return self.black_area - (self.white_area + self.komi)


class GameState:
    """A position plus whose turn it is and the hash history for superko."""

    __slots__ = (
        "board",
        "next_player",
        "previous_hashes",
        "last_move",
        "consecutive_passes",
        "move_number",
    )

    def __init__(
        self,
        board: Board,
        next_player: Player,
        previous_hashes: frozenset[int],
        last_move: Move | None,
        consecutive_passes: int,
        move_number: int,
    ):
        self.board = board
        self.next_player = next_player
        self.previous_hashes = previous_hashes
        self.last_move = last_move
        self.consecutive_passes = consecutive_passes
        self.move_number = move_number

    @classmethod
    def new_game(cls, board_size: int) -> "GameState":
        if board_size not in SUPPORTED_BOARD_SIZES:
            raise ValueError(
                f"unsupported board size {board_size}; "
                f"choose one of {SUPPORTED_BOARD_SIZES}"
            )
        return cls(
            board=Board(board_size),
            next_player=Player.black,
            previous_hashes=frozenset(),
            last_move=None,
            consecutive_passes=0,
            move_number=0,
        )

    @classmethod
    def from_board(cls, board: Board, next_player: Player) -> "GameState":
        """Wrap a hand-built position with empty history (test scenarios)."""
        return cls(
            board=board,
            next_player=next_player,
            previous_hashes=frozenset(),
            last_move=None,
            consecutive_passes=0,
            move_number=0,
        )

    @property
    def board_size(self) -> int:
        return self.board.size

    @property
    def current_hash(self) -> int:
        return self.board.zobrist_hash

    @property
    def move_cap(self) -> int:
        return 2 * self.board.size * self.board.size

    def illegal_reason(self, move: Move) -> str | None:
        """None if legal, else which rule the move violates."""
        if not move.is_play:
            return None
        reason, _ = self._simulate_play(move.point)
        return reason

    def is_legal(self, move: Move) -> bool:
        return self.illegal_reason(move) is None

    def _simulate_play(self, point: Point):
        if not self.board.is_on_grid(point):
            raise ValueError(f"point {point} is off a {self.board.size}x{self.board.size} board")
        if self.board.get(point) is not None:
            return OCCUPIED, None
        candidate = self.board.copy()
        candidate.place_stone(self.next_player, point)
        if candidate.get_string(point).num_liberties == 0:
            return SUICIDE, None
        h = candidate.zobrist_hash
        if h == self.current_hash or h in self.previous_hashes:
            return KO, None
        return None, candidate

    def apply_move(self, move: Move) -> "GameState":
        """Next state after a move; raises IllegalMoveError on a bad play."""
        if move.is_play:
            reason, board = self._simulate_play(move.point)
            if reason is not None:
                raise IllegalMoveError(reason, move)
            passes = 0
        else:
            board = self.board
            passes = self.consecutive_passes + 1 if move.is_pass else 0
        return GameState(
            board=board,
            next_player=self.next_player.other,
            previous_hashes=self.previous_hashes | {self.current_hash},
            last_move=move,
            consecutive_passes=passes,
            move_number=self.move_number + 1,
        )

    def is_over(self) -> bool:
        if self.last_move is not None and self.last_move.is_resign:
            return True
        if self.consecutive_passes >= 2:
            return True
        return self.move_number >= self.move_cap

    def legal_moves(self) -> list[Move]:
        """Legal plays in row-major point order, then Pass."""
        moves = []
        for p in all_points(self.board.size):
            if self.board.get(p) is None:
                move = Move.play(p)
                if self.is_legal(move):
                    moves.append(move)
        moves.append(Move.pass_turn())
        return moves

    def liberties_of(self, point: Point) -> int:
        string = self.board.get_string(point)
        if string is None:
            raise ValueError(f"no stone at {point}")
        return string.num_liberties

    def is_eye(self, point: Point, owner: Player) -> bool:
        """Conservative eye shape: all neighbors owned, diagonals controlled.

        Interior points need at least 3 of 4 diagonals owned; on the edge or
        in a corner, every on-board diagonal must be owned.
        """
        if self.board.get(point) is not None:
            return False
        neighbors = neighbor_table(self.board.size)[point]
        for n in neighbors:
            if self.board.get(n) != owner:
                return False
        if not neighbors:
            return False
        on_board = [d for d in point.diagonals() if self.board.is_on_grid(d)]
        friendly = sum(1 for d in on_board if self.board.get(d) == owner)
        if len(on_board) < 4:
            return friendly == len(on_board)
        return friendly >= 3


def score(state: GameState, komi: float = DEFAULT_KOMI) -> GameResult:
    """Area scoring: own stones plus empty regions bordering only one color.

    A resignation decides the winner regardless of the area count.
    """
    board = state.board
    neighbors = neighbor_table(board.size)
    black_area = 0
    white_area = 0
    visited: set[Point] = set()
    for p in all_points(board.size):
        owner = board.get(p)
        if owner == Player.black:
            black_area += 1
        elif owner == Player.white:
            white_area += 1
        elif p not in visited:
            region = [p]
            members = {p}
            borders: set[Player] = set()
            while region:
                q = region.pop()
                for n in neighbors[q]:
                    who = board.get(n)
                    if who is None:
                        if n not in members:
                            members.add(n)
                            region.append(n)
                    else:
                        borders.add(who)
            visited |= members
            if borders == {Player.black}:
                black_area += len(members)
            elif borders == {Player.white}:
                white_area += len(members)

    if state.last_move is not None and state.last_move.is_resign:
        winner = state.next_player
    else:
        winner = (
            Player.black if black_area > white_area + komi else Player.white
        )
    return GameResult(
        black_area=black_area, white_area=white_area, komi=komi, winner=winner
    )
