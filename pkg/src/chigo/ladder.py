"""Ladder reading: can a string in atari run to safety?

``is_ladder_escape`` simulates the defender playing the candidate point and
then an alternating chase: the attacker fills the chased string's liberties
(branching over ties), the defender extends or counter-captures adjacent
attacker stones in atari.  The defender escapes when the string reaches 3+
liberties; the chase fails if the string is captured or the ply limit
(board_size**2) runs out first.
"""

from __future__ import annotations

from .goboard import GameState, GoString, Move
from .gotypes import Player, Point, neighbor_table


def _atari_targets(state: GameState, candidate: Point, defender: Player):
    """Defender strings in atari whose last liberty adjoins the candidate."""
    targets = []
    for n in neighbor_table(state.board.size)[candidate]:
        string = state.board.get_string(n)
        if (
            string is not None
            and string.owner == defender
            and string.num_liberties == 1
            and candidate in string.liberties
            and string not in targets
        ):
            targets.append(string)
    return targets


def is_ladder_escape(
    state: GameState, candidate: Point, defender: Player
) -> bool:
    """True iff playing the candidate rescues a defender string in atari.

    Returns False (not an error) when the candidate is occupied or no
    defender string is in atari next to it.
    """
    if not state.board.is_on_grid(candidate):
        return False
    if state.board.get(candidate) is not None:
        return False
    if not _atari_targets(state, candidate, defender):
        return False

    sim = state
    if sim.next_player != defender:
        sim = GameState(
            board=state.board,
            next_player=defender,
            previous_hashes=state.previous_hashes,
            last_move=state.last_move,
            consecutive_passes=0,
            move_number=state.move_number,
        )
    move = Move.play(candidate)
    if not sim.is_legal(move):
        return False
    after = sim.apply_move(move)
    limit = state.board.size * state.board.size
    return _attacker_to_move(after, candidate, limit)


def _string_status(state: GameState, stone: Point) -> GoString | None:
    return state.board.get_string(stone)


def _attacker_to_move(state: GameState, stone: Point, depth: int) -> bool:
    string = _string_status(state, stone)
    if string is None:
        return False
    if string.num_liberties >= 3:
        return True
    if depth <= 0:
        return False

    # The chase continues only through the string's remaining liberties;
    # order by how few liberties the defender keeps, tightest first.
    children = []
    for lib in string.liberties:
        move = Move.play(lib)
        if state.is_legal(move):
            child = state.apply_move(move)
            chased = _string_status(child, stone)
            remaining = 0 if chased is None else chased.num_liberties
            children.append((remaining, lib, child))
    if not children:
        return True
    children.sort(key=lambda item: (item[0], item[1]))
    return all(
        _defender_to_move(child, stone, depth - 1) for _, _, child in children
    )


def _defender_to_move(state: GameState, stone: Point, depth: int) -> bool:
    string = _string_status(state, stone)
    if string is None:
        return False
    if string.num_liberties >= 3:
        return True
    if depth <= 0:
        return False

    neighbors = neighbor_table(state.board.size)
    candidates: list[Point] = []
    for lib in string.liberties:
        candidates.append(lib)
    # Counter-capture: taking an adjacent attacker string in atari can free
    # the chased string (including snapback-style rescues).
    for member in string.stones:
        for n in neighbors[member]:
            enemy = state.board.get_string(n)
            if (
                enemy is not None
                and enemy.owner != string.owner
                and enemy.num_liberties == 1
            ):
                lib = next(iter(enemy.liberties))
                if lib not in candidates:
                    candidates.append(lib)

    best_first = sorted(
        candidates,
        key=lambda p: -_liberties_if_played(state, p, stone),
    )
    for point in best_first:
        move = Move.play(point)
        if not state.is_legal(move):
            continue
        child = state.apply_move(move)
        if _attacker_to_move(child, stone, depth - 1):
            return True
    return False


def _liberties_if_played(state: GameState, point: Point, stone: Point) -> int:
    move = Move.play(point)
    if not state.is_legal(move):
        return -1
    child = state.apply_move(move)
    string = child.board.get_string(stone)
    return 0 if string is None else string.num_liberties
