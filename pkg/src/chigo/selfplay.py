"""Self-play experience generation and REINFORCE policy-gradient training.

An agent wraps a policy network plus the sampling rule used during play:
cube the network's move probabilities, clamp into (epsilon, 1-epsilon),
renormalize, mask out illegal moves and the mover's own eyes, and sample.
Finished games assign every recorded step the terminal outcome +1/-1 from
the mover's perspective; REINFORCE then pushes parameters up the
G_t * grad ln p(A_t | S_t) direction in mini-batches.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import goboard
from .adadelta import AdadeltaState, adadelta_step
from .encoder import encode, encode_label
from .goboard import GameState, Move, Player
from .gotypes import all_points
from .network import Network
from .stats import binomial_test

logger = logging.getLogger(__name__)

SAMPLER_EPSILON = 0.000001
SAMPLER_EXPONENT = 3


@dataclass(frozen=True)
class SamplerConfig:
    epsilon: float = SAMPLER_EPSILON
    exponent: int = SAMPLER_EXPONENT

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must be in (0, 0.5), got {self.epsilon}")


@dataclass(frozen=True)
class Agent:
    network: Network
    sampler: SamplerConfig = SamplerConfig()
    rng_seed: int = 0
    version: int = 0

    @property
    def params(self) -> dict[str, np.ndarray]:
        return self.network.params

    @property
    def board_size(self) -> int:
        return self.network.config.board_size

    def successor(self, network: Network) -> "Agent":
        return replace(self, network=network, version=self.version + 1)


@dataclass(frozen=True)
class ExperienceStep:
    features: np.ndarray  # (planes, size, size) uint8, mover's view
    action: int  # label index 0..size*size-1
    return_: float  # +1 if the mover won the game, else -1


@dataclass(frozen=True)
class ExperienceGame:
    steps: tuple[ExperienceStep, ...]
    winner: Player
    n_moves: int  # total moves played, passes included


@dataclass(frozen=True)
class ExperienceBuffer:
    games: tuple[ExperienceGame, ...]

    @property
    def total_steps(self) -> int:
        return sum(len(game.steps) for game in self.games)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All steps flattened to (features, actions, returns) arrays."""
        steps = [step for game in self.games for step in game.steps]
        if not steps:
            raise ValueError("empty experience buffer")
        features = np.stack([s.features for s in steps])
        actions = np.asarray([s.action for s in steps], dtype=np.int64)
        returns = np.asarray([s.return_ for s in steps], dtype=np.float64)
        return features, actions, returns


@dataclass(frozen=True)
class EvalReport:
    wins: int
    games: int
    p_value: float

    @property
    def win_rate(self) -> float:
        return self.wins / self.games


def clip_distribution(probs: np.ndarray, config: SamplerConfig) -> np.ndarray:
    """Cube, clamp into (eps, 1-eps), renormalize.

    Cubing sharpens the distribution; the clamp keeps every action's
    probability strictly positive so play never becomes fully greedy.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if not np.all(np.isfinite(probs)):
        raise ValueError("distribution contains non-finite values")
    clipped = np.clip(
        probs**config.exponent, config.epsilon, 1.0 - config.epsilon
    )
    return clipped / clipped.sum()


def playable_mask(state: GameState) -> np.ndarray:
    """1 for each point that is legal to play and not the mover's own eye."""
    size = state.board.size
    mask = np.zeros(size * size, dtype=np.float64)
    mover = state.next_player
    for index, point in enumerate(all_points(size)):
        if state.is_eye(point, mover):
            continue
        if state.illegal_reason(Move.play(point)) is None:
            mask[index] = 1.0
    return mask


def select_move(
    agent: Agent, state: GameState, rng: np.random.Generator
) -> Move:
    """Sample a move from the sharpened, masked policy; Pass as fallback."""
    features = encode(state)
    probs = agent.network.forward(features[None].astype(np.float32))[0]
    sampled = clip_distribution(probs, agent.sampler)
    masked = sampled * playable_mask(state)
    total = masked.sum()
    if total <= 0.0:
        return Move.pass_turn()
    index = int(rng.choice(masked.size, p=masked / total))
    row, col = divmod(index, state.board.size)
    return Move.play(goboard.Point(row=row, col=col))


def _as_generator(rng: np.random.Generator | int) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def self_play_game(
    black: Agent,
    white: Agent,
    rng: np.random.Generator,
    komi: float = goboard.DEFAULT_KOMI,
) -> ExperienceGame:
    """Play one game to completion and label steps with the outcome.

    Each recorded step stores the position as the mover saw it; pass moves
    have no action class and are not recorded.
    """
    if black.board_size != white.board_size:
        raise ValueError("agents disagree on board size")
    state = GameState.new_game(black.board_size)
    movers: list[Player] = []
    raw_steps: list[tuple[np.ndarray, int]] = []
    while not state.is_over():
        agent = black if state.next_player == Player.black else white
        features = encode(state)
        move = select_move(agent, state, rng)
        label = encode_label(move, state.board.size)
        if label is not None:
            raw_steps.append((features, label))
            movers.append(state.next_player)
        state = state.apply_move(move)
    winner = goboard.score(state, komi).winner
    steps = tuple(
        ExperienceStep(
            features=features,
            action=label,
            return_=1.0 if mover == winner else -1.0,
        )
        for (features, label), mover in zip(raw_steps, movers)
    )
    return ExperienceGame(steps=steps, winner=winner, n_moves=state.move_number)


def collect_experience(
    agent: Agent,
    n_games: int = 128,
    rng: np.random.Generator | int = 0,
) -> ExperienceBuffer:
    """Self-play the agent against itself with one rng stream per game.

    Per-game streams make the result independent of any execution order,
    so the same master seed always yields the same buffer.
    """
    if n_games < 1:
        raise ValueError("n_games must be at least 1")
    streams = _as_generator(rng).spawn(n_games)
    games = tuple(
        self_play_game(agent, agent, stream) for stream in streams
    )
    return ExperienceBuffer(games=games)


def reinforce_update(
    network: Network,
    buffer: ExperienceBuffer,
    alpha: float,
    opt: str = "sgd",
    batch_size: int = 128,
    opt_state: AdadeltaState | None = None,
) -> Network:
    """One REINFORCE pass over the buffer, updating the network in place.

    Per mini-batch the gradient at the logits is sum_t G_t * (p - onehot),
    i.e. descent on sum_t -G_t * ln p(A_t|S_t).  In "sgd" mode the step is
    exactly alpha times that sum; "adadelta" reuses the scale-free update.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    if opt not in ("sgd", "adadelta"):
        raise ValueError(f"unknown optimizer mode {opt!r}")
    features, actions, returns = buffer.arrays()
    state = opt_state if opt_state is not None else AdadeltaState()
    for start in range(0, len(actions), batch_size):
        stop = start + batch_size
        _, grads = network.loss_and_gradients(
            features[start:stop],
            actions[start:stop],
            sample_weights=returns[start:stop],
            reduction="sum",
        )
        for name, grad in grads.items():
            if not np.all(np.isfinite(grad)):
                raise ValueError(f"non-finite gradient for {name}")
        if opt == "sgd":
            for name, grad in grads.items():
                network.params[name] -= alpha * grad
        else:
            adadelta_step(network.params, grads, state)
    return network


@dataclass(frozen=True)
class IterationReport:
    version: int
    screening: EvalReport
    confirmation: EvalReport | None


@dataclass(frozen=True)
class RLConfig:
    iterations: int = 20
    alpha: float = 0.001
    games_per_iteration: int = 128
    screening_games: int = 100
    confirmation_games: int = 1000
    batch_size: int = 128
    optimizer: str = "sgd"
    komi: float = goboard.DEFAULT_KOMI


@dataclass(frozen=True)
class RLResult:
    agent: Agent
    reports: tuple[IterationReport, ...]
    final_vs_initial: EvalReport | None


def evaluate_agents(
    a: Agent,
    b: Agent,
    n_games: int,
    rng: np.random.Generator | int = 0,
    komi: float = goboard.DEFAULT_KOMI,
) -> EvalReport:
    """Match a against b, alternating colors; report a's wins + p-value."""
    streams = _as_generator(rng).spawn(n_games)
    wins = 0
    for game_index, stream in enumerate(streams):
        if game_index % 2 == 0:
            game = self_play_game(a, b, stream, komi)
            a_color = Player.black
        else:
            game = self_play_game(b, a, stream, komi)
            a_color = Player.white
        if game.winner == a_color:
            wins += 1
    return EvalReport(
        wins=wins, games=n_games, p_value=binomial_test(wins, n_games)
    )


def run_rl(
    initial: Agent,
    config: RLConfig = RLConfig(),
    rng: np.random.Generator | int = 0,
) -> RLResult:
    """Iterate collect -> update -> screen, confirming promising versions.

    Every iteration produces the next agent version and a 100-game
    screening match against its predecessor; versions that hold a win
    rate of at least 0.5 get a long confirmation match.  After the loop
    the final agent plays a long match against the initial agent.
    """
    master = _as_generator(rng)
    current = initial
    reports: list[IterationReport] = []
    for iteration in range(config.iterations):
        play_rng, eval_rng, confirm_rng = master.spawn(3)
        buffer = collect_experience(
            current, config.games_per_iteration, play_rng
        )
        candidate_net = current.network.copy()
        try:
            reinforce_update(
                candidate_net,
                buffer,
                config.alpha,
                opt=config.optimizer,
                batch_size=config.batch_size,
            )
        except ValueError as exc:
            logger.warning("iteration %d aborted: %s", iteration, exc)
            continue
        candidate = current.successor(candidate_net)
        screening = evaluate_agents(
            candidate, current, config.screening_games, eval_rng, config.komi
        )
        confirmation = None
        if screening.win_rate >= 0.5:
            confirmation = evaluate_agents(
                candidate,
                current,
                config.confirmation_games,
                confirm_rng,
                config.komi,
            )
        reports.append(
            IterationReport(
                version=candidate.version,
                screening=screening,
                confirmation=confirmation,
            )
        )
        current = candidate
    final = None
    if reports:
        final = evaluate_agents(
            current, initial, config.confirmation_games, master, config.komi
        )
    return RLResult(
        agent=current, reports=tuple(reports), final_vs_initial=final
    )


def save_buffer(path: str | Path, buffer: ExperienceBuffer) -> Path:
    """Persist a buffer as a flat .npz bundle plus per-game lengths."""
    features, actions, returns = buffer.arrays()
    lengths = np.asarray(
        [len(game.steps) for game in buffer.games], dtype=np.int64
    )
    winners = np.asarray(
        [game.winner.value for game in buffer.games], dtype=np.int8
    )
    n_moves = np.asarray(
        [game.n_moves for game in buffer.games], dtype=np.int64
    )
    path = Path(path)
    with open(path, "wb") as f:
        np.savez(
            f,
            features=features,
            actions=actions,
            returns=returns,
            lengths=lengths,
            winners=winners,
            n_moves=n_moves,
        )
    return path


def load_buffer(path: str | Path) -> ExperienceBuffer:
    with np.load(path) as data:
        features = data["features"]
        actions = data["actions"]
        returns = data["returns"]
        lengths = data["lengths"]
        winners = data["winners"]
        n_moves = data["n_moves"]
    games = []
    cursor = 0
    for g in range(len(lengths)):
        steps = tuple(
            ExperienceStep(
                features=features[i], action=int(actions[i]), return_=float(returns[i])
            )
            for i in range(cursor, cursor + int(lengths[g]))
        )
        cursor += int(lengths[g])
        games.append(
            ExperienceGame(
                steps=steps,
                winner=Player(int(winners[g])),
                n_moves=int(n_moves[g]),
            )
        )
    return ExperienceBuffer(games=tuple(games))
