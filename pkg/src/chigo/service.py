"""Stateless HTTP move-selection service.

Every request carries the full move history of its game; the server
replays it, asks the serving agent for a reply, and forgets everything.
The per-request rng is derived from a hash of the move list, so replaying
the same position always yields the same answer while different games
still see varied play.

Privacy: request bodies are never logged or stored; access logging is
limited to method, path, status, and timing.
"""

from __future__ import annotations

import hashlib
import logging
import time

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import coords, goboard
from .encoder import encode
from .goboard import GameState, IllegalMoveError, Move, Player
from .selfplay import Agent, select_move

logger = logging.getLogger(__name__)

RESIGN_DEFICIT = 50.0


class MoveRequest(BaseModel):
    board_size: int
    moves: list[str]


class HistoryError(Exception):
    """A move list that does not replay into a legal game."""

    def __init__(self, index: int, reason: str):
        super().__init__(f"move {index}: {reason}")
        self.index = index
        self.reason = reason


def reconstruct_state(board_size: int, moves: list[str]) -> GameState:
    """Replay a coordinate list from the empty board, Black first."""
    state = GameState.new_game(board_size)
    for index, token in enumerate(moves):
        if token == "pass":
            move = Move.pass_turn()
        else:
            point = coords.from_coords(token)
            if point.row >= board_size or point.col >= board_size:
                raise HistoryError(index, f"{token} is off a {board_size}-line board")
            move = Move.play(point)
        try:
            state = state.apply_move(move)
        except IllegalMoveError as exc:
            raise HistoryError(index, exc.reason) from exc
    return state


def request_rng(moves: list[str]) -> np.random.Generator:
    """Deterministic rng for one request, keyed by the move history."""
    digest = hashlib.sha256("\n".join(moves).encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _top_candidates(agent: Agent, state: GameState, n: int = 5) -> list[dict]:
    features = encode(state)
    probs = agent.network.forward(features[None].astype(np.float32))[0]
    order = np.argsort(probs)[::-1][:n]
    size = state.board.size
    out = []
    for index in order:
        row, col = divmod(int(index), size)
        out.append(
            {
                "move": coords.to_coords(goboard.Point(row=row, col=col)),
                "prob": float(probs[index]),
            }
        )
    return out


def create_app(
    agent: Agent,
    model_version: str = "0",
    resign_deficit: float = RESIGN_DEFICIT,
    komi: float = goboard.DEFAULT_KOMI,
    static_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="chigo", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": "bad_request", "detail": "malformed request body"},
        )

    @app.middleware("http")
    async def access_log(request: Request, call_next):
        started = time.monotonic()
        response = await call_next(request)
        elapsed_ms = (time.monotonic() - started) * 1000.0
        logger.info(
            "%s %s status=%d duration_ms=%.1f",
            request.method,
            request.url.path,
            response.status_code,
            elapsed_ms,
        )
        return response

    @app.get("/api/config")
    async def get_config():
        return {
            "board_size": agent.board_size,
            "komi": komi,
            "rules": "chinese",
            "human": "black",
            "model_version": model_version,
        }

    @app.post("/api/select-move")
    async def post_select_move(body: MoveRequest):
        if body.board_size != agent.board_size:
            return JSONResponse(
                status_code=400,
                content={
                    "error": "bad_request",
                    "detail": f"served board size is {agent.board_size}",
                },
            )
        for index, token in enumerate(body.moves):
            if token != "pass" and not coords.is_coord(token):
                return JSONResponse(
                    status_code=400,
                    content={
                        "error": "bad_request",
                        "detail": f"move {index} is not a coordinate or pass",
                    },
                )
        try:
            state = reconstruct_state(body.board_size, body.moves)
        except HistoryError as exc:
            return JSONResponse(
                status_code=422,
                content={
                    "error": "illegal_move",
                    "index": exc.index,
                    "detail": exc.reason,
                },
            )
        if state.is_over():
            return JSONResponse(
                status_code=409,
                content={"error": "game_over", "detail": "the game has ended"},
            )
        if state.next_player != Player.white:
            return JSONResponse(
                status_code=409,
                content={
                    "error": "not_your_turn",
                    "detail": "the agent plays White; Black must move first",
                },
            )
        diagnostics = {"top5": _top_candidates(agent, state)}
        move = select_move(agent, state, request_rng(body.moves))
        if move.is_pass:
            result = goboard.score(state, komi)
            if result.winner == Player.black and result.margin > resign_deficit:
                return {
                    "bot_move": "resign",
                    "move_number": len(body.moves) + 1,
                    "diagnostics": diagnostics,
                }
        bot_move = "pass" if move.is_pass else coords.to_coords(move.point)
        return {
            "bot_move": bot_move,
            "move_number": len(body.moves) + 1,
            "diagnostics": diagnostics,
        }

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True))
    return app
