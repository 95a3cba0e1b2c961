/** Client game state machine.
 *
 * The human plays Black.  Each submission optimistically applies the move
 * locally, posts the whole move list, then applies the agent's reply; a
 * rejection (illegal move, stale turn) or a network failure rolls the
 * board back to the position before the click.  At most one request is in
 * flight: submissions are ignored unless it is the human's turn.
 */

import { Api, ApiError, ServerConfig } from "./api.js";
import { Point, toCoords } from "./coords.js";
import {
  areaScore,
  EMPTY,
  isOver,
  Position,
  replay,
  Score,
} from "./rules.js";

export type Status = "human-turn" | "waiting" | "over";

export interface GameOver {
  readonly reason: "two-pass" | "resign";
  readonly score: Score | null;
  readonly message: string;
}

export class ClientGame {
  readonly boardSize: number;
  readonly komi: number;
  moves: string[] = [];
  status: Status = "human-turn";
  position: Position;
  lastError: string | null = null;
  over: GameOver | null = null;

  constructor(config: Pick<ServerConfig, "board_size" | "komi">) {
    this.boardSize = config.board_size;
    this.komi = config.komi;
    this.position = replay(this.boardSize, this.moves);
  }

  /** Occupancy pre-check for the UI; the server stays authoritative. */
  canPlay(point: Point): boolean {
    if (this.status !== "human-turn") return false;
    const { size, grid } = this.position;
    if (point.row < 0 || point.row >= size) return false;
    if (point.col < 0 || point.col >= size) return false;
    return grid[point.row * size + point.col] === EMPTY;
  }

  async submitPoint(point: Point, api: Api): Promise<void> {
    if (this.status !== "human-turn") return;
    if (!this.canPlay(point)) {
      this.lastError = `${toCoords(point)} is occupied`;
      return;
    }
    await this.submit(toCoords(point), api);
  }

  async submitPass(api: Api): Promise<void> {
    if (this.status !== "human-turn") return;
    await this.submit("pass", api);
  }

  private async submit(token: string, api: Api): Promise<void> {
    this.lastError = null;
    const before = [...this.moves];
    this.moves.push(token);
    this.position = replay(this.boardSize, this.moves);
    if (isOver(this.position)) {
      // The agent passed last turn and the human passed now; the game
      // ends locally without another request.
      this.finishWithScore();
      return;
    }
    this.status = "waiting";
    try {
      const reply = await api.selectMove(this.boardSize, this.moves);
      if (reply.bot_move === "resign") {
        this.status = "over";
        this.over = {
          reason: "resign",
          score: null,
          message: "White resigns — Black wins",
        };
        return;
      }
      this.moves.push(reply.bot_move);
      this.position = replay(this.boardSize, this.moves);
      if (isOver(this.position)) {
        this.finishWithScore();
      } else {
        this.status = "human-turn";
      }
    } catch (error) {
      this.moves = before;
      this.position = replay(this.boardSize, this.moves);
      this.status = "human-turn";
      if (error instanceof ApiError) {
        this.lastError = `server refused the move: ${error.detail}`;
      } else {
        this.lastError = "network error — check the server and try again";
      }
    }
  }

  private finishWithScore(): void {
    const score = areaScore(this.position, this.komi);
    const winner = score.margin > 0 ? "Black" : "White";
    this.status = "over";
    this.over = {
      reason: "two-pass",
      score,
      message: `${winner} wins: ${score.result}`,
    };
  }
}
