/** Typed wrappers for the two server endpoints the client may use. */

export interface ServerConfig {
  board_size: number;
  komi: number;
  rules: string;
  human: string;
  model_version: string;
}

export interface MoveReply {
  bot_move: string;
  move_number: number;
  diagnostics?: { top5: { move: string; prob: number }[] };
}

/** A non-2xx reply, carrying the server's structured error body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly error: string,
    readonly detail: string,
    readonly index?: number
  ) {
    super(`${status} ${error}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api {
  constructor(private readonly fetchFn: FetchLike = fetch.bind(globalThis)) {}

  async getConfig(): Promise<ServerConfig> {
    const response = await this.fetchFn("/api/config");
    if (!response.ok) {
      throw new ApiError(response.status, "bad_config", "config unavailable");
    }
    return (await response.json()) as ServerConfig;
  }

  async selectMove(boardSize: number, moves: readonly string[]): Promise<MoveReply> {
    const response = await this.fetchFn("/api/select-move", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ board_size: boardSize, moves }),
    });
    if (!response.ok) {
      let body: { error?: string; detail?: string; index?: number } = {};
      try {
        body = await response.json();
      } catch {
        // fall through with the generic fields
      }
      throw new ApiError(
        response.status,
        body.error ?? "error",
        body.detail ?? response.statusText,
        body.index
      );
    }
    return (await response.json()) as MoveReply;
  }
}
