/** Local rules mirror: just enough Go to redraw what the server did.
 *
 * The client replays the shared move list so captures appear instantly
 * without waiting for another round trip.  The server stays authoritative
 * for legality; this mirror only needs to agree with it on the board
 * picture (stone placement, capture removal) and on area scoring for the
 * game-over screen.
 */

import { fromCoords, Point } from "./coords.js";

export const EMPTY = 0;
export const BLACK = 1;
export const WHITE = 2;
export type Stone = typeof EMPTY | typeof BLACK | typeof WHITE;

export interface Position {
  readonly size: number;
  /** Row-major board, index row * size + col. */
  readonly grid: Uint8Array;
  /** Stone to be placed next: BLACK or WHITE. */
  readonly toMove: Stone;
  /** Board point of the most recent non-pass move, if any. */
  readonly lastPoint: Point | null;
  readonly consecutivePasses: number;
  readonly moveCount: number;
}

export function emptyPosition(size: number): Position {
  return {
    size,
    grid: new Uint8Array(size * size),
    toMove: BLACK,
    lastPoint: null,
    consecutivePasses: 0,
    moveCount: 0,
  };
}

function neighbors(size: number, index: number): number[] {
  const row = Math.floor(index / size);
  const col = index % size;
  const out: number[] = [];
  if (row > 0) out.push(index - size);
  if (row < size - 1) out.push(index + size);
  if (col > 0) out.push(index - 1);
  if (col < size - 1) out.push(index + 1);
  return out;
}

/** Indices of the string through `start` and whether it has a liberty. */
function chain(
  grid: Uint8Array,
  size: number,
  start: number
): { stones: number[]; hasLiberty: boolean } {
  const color = grid[start];
  const seen = new Set<number>([start]);
  const queue = [start];
  let hasLiberty = false;
  while (queue.length > 0) {
    const index = queue.pop() as number;
    for (const next of neighbors(size, index)) {
      if (grid[next] === EMPTY) {
        hasLiberty = true;
      } else if (grid[next] === color && !seen.has(next)) {
        seen.add(next);
        queue.push(next);
      }
    }
  }
  return { stones: [...seen], hasLiberty };
}

/** Place a stone, removing any opponent strings left without liberties. */
export function applyPlay(position: Position, point: Point): Position {
  const { size, toMove } = position;
  const index = point.row * size + point.col;
  if (position.grid[index] !== EMPTY) {
    throw new Error(`point occupied: ${point.row},${point.col}`);
  }
  const grid = position.grid.slice();
  grid[index] = toMove;
  const enemy = toMove === BLACK ? WHITE : BLACK;
  for (const next of neighbors(size, index)) {
    if (grid[next] === enemy) {
      const { stones, hasLiberty } = chain(grid, size, next);
      if (!hasLiberty) {
        for (const stone of stones) grid[stone] = EMPTY;
      }
    }
  }
  return {
    size,
    grid,
    toMove: enemy,
    lastPoint: point,
    consecutivePasses: 0,
    moveCount: position.moveCount + 1,
  };
}

export function applyPass(position: Position): Position {
  return {
    ...position,
    toMove: position.toMove === BLACK ? WHITE : BLACK,
    lastPoint: null,
    consecutivePasses: position.consecutivePasses + 1,
    moveCount: position.moveCount + 1,
  };
}

/** Replay a shared move list ("D16" or "pass") from the empty board. */
export function replay(size: number, moves: readonly string[]): Position {
  let position = emptyPosition(size);
  for (const token of moves) {
    position =
      token === "pass"
        ? applyPass(position)
        : applyPlay(position, fromCoords(token));
  }
  return position;
}

export function isOver(position: Position): boolean {
  return (
    position.consecutivePasses >= 2 ||
    position.moveCount >= 2 * position.size * position.size
  );
}

export interface Score {
  readonly blackArea: number;
  readonly whiteArea: number;
  /** Positive when Black leads after komi. */
  readonly margin: number;
  /** Result in the usual notation, e.g. "W+5.5". */
  readonly result: string;
}

/** Area scoring: stones plus empty regions touching only one color. */
export function areaScore(position: Position, komi: number): Score {
  const { size, grid } = position;
  let blackArea = 0;
  let whiteArea = 0;
  const visited = new Uint8Array(grid.length);
  for (let index = 0; index < grid.length; index += 1) {
    if (grid[index] === BLACK) blackArea += 1;
    else if (grid[index] === WHITE) whiteArea += 1;
    else if (!visited[index]) {
      const region: number[] = [index];
      const queue = [index];
      visited[index] = 1;
      let touchesBlack = false;
      let touchesWhite = false;
      while (queue.length > 0) {
        const at = queue.pop() as number;
        for (const next of neighbors(size, at)) {
          if (grid[next] === BLACK) touchesBlack = true;
          else if (grid[next] === WHITE) touchesWhite = true;
          else if (!visited[next]) {
            visited[next] = 1;
            region.push(next);
            queue.push(next);
          }
        }
      }
      if (touchesBlack && !touchesWhite) blackArea += region.length;
      else if (touchesWhite && !touchesBlack) whiteArea += region.length;
    }
  }
  const margin = blackArea - whiteArea - komi;
  const winner = margin > 0 ? "B" : "W";
  return {
    blackArea,
    whiteArea,
    margin,
    result: `${winner}+${Math.abs(margin)}`,
  };
}
