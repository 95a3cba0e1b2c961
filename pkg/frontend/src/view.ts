/** Pure view building: game state in, HTML strings out.
 *
 * Keeping the markup generation free of document access makes the whole
 * presentation testable without a browser; main.ts only assigns the
 * produced strings and wires events.
 */

import { COLUMN_LETTERS, Point, toCoords } from "./coords.js";
import { ClientGame } from "./game.js";
import { BLACK, WHITE } from "./rules.js";

/** Hoshi rows/columns for each supported board width. */
export function starLines(size: number): number[] {
  switch (size) {
    case 19:
      return [3, 9, 15];
    case 13:
      return [3, 6, 9];
    case 9:
      return [2, 4, 6];
    default:
      return size % 2 === 1 ? [(size - 1) / 2] : [];
  }
}

export function isStarPoint(size: number, point: Point): boolean {
  const lines = starLines(size);
  return lines.includes(point.row) && lines.includes(point.col);
}

function cellHtml(game: ClientGame, point: Point): string {
  const { size, grid, lastPoint } = game.position;
  const coord = toCoords(point);
  const stone = grid[point.row * size + point.col];
  const classes = ["cell"];
  let occupant = "empty";
  if (stone === BLACK) {
    classes.push("stone-black");
    occupant = "black stone";
  } else if (stone === WHITE) {
    classes.push("stone-white");
    occupant = "white stone";
  }
  if (isStarPoint(size, point)) classes.push("star");
  if (
    lastPoint !== null &&
    lastPoint.row === point.row &&
    lastPoint.col === point.col
  ) {
    classes.push("last-move");
  }
  const disabled = game.status !== "human-turn" ? " disabled" : "";
  return (
    `<button type="button" class="${classes.join(" ")}"` +
    ` data-coord="${coord}" aria-label="${coord}: ${occupant}"${disabled}>` +
    `</button>`
  );
}

/** The goban with coordinate labels, top row (highest number) first. */
export function boardHtml(game: ClientGame): string {
  const size = game.position.size;
  const letters = [...COLUMN_LETTERS.slice(0, size)];
  const header =
    `<div class="label corner"></div>` +
    letters.map((l) => `<div class="label">${l}</div>`).join("") +
    `<div class="label corner"></div>`;
  const rows: string[] = [header];
  for (let row = size - 1; row >= 0; row -= 1) {
    const cells: string[] = [`<div class="label">${row + 1}</div>`];
    for (let col = 0; col < size; col += 1) {
      cells.push(cellHtml(game, { row, col }));
    }
    cells.push(`<div class="label">${row + 1}</div>`);
    rows.push(cells.join(""));
  }
  rows.push(header);
  return `<div class="goban" style="--size:${size}" role="grid">${rows.join(
    ""
  )}</div>`;
}

export function statusLine(game: ClientGame): string {
  switch (game.status) {
    case "human-turn":
      return "Your move (Black)";
    case "waiting":
      return "White is thinking…";
    case "over":
      return game.over?.message ?? "Game over";
  }
}

export function overPanelHtml(game: ClientGame): string {
  if (game.over === null) return "";
  const { score, message } = game.over;
  const detail =
    score === null
      ? ""
      : `<p class="score">Black ${score.blackArea} — White ` +
        `${score.whiteArea} (komi ${game.komi})</p>`;
  return (
    `<div class="over-panel" role="dialog" aria-label="game over">` +
    `<h2>${message}</h2>${detail}` +
    `<button type="button" id="over-new-game">New Game</button></div>`
  );
}
