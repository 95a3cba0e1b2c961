/** Board coordinates in the letter-number convention ("D16").
 *
 * Columns run A..T left to right with I skipped; rows are numbered from
 * 1 at the bottom.  Point {row: 0, col: 0} is therefore "A1" and
 * {row: 15, col: 3} is "D16".
 */

export const COLUMN_LETTERS = "ABCDEFGHJKLMNOPQRST";

export interface Point {
  readonly row: number;
  readonly col: number;
}

export function toCoords(point: Point): string {
  const letter = COLUMN_LETTERS[point.col];
  if (letter === undefined || point.row < 0 || point.row >= 19) {
    throw new Error(`point off the board: ${point.row},${point.col}`);
  }
  return `${letter}${point.row + 1}`;
}

export function fromCoords(text: string): Point {
  const match = /^([A-HJ-T])([1-9]|1[0-9])$/.exec(text);
  if (match === null) {
    throw new Error(`not a coordinate: ${text}`);
  }
  return {
    row: Number(match[2]) - 1,
    col: COLUMN_LETTERS.indexOf(match[1]),
  };
}

export function isCoord(text: string): boolean {
  return /^([A-HJ-T])([1-9]|1[0-9])$/.test(text);
}
