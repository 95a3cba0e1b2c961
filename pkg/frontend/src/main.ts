/** Browser bootstrap: fetch the board configuration, render, wire events. */

import { Api } from "./api.js";
import { fromCoords } from "./coords.js";
import { ClientGame } from "./game.js";
import { boardHtml, overPanelHtml, statusLine } from "./view.js";

const api = new Api();
let game: ClientGame | null = null;

function render(): void {
  const app = document.getElementById("app");
  if (app === null) return;
  if (game === null) {
    app.innerHTML =
      `<div class="banner error" role="alert">Server unreachable — ` +
      `start the move service and reload.</div>`;
    return;
  }
  const error =
    game.lastError === null
      ? ""
      : `<div class="banner error" role="alert">${game.lastError}</div>`;
  app.innerHTML =
    `<div class="status" aria-live="polite">${statusLine(game)}</div>` +
    error +
    boardHtml(game) +
    `<div class="controls">` +
    `<button type="button" id="pass">Pass</button>` +
    `<button type="button" id="new-game">New Game</button>` +
    `</div>` +
    overPanelHtml(game);
}

async function startNewGame(): Promise<void> {
  try {
    const config = await api.getConfig();
    game = new ClientGame(config);
  } catch {
    game = null;
  }
  render();
}

function midGame(): boolean {
  return game !== null && game.status !== "over" && game.moves.length > 0;
}

async function onClick(event: Event): Promise<void> {
  const target = event.target as HTMLElement | null;
  if (target === null || game === null) return;
  if (target.id === "new-game" || target.id === "over-new-game") {
    if (midGame() && !window.confirm("Abandon the current game?")) return;
    await startNewGame();
    return;
  }
  if (target.id === "pass") {
    const pending = game.submitPass(api);
    render(); // show the waiting state immediately
    await pending;
    render();
    return;
  }
  const coord = target.getAttribute("data-coord");
  if (coord !== null && game.canPlay(fromCoords(coord))) {
    const pending = game.submitPoint(fromCoords(coord), api);
    render(); // show the stone and the waiting state immediately
    await pending;
    render();
  }
}

document.addEventListener("click", (event) => {
  void onClick(event);
});

void startNewGame();
