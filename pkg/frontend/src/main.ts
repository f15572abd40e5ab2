// Entry point: socket -> reducer -> renderers, plus the control panel.

import { measuresForClick, renderCircleMan, renderScore } from "./render.js";
import { TutorSocket, defaultUrl } from "./socket.js";
import { ViewState, applyEvent, initialState } from "./state.js";
import type { CommandName } from "./types.js";

let state: ViewState = initialState();
let connected = false;

const scoreCanvas = document.getElementById("score") as HTMLCanvasElement;
const circleCanvas = document.getElementById("circle-man") as HTMLCanvasElement;
const banner = document.getElementById("banner") as HTMLDivElement;
const toast = document.getElementById("toast") as HTMLDivElement;
const status = document.getElementById("status") as HTMLDivElement;

const socket = new TutorSocket(defaultUrl(), {
  onEvent: (event) => {
    state = applyEvent(state, event);
    scheduleRender();
  },
  onConnection: (up) => {
    connected = up;
    // on a drop the view freezes as-is and the banner appears
    banner.style.display = up ? "none" : "block";
  },
});

let renderQueued = false;
function scheduleRender(): void {
  if (renderQueued) return;
  renderQueued = true;
  requestAnimationFrame(() => {
    renderQueued = false;
    renderScore(scoreCanvas, state);
    renderCircleMan(circleCanvas, state);
    toast.textContent = state.toast ?? "";
    toast.style.display = state.toast ? "block" : "none";
    const acc = state.accuracyPct === null ? "" :
      ` | accuracy ${state.accuracyPct.toFixed(1)}%`;
    const cal = state.calibrationState ? ` | calibration: ${state.calibrationState}` : "";
    status.textContent =
      `${state.transportState} @ measure ${state.measure}, beat ${state.beat}${acc}${cal}`;
  });
}

function bindCommand(id: string, cmd: CommandName, args = {}): void {
  const el = document.getElementById(id);
  el?.addEventListener("click", () => socket.send(cmd, args));
}

bindCommand("play", "play");
bindCommand("pause", "pause");
bindCommand("stop", "stop");
bindCommand("load-a", "load", { song: "A" });
bindCommand("load-b", "load", { song: "B" });
bindCommand("cal-begin", "calibrate_begin");
bindCommand("cal-exhaled", "calibrate_mark_exhaled");
bindCommand("cal-deep", "calibrate_mark_deep");

// click a measure to jump there
scoreCanvas.addEventListener("click", (ev) => {
  const measure = measuresForClick(scoreCanvas, state, ev.clientX, ev.clientY);
  if (measure !== null && connected) {
    socket.send("seek", { measure });
  }
});

scheduleRender();
