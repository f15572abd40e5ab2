// Canvas renderers. Everything here is a pure draw of (score, ViewState)
// through the layout module; no state lives in this file.

import { colorForMidi } from "./colors.js";
import { bisectorLengths, triangleVertices } from "./geometry.js";
import {
  MEASURES_PER_ROW,
  ROWS_PER_PAGE,
  layoutPage,
  pageForPosition,
  positionBar,
  yForMidi,
} from "./layout.js";
import type { ViewState } from "./state.js";

const ROW_GAP = 18;
const PIPE_ALPHA = 0.25;

export function renderScore(canvas: HTMLCanvasElement, state: ViewState): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  if (!state.score) {
    ctx.fillStyle = "#777";
    ctx.font = "16px sans-serif";
    ctx.fillText("no song loaded", 20, 40);
    return;
  }
  const score = state.score;
  const page = pageForPosition(score, state.positionMs);
  const layout = layoutPage(score, page);
  const rowH = (height - ROW_GAP * (ROWS_PER_PAGE - 1)) / ROWS_PER_PAGE;
  const rowTop = (row: number) => row * (rowH + ROW_GAP);

  // beat grid: light verticals, heavier measure lines
  for (const line of layout.beats) {
    ctx.strokeStyle = line.isMeasure ? "#b5b5b5" : "#e3e3e3";
    ctx.lineWidth = line.isMeasure ? 1.5 : 1;
    const x = line.x * width;
    ctx.beginPath();
    ctx.moveTo(x, rowTop(line.row));
    ctx.lineTo(x, rowTop(line.row) + rowH);
    ctx.stroke();
  }

  // gray breathing blocks, filled to the target fraction ("half cup")
  for (const hint of layout.hints) {
    const x = hint.x0 * width;
    const w = (hint.x1 - hint.x0) * width;
    const top = rowTop(hint.row);
    ctx.fillStyle = "rgba(150, 150, 150, 0.18)";
    ctx.fillRect(x, top, w, rowH);
    const cupH = rowH * 0.3;
    const cupTop = top + rowH - cupH * hint.fillFraction - 8;
    ctx.fillStyle = "rgba(120, 120, 120, 0.55)";
    ctx.fillRect(x + 2, cupTop, w - 4, cupH * hint.fillFraction);
  }

  // note pipes: hollow until the dot fills them with the note's color
  for (const box of layout.notes) {
    const x = box.x0 * width;
    const w = (box.x1 - box.x0) * width;
    const y = rowTop(box.row) + (box.y - box.h / 2) * rowH;
    const h = box.h * rowH;
    const color = colorForMidi(box.midi);
    if (state.filled[box.note]) {
      ctx.fillStyle = color;
      ctx.fillRect(x, y, w, h);
    } else {
      ctx.fillStyle = colorForMidi(box.midi, PIPE_ALPHA);
      ctx.fillRect(x, y, w, h);
    }
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.strokeRect(x, y, w, h);
    ctx.fillStyle = "#333";
    ctx.font = "11px sans-serif";
    ctx.fillText(box.syllable, x + 2, y + h - 2);
  }

  // time position bar
  const bar = positionBar(score, page, state.positionMs);
  if (bar) {
    ctx.strokeStyle = "#d33";
    ctx.lineWidth = 2;
    const x = bar.x * width;
    ctx.beginPath();
    ctx.moveTo(x, rowTop(bar.row));
    ctx.lineTo(x, rowTop(bar.row) + rowH);
    ctx.stroke();
  }

  // white pitch dot (hidden while unvoiced), same midi scale as bands
  if (state.dot && bar) {
    const dotBar = positionBar(score, page, state.dot.t);
    if (dotBar) {
      const x = dotBar.x * width;
      const y = rowTop(dotBar.row) + yForMidi(state.dot.midi) * rowH;
      ctx.beginPath();
      ctx.arc(x, y, 5, 0, 2 * Math.PI);
      ctx.fillStyle = "#fff";
      ctx.strokeStyle = "#222";
      ctx.lineWidth = 1.5;
      ctx.fill();
      ctx.stroke();
    }
  }
}

export function renderCircleMan(canvas: HTMLCanvasElement, state: ViewState): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const cx = width / 2;
  const cy = height * 0.55;
  const rMin = Math.min(width, height) * 0.16;
  const rMax = Math.min(width, height) * 0.34;
  const radius = rMin + (rMax - rMin) * Math.min(Math.max(state.circleVolume, 0), 1);

  // belly circle: expands on inhalation, shrinks on exhalation
  ctx.beginPath();
  ctx.arc(cx, cy, radius, 0, 2 * Math.PI);
  ctx.fillStyle = "rgba(90, 160, 255, 0.25)";
  ctx.fill();
  ctx.strokeStyle = "#5a7db0";
  ctx.lineWidth = 2;
  ctx.stroke();

  // head
  ctx.beginPath();
  ctx.arc(cx, cy - rMax - 18, 12, 0, 2 * Math.PI);
  ctx.stroke();

  // conductor hands: a two-state pendulum synced to the beat
  const handLen = rMax * 0.9;
  const phase = state.beatPhase === 0 ? -0.5 : 0.5;
  for (const side of [-1, 1]) {
    const baseX = cx + side * (rMax + 10);
    const baseY = cy - rMax * 0.4;
    ctx.beginPath();
    ctx.moveTo(baseX, baseY);
    ctx.lineTo(baseX + side * Math.cos(phase) * 14, baseY - handLen * 0.35 * (state.beatPhase === 0 ? 1 : 0.4));
    ctx.strokeStyle = "#888";
    ctx.lineWidth = 3;
    ctx.stroke();
  }

  // green breathing triangle from the normalized channels
  const scale = radius * 0.5;
  const verts = triangleVertices(state.laN, state.bwN, state.rbN);
  ctx.beginPath();
  verts.forEach((v, i) => {
    const x = cx + v.x * scale;
    const y = cy + v.y * scale;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.closePath();
  ctx.fillStyle = "rgba(60, 170, 90, 0.45)";
  ctx.fill();
  ctx.strokeStyle = "#2c8a4b";
  ctx.lineWidth = 2;
  ctx.stroke();

  // bisector readouts for the curious
  const [abd, rib] = bisectorLengths(state.laN, state.bwN, state.rbN);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(`abdomen ${abd.toFixed(2)}  ribs ${rib.toFixed(2)}`, 8, height - 8);
}

export function measuresForClick(
  canvas: HTMLCanvasElement,
  state: ViewState,
  clientX: number,
  clientY: number,
): number | null {
  if (!state.score) return null;
  const rect = canvas.getBoundingClientRect();
  const x = (clientX - rect.left) / rect.width;
  const rowH = 1 / ROWS_PER_PAGE;
  const row = Math.min(
    ROWS_PER_PAGE - 1,
    Math.floor((clientY - rect.top) / rect.height / rowH),
  );
  const page = pageForPosition(state.score, state.positionMs);
  const measure =
    page * ROWS_PER_PAGE * MEASURES_PER_ROW +
    row * MEASURES_PER_ROW +
    Math.floor(x * MEASURES_PER_ROW) + 1;
  return Math.min(Math.max(measure, 1), state.score.measures);
}
