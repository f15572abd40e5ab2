// Pure view-state reducer. Rendering is a function of (score, ViewState),
// so replaying a recorded event log reproduces the exact same final
// state - that property is what the tests pin down.

import type { PatternEvent, ScoreDoc, ServerEvent } from "./types.js";

export interface DotState {
  t: number;
  midi: number;
}

export interface ViewState {
  score: ScoreDoc | null;
  transportState: "stopped" | "playing" | "paused";
  positionMs: number;
  measure: number;
  beat: number;
  beatPhase: 0 | 1; // conductor pendulum, flips every beat
  dot: DotState | null; // white pitch dot; null while unvoiced
  filled: boolean[]; // per-note fill, monotone within a take
  circleVolume: number; // breathing circle, 0..1
  laN: number;
  bwN: number;
  rbN: number;
  patterns: (PatternEvent["label"] | null)[]; // per hint
  achieved: (number | null)[]; // per hint
  calibrationState: string | null;
  accuracyPct: number | null;
  toast: string | null;
}

export function initialState(): ViewState {
  return {
    score: null,
    transportState: "stopped",
    positionMs: 0,
    measure: 1,
    beat: 1,
    beatPhase: 0,
    dot: null,
    filled: [],
    circleVolume: 0,
    laN: 0,
    bwN: 0,
    rbN: 0,
    patterns: [],
    achieved: [],
    calibrationState: null,
    accuracyPct: null,
    toast: null,
  };
}

/** Index of the note sounding at time t, or -1. Half-open intervals:
 * an exact boundary belongs to the later note. */
export function noteIndexAt(score: ScoreDoc, t: number): number {
  for (let i = 0; i < score.notes.length; i++) {
    const n = score.notes[i];
    if (t >= n.start_ms && t < n.start_ms + n.duration_ms) return i;
    if (n.start_ms > t) break;
  }
  return -1;
}

/** The guidance band of a note: the dot fills the note when it sits
 * within a quarter-tone of the note's pitch (the same tolerance the
 * engine scores with). */
export function inBand(noteMidi: number, dotMidi: number): boolean {
  return Math.abs(dotMidi - noteMidi) < 0.5;
}

function resetTake(state: ViewState): ViewState {
  const n = state.score ? state.score.notes.length : 0;
  const h = state.score ? state.score.hints.length : 0;
  return {
    ...state,
    dot: null,
    filled: new Array(n).fill(false),
    patterns: new Array(h).fill(null),
    achieved: new Array(h).fill(null),
    circleVolume: 0,
    laN: 0,
    bwN: 0,
    rbN: 0,
    accuracyPct: null,
  };
}

export function applyEvent(state: ViewState, event: ServerEvent): ViewState {
  switch (event.type) {
    case "score": {
      const next = { ...state, score: event.score };
      return resetTake(next);
    }
    case "transport": {
      const starting =
        state.transportState === "stopped" && event.state === "playing";
      let next: ViewState = {
        ...state,
        transportState: event.state,
        positionMs: event.pos,
        measure: event.measure,
        beat: event.beat,
        beatPhase: (event.beat % 2) as 0 | 1,
      };
      if (starting) next = resetTake(next);
      if (event.state !== "playing") next = { ...next, dot: null };
      return next;
    }
    case "pitch": {
      if (!event.voiced || event.midi === undefined) {
        return { ...state, dot: null };
      }
      const dot = { t: event.t, midi: event.midi };
      let filled = state.filled;
      if (state.score) {
        const i = noteIndexAt(state.score, event.t);
        if (i >= 0 && !filled[i] && inBand(state.score.notes[i].midi, event.midi)) {
          filled = filled.slice();
          filled[i] = true; // once filled, stays filled
        }
      }
      return { ...state, dot, filled };
    }
    case "breath":
      return {
        ...state,
        circleVolume: event.volume,
        laN: event.la_n,
        bwN: event.bw_n,
        rbN: event.rb_n,
      };
    case "pattern": {
      const patterns = state.patterns.slice();
      patterns[event.hint] = event.label;
      return { ...state, patterns };
    }
    case "hint_result": {
      const achieved = state.achieved.slice();
      achieved[event.hint] = event.achieved;
      return { ...state, achieved };
    }
    case "note_result":
      return state; // fill state is driven by the dot, per the band rule
    case "calibration":
      return { ...state, calibrationState: event.state, toast: null };
    case "take_metrics":
      return { ...state, accuracyPct: event.accuracy_pct };
    case "ack":
      return { ...state, toast: null };
    case "error":
      return { ...state, toast: event.reason };
    default:
      return state;
  }
}

/** Fold a whole event log (deterministic: same log, same final state). */
export function replay(log: ServerEvent[], start?: ViewState): ViewState {
  let state = start ?? initialState();
  for (const event of log) state = applyEvent(state, event);
  return state;
}
