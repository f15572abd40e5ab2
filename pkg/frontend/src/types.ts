// Wire types: the score document and event schema of the session
// service's /ws endpoint. Field names match the server exactly.

export interface NoteDoc {
  midi: number;
  start_ms: number;
  duration_ms: number;
  syllable: string;
}

export interface SentenceDoc {
  first_note: number;
  last_note: number;
}

export interface HintDoc {
  sentence: number;
  window_start_ms: number;
  window_end_ms: number;
  target_fraction: number;
}

export interface ScoreDoc {
  title: string;
  tempo_bpm: number;
  beats_per_measure: number;
  measures: number;
  notes: NoteDoc[];
  sentences: SentenceDoc[];
  hints: HintDoc[];
}

export interface ScoreEvent {
  type: "score";
  score: ScoreDoc;
}

export interface TransportEvent {
  type: "transport";
  state: "stopped" | "playing" | "paused";
  pos: number;
  measure: number;
  beat: number;
}

export interface PitchEvent {
  type: "pitch";
  t: number;
  voiced: boolean;
  hz?: number;
  midi?: number;
}

export interface BreathEvent {
  type: "breath";
  t: number;
  la_n: number;
  bw_n: number;
  rb_n: number;
  volume: number;
}

export interface NoteResultEvent {
  type: "note_result";
  note: number;
  correct: boolean;
  correct_ms: number;
  required_ms: number;
}

export interface HintResultEvent {
  type: "hint_result";
  hint: number;
  achieved: number;
  target: number;
}

export interface PatternEvent {
  type: "pattern";
  hint: number;
  label: "good" | "bad" | "indeterminate";
  delta_la: number;
  delta_bw: number;
  delta_rb: number;
}

export interface CalibrationEvent {
  type: "calibration";
  state: "capturing_exhale" | "capturing_deep" | "done";
}

export interface AckEvent {
  type: "ack";
  cmd: string;
}

export interface ErrorEvent {
  type: "error";
  cmd?: string | null;
  reason: string;
}

export interface TakeMetricsEvent {
  type: "take_metrics";
  accuracy_pct: number;
  correct_notes: number;
  total_notes: number;
  [key: string]: unknown;
}

export type ServerEvent =
  | ScoreEvent
  | TransportEvent
  | PitchEvent
  | BreathEvent
  | NoteResultEvent
  | HintResultEvent
  | PatternEvent
  | CalibrationEvent
  | AckEvent
  | ErrorEvent
  | TakeMetricsEvent;

export type CommandName =
  | "play"
  | "pause"
  | "stop"
  | "seek"
  | "load"
  | "calibrate_begin"
  | "calibrate_mark_exhaled"
  | "calibrate_mark_deep";

export interface CommandMessage {
  type: "cmd";
  cmd: CommandName;
  measure?: number;
  song?: string;
}
