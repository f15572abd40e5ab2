// Pipe-score layout in normalized page coordinates (x and y in [0, 1]
// per row); the canvas renderer only scales these to pixels. Each page
// shows two rows of four measures.

import { MIDI_HI, MIDI_LO } from "./colors.js";
import type { ScoreDoc } from "./types.js";

export const ROWS_PER_PAGE = 2;
export const MEASURES_PER_ROW = 4;

export interface NoteBox {
  note: number;
  row: number;
  x0: number;
  x1: number;
  /** vertical center of the note band, 0 = top of the row */
  y: number;
  /** band height (one semitone of the pitch scale) */
  h: number;
  midi: number;
  syllable: string;
  /** true when this box starts the note's sentence pipe */
  sentenceStart: boolean;
  sentenceEnd: boolean;
}

export interface HintBox {
  hint: number;
  row: number;
  x0: number;
  x1: number;
  fillFraction: number;
}

export interface BeatLine {
  row: number;
  x: number;
  isMeasure: boolean;
}

export interface PageLayout {
  page: number;
  notes: NoteBox[];
  hints: HintBox[];
  beats: BeatLine[];
}

export function measureMs(score: ScoreDoc): number {
  return (score.beats_per_measure * 60000) / score.tempo_bpm;
}

export function rowMs(score: ScoreDoc): number {
  return MEASURES_PER_ROW * measureMs(score);
}

export function pageMs(score: ScoreDoc): number {
  return ROWS_PER_PAGE * rowMs(score);
}

export function pageCount(score: ScoreDoc): number {
  return Math.max(1, Math.ceil(score.measures / (ROWS_PER_PAGE * MEASURES_PER_ROW)));
}

export function pageForPosition(score: ScoreDoc, posMs: number): number {
  const p = Math.floor(posMs / pageMs(score));
  return Math.min(Math.max(p, 0), pageCount(score) - 1);
}

/** Note band center: pitch scale spans A3..C5 with half a semitone of
 * margin at both ends; higher pitches sit higher (smaller y). The
 * white dot uses the same mapping, so guidance and feedback cannot
 * drift apart. */
export function yForMidi(midi: number): number {
  const span = MIDI_HI - MIDI_LO + 1;
  return 1 - (midi - MIDI_LO + 0.5) / span;
}

export function bandHeight(): number {
  return 1 / (MIDI_HI - MIDI_LO + 1);
}

interface Segment {
  row: number;
  x0: number;
  x1: number;
}

/** Split a time interval into per-row segments of the given page;
 * returns nothing for intervals outside the page. */
function segments(score: ScoreDoc, page: number, start: number, end: number): Segment[] {
  const row0 = page * ROWS_PER_PAGE;
  const out: Segment[] = [];
  for (let r = 0; r < ROWS_PER_PAGE; r++) {
    const rowStart = (row0 + r) * rowMs(score);
    const rowEnd = rowStart + rowMs(score);
    const s = Math.max(start, rowStart);
    const e = Math.min(end, rowEnd);
    if (e > s) {
      out.push({
        row: r,
        x0: (s - rowStart) / rowMs(score),
        x1: (e - rowStart) / rowMs(score),
      });
    }
  }
  return out;
}

export function layoutPage(score: ScoreDoc, page: number): PageLayout {
  if (page < 0 || page >= pageCount(score)) {
    throw new RangeError(`page ${page} out of range 0..${pageCount(score) - 1}`);
  }
  const notes: NoteBox[] = [];
  score.notes.forEach((n, i) => {
    const sentence = score.sentences.find(
      (s) => i >= s.first_note && i <= s.last_note,
    );
    for (const seg of segments(score, page, n.start_ms, n.start_ms + n.duration_ms)) {
      notes.push({
        note: i,
        row: seg.row,
        x0: seg.x0,
        x1: seg.x1,
        y: yForMidi(n.midi),
        h: bandHeight(),
        midi: n.midi,
        syllable: n.syllable,
        sentenceStart: sentence !== undefined && i === sentence.first_note,
        sentenceEnd: sentence !== undefined && i === sentence.last_note,
      });
    }
  });

  const hints: HintBox[] = [];
  score.hints.forEach((h, i) => {
    for (const seg of segments(score, page, h.window_start_ms, h.window_end_ms)) {
      hints.push({
        hint: i,
        row: seg.row,
        x0: seg.x0,
        x1: seg.x1,
        fillFraction: h.target_fraction,
      });
    }
  });

  const beats: BeatLine[] = [];
  for (let r = 0; r < ROWS_PER_PAGE; r++) {
    const beatsPerRow = MEASURES_PER_ROW * score.beats_per_measure;
    for (let b = 0; b <= beatsPerRow; b++) {
      beats.push({
        row: r,
        x: b / beatsPerRow,
        isMeasure: b % score.beats_per_measure === 0,
      });
    }
  }
  return { page, notes, hints, beats };
}

/** Position-bar location on a page, or null when the position is on a
 * different page. */
export function positionBar(
  score: ScoreDoc,
  page: number,
  posMs: number,
): { row: number; x: number } | null {
  const row0 = page * ROWS_PER_PAGE;
  for (let r = 0; r < ROWS_PER_PAGE; r++) {
    const rowStart = (row0 + r) * rowMs(score);
    if (posMs >= rowStart && posMs < rowStart + rowMs(score)) {
      return { row: r, x: (posMs - rowStart) / rowMs(score) };
    }
  }
  return null;
}

/** Measure number (1-based) under a click at page-relative (row, x). */
export function measureAt(score: ScoreDoc, page: number, row: number, x: number): number {
  const measure =
    page * ROWS_PER_PAGE * MEASURES_PER_ROW +
    row * MEASURES_PER_ROW +
    Math.floor(x * MEASURES_PER_ROW) + 1;
  return Math.min(Math.max(measure, 1), score.measures);
}
