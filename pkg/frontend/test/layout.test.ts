import { describe, expect, it } from "vitest";
import {
  layoutPage,
  measureAt,
  pageCount,
  pageForPosition,
  positionBar,
  rowMs,
  yForMidi,
} from "../src/layout.js";
import type { ScoreDoc } from "../src/types.js";

// mirrors the bundled songs' shape: 8 measures of 4/4 at 100 bpm
const score: ScoreDoc = {
  title: "fixture",
  tempo_bpm: 100,
  beats_per_measure: 4,
  measures: 8,
  notes: [
    { midi: 57, start_ms: 600, duration_ms: 300, syllable: "la" },
    { midi: 60, start_ms: 900, duration_ms: 900, syllable: "do" },
    { midi: 72, start_ms: 10200, duration_ms: 600, syllable: "do" },
  ],
  sentences: [
    { first_note: 0, last_note: 1 },
    { first_note: 2, last_note: 2 },
  ],
  hints: [
    { sentence: 0, window_start_ms: 0, window_end_ms: 600, target_fraction: 1.0 },
    { sentence: 1, window_start_ms: 9600, window_end_ms: 10200, target_fraction: 0.5 },
  ],
};

describe("page geometry", () => {
  it("8 measures fit one page of two rows by four measures", () => {
    expect(pageCount(score)).toBe(1);
    expect(rowMs(score)).toBe(4 * 4 * 600);
  });

  it("empty score still renders a page grid", () => {
    const empty = { ...score, notes: [], sentences: [], hints: [] };
    const layout = layoutPage(empty, 0);
    expect(layout.notes).toHaveLength(0);
    expect(layout.hints).toHaveLength(0);
    expect(layout.beats.length).toBeGreaterThan(0);
  });

  it("out-of-range page throws", () => {
    expect(() => layoutPage(score, 1)).toThrow(RangeError);
  });

  it("notes land on the correct row with correct fractions", () => {
    const layout = layoutPage(score, 0);
    const first = layout.notes.find((b) => b.note === 0)!;
    expect(first.row).toBe(0);
    expect(first.x0).toBeCloseTo(600 / 9600);
    expect(first.x1).toBeCloseTo(900 / 9600);
    const high = layout.notes.find((b) => b.note === 2)!;
    expect(high.row).toBe(1); // second row starts at 9600 ms
    expect(high.x0).toBeCloseTo(600 / 9600);
  });

  it("hint blocks carry the target fraction (half cup renders half full)", () => {
    const layout = layoutPage(score, 0);
    expect(layout.hints[0].fillFraction).toBe(1.0);
    expect(layout.hints[1].fillFraction).toBe(0.5);
    expect(layout.hints[1].row).toBe(1);
  });

  it("beat lines include heavier measure boundaries", () => {
    const layout = layoutPage(score, 0);
    const measures = layout.beats.filter((b) => b.row === 0 && b.isMeasure);
    expect(measures.map((b) => b.x)).toEqual([0, 0.25, 0.5, 0.75, 1]);
  });
});

describe("pitch scale", () => {
  it("higher midi sits higher on the row", () => {
    expect(yForMidi(72)).toBeLessThan(yForMidi(57));
  });

  it("the scale is linear in midi", () => {
    const d1 = yForMidi(57) - yForMidi(58);
    const d2 = yForMidi(71) - yForMidi(72);
    expect(d1).toBeCloseTo(d2);
  });
});

describe("position bar", () => {
  it("tracks the row and fraction of the position", () => {
    expect(positionBar(score, 0, 0)).toEqual({ row: 0, x: 0 });
    expect(positionBar(score, 0, 9600)).toEqual({ row: 1, x: 0 });
    const mid = positionBar(score, 0, 4800)!;
    expect(mid.row).toBe(0);
    expect(mid.x).toBeCloseTo(0.5);
  });

  it("page selection follows the position", () => {
    expect(pageForPosition(score, 0)).toBe(0);
    expect(pageForPosition(score, 19199)).toBe(0);
  });
});

describe("measure picking", () => {
  it("maps a click to the 1-based measure", () => {
    expect(measureAt(score, 0, 0, 0.1)).toBe(1);
    expect(measureAt(score, 0, 0, 0.8)).toBe(4);
    expect(measureAt(score, 0, 1, 0.3)).toBe(6);
  });

  it("clamps to the song's measures", () => {
    expect(measureAt(score, 0, 1, 0.999)).toBe(8);
  });
});
