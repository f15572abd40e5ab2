"""Regenerate the bundled practice songs.

Both songs are 8-bar pieces built to identical difficulty constraints:
pitch range exactly A3..C5 with every chromatic pitch used, an interval
histogram of {1: 1, 2: 21, 3: 5, 4: 4, 5: 2}, and six breathing hints
with matching target fractions. The melody search samples a random
permutation of the interval multiset and assigns step directions by
dynamic programming over the reachable pitch range, retrying until the
walk covers the full chromatic range.

Run from the repo root: python3 tools/compose_songs.py
"""

from __future__ import annotations

import json
import random
from pathlib import Path

LO, HI = 57, 72
INTERVALS = [1] * 1 + [2] * 21 + [3] * 5 + [4] * 4 + [5] * 2

TEMPO_BPM = 100.0
BEATS_PER_MEASURE = 4
MEASURES = 8
BEAT_MS = 600  # 60000 / 100
SENTENCE_SIZES = [6, 6, 5, 6, 5, 6]
HINT_FRACTIONS = [1.0, 0.5, 1.0, 0.5, 1.0, 0.5]
SHORT_MS = 300   # half beat
LONG_MS = 900    # dotted quarter, closes each sentence
WINDOW_MS = 600  # one-beat breathing window before each sentence

SOLFA = ("do", "di", "re", "ri", "mi", "fa", "fi", "sol", "si", "la", "li", "ti")


def sample_walk(rng: random.Random, start: int, end_set: set[int]):
    ivs = INTERVALS[:]
    rng.shuffle(ivs)
    n = len(ivs)
    reach = [set() for _ in range(n + 1)]
    reach[0] = {start}
    for k, iv in enumerate(ivs):
        for p in reach[k]:
            for s in (iv, -iv):
                if LO <= p + s <= HI:
                    reach[k + 1].add(p + s)
    ok_end = reach[n] & end_set
    if not ok_end:
        return None
    allow = [set() for _ in range(n + 1)]
    allow[n] = ok_end
    for k in range(n - 1, -1, -1):
        iv = ivs[k]
        for p in reach[k]:
            if (p + iv) in allow[k + 1] or (p - iv) in allow[k + 1]:
                allow[k].add(p)
    seq = [start]
    p = start
    visited = {start}
    for k, iv in enumerate(ivs):
        opts = [p + s for s in (iv, -iv) if (p + s) in allow[k + 1]]
        new = [q for q in opts if q not in visited]
        p = rng.choice(new) if new and rng.random() < 0.8 else rng.choice(opts)
        seq.append(p)
        visited.add(p)
    return seq


def find_melody(seed: int, start: int, end_set: set[int], avoid=None):
    rng = random.Random(seed)
    while True:
        seq = sample_walk(rng, start, end_set)
        if seq and len(set(seq)) == HI - LO + 1 and seq != avoid:
            return seq


def lay_out(title: str, melody: list[int]) -> dict:
    notes = []
    sentences = []
    hints = []
    t = 0
    i = 0
    for s_idx, size in enumerate(SENTENCE_SIZES):
        hints.append({
            "sentence": s_idx,
            "window_start_ms": t,
            "window_end_ms": t + WINDOW_MS,
            "target_fraction": HINT_FRACTIONS[s_idx],
        })
        t += WINDOW_MS
        first = i
        for k in range(size):
            dur = LONG_MS if k == size - 1 else SHORT_MS
            midi = melody[i]
            notes.append({
                "midi": midi,
                "start_ms": t,
                "duration_ms": dur,
                "syllable": SOLFA[midi % 12],
            })
            t += dur
            i += 1
        sentences.append({"first_note": first, "last_note": i - 1})
    assert i == len(melody)
    assert t <= MEASURES * BEATS_PER_MEASURE * BEAT_MS
    return {
        "title": title,
        "tempo_bpm": TEMPO_BPM,
        "beats_per_measure": BEATS_PER_MEASURE,
        "measures": MEASURES,
        "notes": notes,
        "sentences": sentences,
        "hints": hints,
    }


def main():
    melody_a = find_melody(11, start=57, end_set={69})
    melody_b = find_melody(202, start=60, end_set={57, 60}, avoid=melody_a)
    out_dir = Path(__file__).resolve().parent.parent / "src" / "singtutor" / "songs"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, melody in (("a", melody_a), ("b", melody_b)):
        doc = lay_out(f"Song {name.upper()}", melody)
        path = out_dir / f"song_{name}.json"
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {path} ({len(melody)} notes)")


if __name__ == "__main__":
    main()
