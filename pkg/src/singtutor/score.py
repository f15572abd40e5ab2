"""Pipe-score data model: breath-annotated monophonic songs.

A score is a list of non-overlapping notes partitioned into sentences
(the "pipes"), with one breathing hint before each sentence telling the
singer when to inhale and how full a breath to take. Scores are stored
as UTF-8 JSON documents; see parse_score for the schema.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from functools import cached_property
from importlib import resources

MIDI_A3 = 57
MIDI_C5 = 72

# Interval statistics both bundled songs were composed to match: map of
# |semitone step| -> count over consecutive note pairs.
BUNDLED_INTERVAL_HISTOGRAM = {1: 1, 2: 21, 3: 5, 4: 4, 5: 2}

# Fixed-do chromatic solfege, ascending spellings.
SOLFA_SYLLABLES = ("do", "di", "re", "ri", "mi", "fa",
                   "fi", "sol", "si", "la", "li", "ti")


class ScoreError(ValueError):
    """Raised for malformed score documents or invariant violations."""


def solfa(midi: int) -> str:
    """Fixed-do syllable name for a MIDI pitch."""
    return SOLFA_SYLLABLES[midi % 12]


@dataclass(frozen=True)
class Note:
    midi: int
    start_ms: int
    duration_ms: int
    syllable: str

    @property
    def end_ms(self) -> int:
        return self.start_ms + self.duration_ms


@dataclass(frozen=True)
class Sentence:
    """Contiguous, inclusive index range into the song's note list."""

    first_note: int
    last_note: int


@dataclass(frozen=True)
class BreathHint:
    sentence: int
    window_start_ms: int
    window_end_ms: int
    target_fraction: float


@dataclass(frozen=True)
class PipeScore:
    title: str
    tempo_bpm: float
    beats_per_measure: int
    measures: int
    notes: tuple[Note, ...]
    sentences: tuple[Sentence, ...]
    hints: tuple[BreathHint, ...]

    @property
    def beat_ms(self) -> float:
        return 60000.0 / self.tempo_bpm

    @property
    def measure_ms(self) -> float:
        return self.beats_per_measure * self.beat_ms

    @property
    def total_ms(self) -> float:
        """Nominal song length: the full notated measure grid."""
        return self.measures * self.measure_ms

    def note_at(self, t_ms: float):
        """Note sounding at time t, as (index, Note), or None during
        rests and breathing windows.

        Note intervals are half-open [start, start + duration), so at an
        exact boundary the later note wins.
        """
        if t_ms < 0:
            raise ValueError("t_ms must be >= 0")
        i = bisect_right(self._starts, t_ms) - 1
        if i < 0:
            return None
        note = self.notes[i]
        if t_ms < note.end_ms:
            return i, note
        return None

    def interval_histogram(self) -> dict[int, int]:
        """Counts of |midi step| over consecutive note pairs, sentence
        boundaries included. Empty for fewer than two notes."""
        hist: dict[int, int] = {}
        for a, b in zip(self.notes, self.notes[1:]):
            step = abs(b.midi - a.midi)
            hist[step] = hist.get(step, 0) + 1
        return hist

    def sentence_of_note(self, note_index: int) -> int:
        for i, s in enumerate(self.sentences):
            if s.first_note <= note_index <= s.last_note:
                return i
        raise IndexError(f"note {note_index} not in any sentence")

    @cached_property
    def _starts(self) -> list[int]:
        # cached_property writes to __dict__ directly, which is fine on a
        # frozen dataclass; notes are immutable after construction.
        return [n.start_ms for n in self.notes]


@dataclass
class ValidationReport:
    """Per-check outcome of validate_difficulty."""

    pitch_range_ok: bool
    coverage_ok: bool
    histogram_ok: bool
    histogram: dict[int, int]
    reference: dict[int, int]
    hint_count: int
    hint_fractions: list[float]

    @property
    def passed(self) -> bool:
        return self.pitch_range_ok and self.coverage_ok and self.histogram_ok

    def summary(self) -> str:
        lines = [
            f"pitch range A3..C5: {'ok' if self.pitch_range_ok else 'FAIL'}",
            f"chromatic coverage: {'ok' if self.coverage_ok else 'FAIL'}",
            f"interval histogram: {'ok' if self.histogram_ok else 'FAIL'}"
            f" (got {self.histogram}, want {self.reference})",
            f"breath hints: {self.hint_count} with fractions {self.hint_fractions}",
        ]
        return "\n".join(lines)


def _require(obj: dict, field: str, where: str):
    if field not in obj:
        raise ScoreError(f"{where}: missing field '{field}'")
    return obj[field]


def parse_score(text: str) -> PipeScore:
    """Parse and validate a UTF-8 JSON score document.

    Schema: {"title", "tempo_bpm", "beats_per_measure", "measures",
    "notes": [{"midi", "start_ms", "duration_ms", "syllable"}],
    "sentences": [{"first_note", "last_note"}],
    "hints": [{"sentence", "window_start_ms", "window_end_ms",
    "target_fraction"}]}. Times are integer milliseconds.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScoreError(f"syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ScoreError("document: top level must be an object")

    title = str(_require(doc, "title", "document"))
    tempo = float(_require(doc, "tempo_bpm", "document"))
    beats = int(_require(doc, "beats_per_measure", "document"))
    measures = int(_require(doc, "measures", "document"))
    if tempo <= 0:
        raise ScoreError("document: tempo_bpm must be > 0")
    if beats < 1:
        raise ScoreError("document: beats_per_measure must be >= 1")
    if measures < 1:
        raise ScoreError("document: measures must be >= 1")

    notes = []
    for i, n in enumerate(_require(doc, "notes", "document")):
        where = f"note {i}"
        note = Note(
            midi=int(_require(n, "midi", where)),
            start_ms=int(_require(n, "start_ms", where)),
            duration_ms=int(_require(n, "duration_ms", where)),
            syllable=str(_require(n, "syllable", where)),
        )
        if note.duration_ms <= 0:
            raise ScoreError(f"{where}: duration_ms must be > 0")
        if note.start_ms < 0:
            raise ScoreError(f"{where}: start_ms must be >= 0")
        notes.append(note)
    for i in range(1, len(notes)):
        if notes[i].start_ms < notes[i - 1].end_ms:
            raise ScoreError(
                f"note {i} starts at {notes[i].start_ms} ms, before note "
                f"{i - 1} ends at {notes[i - 1].end_ms} ms"
            )

    sentences = []
    for i, s in enumerate(_require(doc, "sentences", "document")):
        where = f"sentence {i}"
        sentences.append(Sentence(
            first_note=int(_require(s, "first_note", where)),
            last_note=int(_require(s, "last_note", where)),
        ))
    expected_first = 0
    for i, s in enumerate(sentences):
        if s.first_note != expected_first:
            raise ScoreError(
                f"sentence {i}: first_note {s.first_note} breaks the "
                f"partition (expected {expected_first})"
            )
        if s.last_note < s.first_note:
            raise ScoreError(f"sentence {i}: empty note range")
        expected_first = s.last_note + 1
    if notes and (not sentences or sentences[-1].last_note != len(notes) - 1):
        raise ScoreError("sentences do not cover the full note list")

    hints = []
    for i, h in enumerate(_require(doc, "hints", "document")):
        where = f"hint {i}"
        hints.append(BreathHint(
            sentence=int(_require(h, "sentence", where)),
            window_start_ms=int(_require(h, "window_start_ms", where)),
            window_end_ms=int(_require(h, "window_end_ms", where)),
            target_fraction=float(_require(h, "target_fraction", where)),
        ))
    if sorted(h.sentence for h in hints) != list(range(len(sentences))):
        raise ScoreError("hints must target each sentence exactly once")
    for i, h in enumerate(hints):
        if not 0.0 < h.target_fraction <= 1.0:
            raise ScoreError(f"hint {i}: target_fraction must be in (0, 1]")
        if h.window_end_ms <= h.window_start_ms:
            raise ScoreError(f"hint {i}: window must have positive length")
        s = sentences[h.sentence]
        first_start = notes[s.first_note].start_ms
        if h.window_end_ms > first_start:
            raise ScoreError(
                f"hint {i}: window ends at {h.window_end_ms} ms, after "
                f"sentence {h.sentence} starts at {first_start} ms"
            )
        if h.sentence > 0:
            prev = sentences[h.sentence - 1]
            prev_end = notes[prev.last_note].end_ms
            if h.window_start_ms < prev_end:
                raise ScoreError(
                    f"hint {i}: window starts at {h.window_start_ms} ms, "
                    f"inside sentence {h.sentence - 1} which ends at {prev_end} ms"
                )

    score = PipeScore(
        title=title,
        tempo_bpm=tempo,
        beats_per_measure=beats,
        measures=measures,
        notes=tuple(notes),
        sentences=tuple(sentences),
        hints=tuple(sorted(hints, key=lambda h: h.sentence)),
    )
    if notes and notes[-1].end_ms > score.total_ms:
        raise ScoreError(
            f"notated time {notes[-1].end_ms} ms exceeds the measure grid "
            f"({score.total_ms:.0f} ms)"
        )
    return score


def serialize_score(score: PipeScore) -> str:
    """Inverse of parse_score (round-trips exactly)."""
    doc = {
        "title": score.title,
        "tempo_bpm": score.tempo_bpm,
        "beats_per_measure": score.beats_per_measure,
        "measures": score.measures,
        "notes": [
            {"midi": n.midi, "start_ms": n.start_ms,
             "duration_ms": n.duration_ms, "syllable": n.syllable}
            for n in score.notes
        ],
        "sentences": [
            {"first_note": s.first_note, "last_note": s.last_note}
            for s in score.sentences
        ],
        "hints": [
            {"sentence": h.sentence, "window_start_ms": h.window_start_ms,
             "window_end_ms": h.window_end_ms, "target_fraction": h.target_fraction}
            for h in score.hints
        ],
    }
    return json.dumps(doc, indent=2)


def load_score(path) -> PipeScore:
    with open(path, encoding="utf-8") as f:
        return parse_score(f.read())


def bundled_song(name: str) -> PipeScore:
    """Load one of the two bundled practice songs ("A" or "B")."""
    key = name.strip().lower()
    if key not in ("a", "b"):
        raise ValueError(f"unknown bundled song {name!r} (expected 'A' or 'B')")
    data = resources.files("singtutor").joinpath(f"songs/song_{key}.json")
    return parse_score(data.read_text(encoding="utf-8"))


def note_at(score: PipeScore, t_ms: float):
    return score.note_at(t_ms)


def interval_histogram(score: PipeScore) -> dict[int, int]:
    return score.interval_histogram()


def validate_difficulty(score: PipeScore, reference: dict[int, int] | None = None) -> ValidationReport:
    """Check a score against the difficulty constraints the bundled songs
    follow: pitch range exactly A3..C5, every chromatic pitch in the
    range used, and an interval histogram equal to the reference."""
    if reference is None:
        reference = BUNDLED_INTERVAL_HISTOGRAM
    pitches = {n.midi for n in score.notes}
    range_ok = bool(pitches) and min(pitches) == MIDI_A3 and max(pitches) == MIDI_C5
    coverage_ok = pitches >= set(range(MIDI_A3, MIDI_C5 + 1))
    hist = score.interval_histogram()
    return ValidationReport(
        pitch_range_ok=range_ok,
        coverage_ok=coverage_ok,
        histogram_ok=hist == dict(reference),
        histogram=hist,
        reference=dict(reference),
        hint_count=len(score.hints),
        hint_fractions=[h.target_fraction for h in score.hints],
    )
