"""Take-level evaluation: note correctness, pitch accuracy, breathing
dynamic range, hint compliance, and cross-take comparison.

A note counts as correct when the sung pitch stays inside a quarter-tone
of the target for strictly more than 10% of the note's duration. The
breathing dynamic range (BDR) of a channel is the peak-to-peak span of
its filtered force over a whole take; growth in abdominal BDR across
takes is read as improved breath support, shrinkage in rib BDR as a
reduced chest-breathing share.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from singtutor.breath import (
    INDETERMINATE,
    BreathPattern,
    BreathSample,
    BreathThresholds,
)
from singtutor.pitch import PitchFrame, within_quarter_tone
from singtutor.score import Note, PipeScore

CORRECT_FRACTION = 0.10


@dataclass(frozen=True)
class NoteResult:
    note_index: int
    correct: bool
    correct_ms: float
    required_ms: float


@dataclass(frozen=True)
class ChannelBdr:
    la: float
    bw: float
    rb: float


@dataclass
class TakeMetrics:
    """Everything measured over one practice pass of a song."""

    accuracy_pct: float
    correct_notes: int
    total_notes: int
    note_results: list[NoteResult] = field(default_factory=list)
    bdr: ChannelBdr | None = None
    pattern_by_hint: list[BreathPattern] = field(default_factory=list)
    hint_compliance: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accuracy_pct": self.accuracy_pct,
            "correct_notes": self.correct_notes,
            "total_notes": self.total_notes,
            "note_results": [
                {"note": r.note_index, "correct": r.correct,
                 "correct_ms": r.correct_ms, "required_ms": r.required_ms}
                for r in self.note_results
            ],
            "bdr": None if self.bdr is None else
                {"la": self.bdr.la, "bw": self.bdr.bw, "rb": self.bdr.rb},
            "pattern_by_hint": [
                {"label": p.label, "delta_la": p.delta_la,
                 "delta_bw": p.delta_bw, "delta_rb": p.delta_rb}
                for p in self.pattern_by_hint
            ],
            "hint_compliance": list(self.hint_compliance),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TakeMetrics":
        return cls(
            accuracy_pct=d["accuracy_pct"],
            correct_notes=d["correct_notes"],
            total_notes=d["total_notes"],
            note_results=[
                NoteResult(note_index=r["note"], correct=r["correct"],
                           correct_ms=r["correct_ms"], required_ms=r["required_ms"])
                for r in d["note_results"]
            ],
            bdr=None if d["bdr"] is None else ChannelBdr(**d["bdr"]),
            pattern_by_hint=[
                BreathPattern(label=p["label"], delta_la=p["delta_la"],
                              delta_bw=p["delta_bw"], delta_rb=p["delta_rb"])
                for p in d["pattern_by_hint"]
            ],
            hint_compliance=list(d["hint_compliance"]),
        )


@dataclass(frozen=True)
class BreathImprovement:
    abdomen_support_improved: bool
    ribs_portion_reduced: bool
    both: bool
    delta_bdr_la: float
    delta_bdr_rb: float


def score_note(note: Note, frames, frame_ms: int = 50) -> NoteResult:
    """Score one note against the pitch frames overlapping it.

    Each frame covers [t_ms, t_ms + frame_ms); only the overlap with the
    note's interval is credited, and only while the frame is voiced and
    within a quarter-tone of the note. A frame set with no overlap gives
    correct_ms = 0 (incorrect). Frame order does not matter.
    """
    note_start = note.start_ms
    note_end = note.end_ms
    correct_ms = 0.0
    for f in frames:
        overlap = min(note_end, f.t_ms + frame_ms) - max(note_start, f.t_ms)
        if overlap <= 0:
            continue
        if f.voiced and within_quarter_tone(f.freq_hz, note.midi):
            correct_ms += overlap
    required_ms = CORRECT_FRACTION * note.duration_ms
    return NoteResult(note_index=-1, correct=correct_ms > required_ms,
                      correct_ms=correct_ms, required_ms=required_ms)


def note_results(score: PipeScore, frames) -> list[NoteResult]:
    frames = list(frames)
    results = []
    for i, note in enumerate(score.notes):
        r = score_note(note, frames)
        results.append(NoteResult(note_index=i, correct=r.correct,
                                  correct_ms=r.correct_ms, required_ms=r.required_ms))
    return results


def pitch_accuracy(score: PipeScore, frames) -> float:
    """Percent of the score's notes sung correctly."""
    if not score.notes:
        raise ValueError("score has no notes")
    results = note_results(score, frames)
    return 100.0 * sum(r.correct for r in results) / len(results)


def bdr(samples, channel: str) -> float:
    """Breathing dynamic range of one channel: max - min of its filtered
    force over the whole take."""
    values = [getattr(s, channel) for s in samples]
    if len(values) < 2:
        raise ValueError("need at least 2 samples for a dynamic range")
    return max(values) - min(values)


def bdr_all(samples) -> ChannelBdr:
    return ChannelBdr(la=bdr(samples, "la"), bw=bdr(samples, "bw"),
                      rb=bdr(samples, "rb"))


def compare_takes(before: TakeMetrics, after: TakeMetrics) -> BreathImprovement:
    """Breathing-improvement flags between two scored takes."""
    if before.bdr is None or after.bdr is None:
        raise ValueError("both takes must carry breathing metrics")
    d_la = after.bdr.la - before.bdr.la
    d_rb = after.bdr.rb - before.bdr.rb
    improved = d_la > 0
    reduced = d_rb < 0
    return BreathImprovement(
        abdomen_support_improved=improved,
        ribs_portion_reduced=reduced,
        both=improved and reduced,
        delta_bdr_la=d_la,
        delta_bdr_rb=d_rb,
    )


def hint_compliance(score: PipeScore, samples) -> list[float]:
    """Peak breath volume reached inside each hint window (0.0 when the
    window holds no samples), to compare against the hint's target."""
    samples = list(samples)
    achieved = []
    for h in score.hints:
        in_window = [s.volume for s in samples
                     if h.window_start_ms <= s.t_ms <= h.window_end_ms]
        achieved.append(max(in_window) if in_window else 0.0)
    return achieved


def patterns_by_hint(score: PipeScore, samples,
                     thresholds: BreathThresholds) -> list[BreathPattern]:
    """Classify the breathing pattern inside each hint window. Windows
    with too little data come back indeterminate with zero deltas."""
    from singtutor.breath import classify_breath

    samples = list(samples)
    out = []
    for h in score.hints:
        in_window = [s for s in samples
                     if h.window_start_ms <= s.t_ms <= h.window_end_ms]
        try:
            out.append(classify_breath(in_window, thresholds))
        except ValueError:
            out.append(BreathPattern(label=INDETERMINATE, delta_la=0.0,
                                     delta_bw=0.0, delta_rb=0.0))
    return out


def compute_take_metrics(score: PipeScore, pitch_frames, breath_samples,
                         thresholds: BreathThresholds | None = None) -> TakeMetrics:
    """Full TakeMetrics over one take's merged timeline.

    pitch_frames and breath_samples must be timed on the song's position
    axis (not stream time). breath_samples may be empty (pitch-only
    mode), in which case the breathing fields stay empty.
    """
    results = note_results(score, pitch_frames)
    correct = sum(r.correct for r in results)
    metrics = TakeMetrics(
        accuracy_pct=100.0 * correct / len(results) if results else 0.0,
        correct_notes=correct,
        total_notes=len(results),
        note_results=results,
    )
    breath_samples = list(breath_samples)
    if breath_samples:
        if thresholds is None:
            raise ValueError("thresholds required when breath samples are present")
        metrics.bdr = bdr_all(breath_samples) if len(breath_samples) >= 2 else None
        metrics.pattern_by_hint = patterns_by_hint(score, breath_samples, thresholds)
        metrics.hint_compliance = hint_compliance(score, breath_samples)
    return metrics
