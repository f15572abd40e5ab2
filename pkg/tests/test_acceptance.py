"""Acceptance suite: one test per pipeline-correctness criterion, each
printing a PASS line (run with -s or -v to see them).

1. quarter-tone pitch sweep accuracy and speed
2. strict scoring boundaries (10% duration rule, quarter-tone rule)
3. closed-form oracle closure over 50 random noiseless singer scripts
4. mean-filter vs direct-summation oracle on 1000 random streams; BDR
   vs brute force
5. breathing-pattern classification by style
6. bundled-song difficulty constraints
7. persistence round-trip and offline re-analysis equality
8. one-minute throughput headroom
"""

from __future__ import annotations

import json
import time

import numpy as np
import pytest

from singtutor import sources
from singtutor.breath import BAD, GOOD, INDETERMINATE, BreathThresholds
from singtutor.metrics import bdr_all, score_note
from singtutor.pitch import PitchConfig, detect_pitch, midi_to_hz
from singtutor.score import (
    BUNDLED_INTERVAL_HISTOGRAM,
    MIDI_A3,
    MIDI_C5,
    Note,
    PipeScore,
    Sentence,
    BreathHint,
    bundled_song,
    validate_difficulty,
)
from singtutor.session import (
    MODE_PITCH_BREATH,
    SessionEngine,
    load,
    persist,
    run_calibration,
    run_session,
)
from singtutor.breath import SensorFrame, process_stream, Calibration, ChannelValues
from singtutor.pitch import PitchFrame, hz_to_midi
from singtutor.simulate import SingerScript, synth_calibration


def _ok(msg: str) -> None:
    print(f"PASS: {msg}")


def _run_script(script: SingerScript):
    engine = SessionEngine(script.score, mode=MODE_PITCH_BREATH)
    run_calibration(engine, *synth_calibration(script))
    audio, sensor = sources.sim_streams(script)
    return run_session(script.score, sensor, audio, engine=engine)


def test_criterion_1_pitch_sweep():
    """Pure sines at every quarter-tone A3..C5, 20 frames each: >= 99%
    of frames within 0.25 semitone; runtime < 10 s."""
    cfg = PitchConfig()
    start = time.perf_counter()
    total = hits = 0
    for midi_times_2 in range(2 * MIDI_A3, 2 * MIDI_C5 + 1):
        midi = midi_times_2 / 2.0
        freq = midi_to_hz(midi)
        t = np.arange(20 * cfg.frame_samples) / cfg.sample_rate_hz
        tone = np.sin(2.0 * np.pi * freq * t)
        for k in range(20):
            pf = detect_pitch(tone[k * cfg.frame_samples:(k + 1) * cfg.frame_samples], cfg)
            total += 1
            if pf.voiced and abs(pf.midi_float - midi) < 0.25:
                hits += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"sweep took {elapsed:.1f} s"
    rate = hits / total
    assert rate >= 0.99, f"only {100 * rate:.2f}% of frames within a quarter-tone/2"
    _ok(f"criterion 1: sweep {100 * rate:.2f}% within 0.25 st in {elapsed:.2f} s")


def test_criterion_2_scoring_boundaries():
    """Exactly 10% in-tune duration scores incorrect; one frame more
    scores correct; the quarter-tone boundary is strict. No tolerance."""
    note = Note(midi=69, start_ms=0, duration_ms=1000, syllable="la")

    def frames(count, hz):
        return [PitchFrame(t_ms=50 * i, voiced=True, freq_hz=hz,
                           midi_float=hz_to_midi(hz), energy_db=-10.0)
                for i in range(count)]

    exact = score_note(note, frames(2, 440.0))   # 100 ms = exactly 10%
    assert exact.correct_ms == 100.0
    assert exact.correct is False
    plus_one = score_note(note, frames(3, 440.0))
    assert plus_one.correct_ms == 150.0
    assert plus_one.correct is True

    boundary_hz = 440.0 * 2.0 ** (1.0 / 24.0)
    at = score_note(note, frames(20, boundary_hz))
    assert at.correct_ms == 0.0 and at.correct is False
    below = score_note(note, frames(20, boundary_hz - 0.01))
    assert below.correct_ms == 1000.0 and below.correct is True
    above = score_note(note, frames(20, boundary_hz + 0.01))
    assert above.correct_ms == 0.0 and above.correct is False
    _ok("criterion 2: 10% duration rule and quarter-tone boundary are strict")


def test_criterion_3_oracle_closure():
    """50 random noiseless scripts: end-to-end accuracy equals the
    closed-form prediction exactly; every hint's pattern label matches
    the scripted breath style; runtime < 60 s."""
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    for i in range(50):
        song = bundled_song("A" if i % 2 == 0 else "B")
        errors = []
        for _ in song.notes:
            if rng.random() < 0.6:
                errors.append(float(rng.uniform(-45.0, 45.0)))
            else:
                errors.append(float(rng.choice([-1, 1]) * rng.uniform(55.0, 160.0)))
        style = "abdominal" if rng.random() < 0.5 else "chest"
        depths = tuple(float(d) for d in rng.uniform(0.3, 1.0, len(song.hints)))
        script = SingerScript(score=song, pitch_error_cents=tuple(errors),
                              breath_style=style, breath_depth=depths,
                              seed=int(rng.integers(1 << 30)))
        record = _run_script(script)
        m = record.metrics
        assert m.accuracy_pct == script.expected_accuracy_pct(), \
            f"script {i}: accuracy {m.accuracy_pct} != {script.expected_accuracy_pct()}"
        assert m.correct_notes == script.expected_correct_notes()
        labels = [p.label for p in m.pattern_by_hint]
        assert labels == script.expected_labels(), f"script {i}: {labels}"
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"closure took {elapsed:.1f} s"
    _ok(f"criterion 3: 50 scripts closed exactly in {elapsed:.1f} s")


def test_criterion_4_filter_and_bdr_oracle():
    """1000 random sensor streams: the pipeline's 150 ms mean filter
    matches a direct-summation oracle within 1e-9 N; BDR equals the
    brute-force max-min scan exactly."""
    rng = np.random.default_rng(7)
    cal = Calibration(baseline=ChannelValues(8.0, 8.0, 8.0),
                      deep_max=ChannelValues(20.0, 20.0, 20.0))
    for _ in range(1000):
        n = int(rng.integers(30, 120))
        t = np.cumsum(rng.integers(5, 21, size=n))  # 50..200 Hz
        raw = np.abs(rng.normal(12.0, 4.0, size=(n, 5)))
        frames = [SensorFrame(int(ti), *map(float, row)) for ti, row in zip(t, raw)]
        samples = process_stream(frames, cal)
        reduced = np.stack([
            raw[:, 0],
            (raw[:, 1] + raw[:, 2]) / 2.0,
            (raw[:, 3] + raw[:, 4]) / 2.0,
        ], axis=1)
        clamped = np.maximum(reduced - 8.0, 0.0)
        for ch, name in enumerate(("la", "bw", "rb")):
            got = np.array([getattr(s, name) for s in samples])
            want = np.array([
                np.mean(clamped[(t > t[i] - 150.0) & (t <= t[i]), ch])
                for i in range(n)
            ])
            assert np.max(np.abs(got - want)) < 1e-9
        got_bdr = bdr_all(samples)
        for name in ("la", "bw", "rb"):
            values = [getattr(s, name) for s in samples]
            assert getattr(got_bdr, name) == max(values) - min(values)
    _ok("criterion 4: filter within 1e-9 of oracle and BDR exact on 1000 streams")


def test_criterion_5_breathing_classification():
    """Abdominal scripts classify good on 100% of hints, chest bad on
    100%, flat (zero-depth) indeterminate."""
    song = bundled_song("A")
    rng = np.random.default_rng(5)
    for style, want in (("abdominal", GOOD), ("chest", BAD)):
        for k in range(3):
            depths = tuple(float(d) for d in rng.uniform(0.3, 1.0, len(song.hints)))
            record = _run_script(SingerScript(score=song, breath_style=style,
                                              breath_depth=depths, seed=k))
            labels = [p.label for p in record.metrics.pattern_by_hint]
            assert labels == [want] * len(song.hints), f"{style}: {labels}"
    flat = _run_script(SingerScript(score=song,
                                    breath_depth=(0.0,) * len(song.hints)))
    labels = [p.label for p in flat.metrics.pattern_by_hint]
    assert labels == [INDETERMINATE] * len(song.hints)
    _ok("criterion 5: abdominal=good, chest=bad, flat=indeterminate on all hints")


def test_criterion_6_song_constraints():
    """Both bundled songs: pitch range exactly A3..C5, full chromatic
    coverage, interval histogram {1:1, 2:21, 3:5, 4:4, 5:2}, equal hint
    counts."""
    reports = {}
    for name in ("A", "B"):
        song = bundled_song(name)
        report = validate_difficulty(song)
        assert report.pitch_range_ok, name
        assert report.coverage_ok, name
        assert report.histogram_ok, name
        assert report.histogram == BUNDLED_INTERVAL_HISTOGRAM
        reports[name] = report
        pitches = {n.midi for n in song.notes}
        assert min(pitches) == MIDI_A3 and max(pitches) == MIDI_C5
    assert reports["A"].hint_count == reports["B"].hint_count
    assert reports["A"].hint_fractions == reports["B"].hint_fractions
    _ok("criterion 6: both songs meet range/coverage/histogram/hint constraints")


def test_criterion_7_persistence(tmp_path, capsys):
    """Session round-trip is bit-exact; `tutor analyze` on the persisted
    file reproduces the live metrics exactly."""
    song = bundled_song("A")
    depths = (1.0, 0.5, 1.0, 0.5, 1.0, 0.5)
    errors = tuple(0.0 if i % 4 else 120.0 for i in range(len(song.notes)))
    record = _run_script(SingerScript(score=song, pitch_error_cents=errors,
                                      breath_depth=depths))
    path = tmp_path / "take.json"
    persist(record, path)
    loaded = load(path)
    assert loaded == record

    from singtutor.cli import main

    assert main(["analyze", str(path), "--json"]) == 0
    reported = json.loads(capsys.readouterr().out)
    assert reported == record.metrics.to_dict()
    _ok("criterion 7: round-trip bit-exact; offline analyze == live metrics")


def _minute_score() -> PipeScore:
    """Three back-to-back passes of Song A on a 60 s measure grid."""
    song = bundled_song("A")
    span = round(song.total_ms)  # 19200 ms per pass
    notes, sentences, hints = [], [], []
    for k in range(3):
        offset = k * span
        base = len(notes)
        for n in song.notes:
            notes.append(Note(midi=n.midi, start_ms=n.start_ms + offset,
                              duration_ms=n.duration_ms, syllable=n.syllable))
        for s in song.sentences:
            sentences.append(Sentence(first_note=s.first_note + base,
                                      last_note=s.last_note + base))
        for h in song.hints:
            hints.append(BreathHint(sentence=h.sentence + k * len(song.sentences),
                                    window_start_ms=h.window_start_ms + offset,
                                    window_end_ms=h.window_end_ms + offset,
                                    target_fraction=h.target_fraction))
    return PipeScore(title="practice loop", tempo_bpm=song.tempo_bpm,
                     beats_per_measure=song.beats_per_measure, measures=25,
                     notes=tuple(notes), sentences=tuple(sentences),
                     hints=tuple(hints))


def test_criterion_8_throughput():
    """One minute of combined streams (1200 pitch frames + 6000 sensor
    frames) processes offline in < 15 s."""
    score = _minute_score()
    assert score.total_ms == 60000.0
    script = SingerScript(score=score)
    engine = SessionEngine(score, mode=MODE_PITCH_BREATH)
    run_calibration(engine, *synth_calibration(script))
    audio, sensor = sources.sim_streams(script)
    audio = list(audio)
    assert len(audio) == 1200
    assert len(sensor) == 6001
    start = time.perf_counter()
    record = run_session(score, sensor, audio, engine=engine)
    elapsed = time.perf_counter() - start
    assert elapsed < 15.0, f"one minute of input took {elapsed:.1f} s"
    assert record.metrics.accuracy_pct == 100.0
    _ok(f"criterion 8: 60 s of input processed in {elapsed:.2f} s")
