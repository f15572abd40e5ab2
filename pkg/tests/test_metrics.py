"""Scoring rules: note correctness, accuracy, BDR, take comparison."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from singtutor.breath import BreathSample
from singtutor.metrics import (
    ChannelBdr,
    TakeMetrics,
    bdr,
    bdr_all,
    compare_takes,
    hint_compliance,
    pitch_accuracy,
    score_note,
)
from singtutor.pitch import PitchFrame, hz_to_midi
from singtutor.score import Note


def frame(t, hz, voiced=True):
    return PitchFrame(t_ms=t, voiced=voiced, freq_hz=hz,
                      midi_float=hz_to_midi(hz) if hz > 0 else 0.0,
                      energy_db=-10.0 if voiced else -120.0)


A4 = Note(midi=69, start_ms=0, duration_ms=1000, syllable="la")


def in_tune_frames(start, count, hz=440.0):
    return [frame(start + 50 * i, hz) for i in range(count)]


def test_fully_in_tune_note():
    r = score_note(A4, in_tune_frames(0, 20))
    assert r.correct_ms == 1000.0
    assert r.correct


def test_exactly_ten_percent_is_incorrect():
    # 2 frames x 50 ms = 100 ms = exactly 10% of 1000 ms: strict rule
    r = score_note(A4, in_tune_frames(0, 2))
    assert r.correct_ms == 100.0
    assert r.required_ms == 100.0
    assert not r.correct


def test_ten_percent_plus_one_frame_is_correct():
    r = score_note(A4, in_tune_frames(0, 3))
    assert r.correct_ms == 150.0
    assert r.correct


def test_quarter_tone_edge_frames():
    # 452 Hz is inside the quarter-tone of A4 (boundary ~452.89 Hz);
    # 466 Hz is a semitone away. 150 ms in tune > 100 ms required.
    frames = in_tune_frames(0, 3, hz=452.0) + in_tune_frames(150, 17, hz=466.16)
    r = score_note(A4, frames)
    assert r.correct_ms == 150.0
    assert r.correct


def test_boundary_frequency_does_not_count():
    boundary = 440.0 * 2.0 ** (1.0 / 24.0)
    r = score_note(A4, in_tune_frames(0, 20, hz=boundary))
    assert r.correct_ms == 0.0
    assert not r.correct


def test_unvoiced_frames_never_count():
    frames = [frame(50 * i, 440.0, voiced=False) for i in range(20)]
    r = score_note(A4, frames)
    assert r.correct_ms == 0.0


def test_no_overlapping_frames_gives_zero():
    r = score_note(A4, in_tune_frames(2000, 5))
    assert r.correct_ms == 0.0
    assert not r.correct


def test_partial_overlap_prorated():
    # one frame straddles the note start by 30 ms
    note = Note(midi=69, start_ms=20, duration_ms=1000, syllable="la")
    r = score_note(note, [frame(0, 440.0)])
    assert r.correct_ms == 30.0


def test_frame_order_invariance():
    rng = np.random.default_rng(2)
    frames = in_tune_frames(0, 10) + in_tune_frames(500, 5, hz=470.0)
    shuffled = list(frames)
    rng.shuffle(shuffled)
    assert score_note(A4, frames) == score_note(A4, shuffled)


def test_adding_in_tune_frame_never_decreases(song_a):
    frames = in_tune_frames(600, 4, hz=220.0)
    base = [score_note(n, frames) for n in song_a.notes]
    extended = frames + [frame(600 + 200, 220.0)]
    for n, before in zip(song_a.notes, base):
        after = score_note(n, extended)
        assert after.correct_ms >= before.correct_ms


def test_pitch_accuracy_endpoints(song_a):
    # every frame in tune for every note
    frames = []
    for n in song_a.notes:
        for k in range(n.duration_ms // 50):
            frames.append(frame(n.start_ms + 50 * k,
                                440.0 * 2 ** ((n.midi - 69) / 12)))
    assert pitch_accuracy(song_a, frames) == 100.0
    assert pitch_accuracy(song_a, []) == 0.0


def test_pitch_accuracy_empty_score_rejected(song_a):
    from singtutor.score import PipeScore

    empty = PipeScore(title="x", tempo_bpm=100, beats_per_measure=4,
                      measures=1, notes=(), sentences=(), hints=())
    with pytest.raises(ValueError):
        pitch_accuracy(empty, [])


def breath_sample(t, la, bw=0.0, rb=0.0, volume=0.0):
    return BreathSample(t_ms=t, la=la, bw=bw, rb=rb, la_n=la / 12,
                        bw_n=bw / 12, rb_n=rb / 12, volume=volume)


def test_bdr_examples():
    const = [breath_sample(i * 10, 4.0) for i in range(10)]
    assert bdr(const, "la") == 0.0
    tri = [breath_sample(i * 10, v) for i, v in enumerate([0, 4, 8, 12, 8, 4, 0])]
    assert bdr(tri, "la") == 12.0
    with pytest.raises(ValueError):
        bdr([breath_sample(0, 1.0)], "la")


@given(st.lists(st.floats(0, 60), min_size=2, max_size=100))
def test_bdr_equals_brute_force(values):
    samples = [breath_sample(i * 10, v) for i, v in enumerate(values)]
    assert bdr(samples, "la") == max(values) - min(values)


def take(la=10.0, rb=5.0):
    return TakeMetrics(accuracy_pct=50.0, correct_notes=1, total_notes=2,
                       bdr=ChannelBdr(la=la, bw=3.0, rb=rb))


def test_compare_takes_abdomen_improvement():
    result = compare_takes(take(), take(la=10.0 + 2.52))
    assert result.abdomen_support_improved
    assert not result.ribs_portion_reduced
    assert not result.both
    assert result.delta_bdr_la == pytest.approx(2.52)


def test_compare_takes_identical_all_false():
    result = compare_takes(take(), take())
    assert not result.abdomen_support_improved
    assert not result.ribs_portion_reduced
    assert not result.both


def test_compare_takes_both():
    result = compare_takes(take(), take(la=11.0, rb=5.0 - 0.44))
    assert result.both
    assert result.delta_bdr_rb == pytest.approx(-0.44)


def test_compare_takes_invariant_to_uncompared_channels():
    a, b = take(), take(la=12.0)
    shifted_a = TakeMetrics(accuracy_pct=50.0, correct_notes=1, total_notes=2,
                            bdr=ChannelBdr(la=a.bdr.la, bw=a.bdr.bw + 7.0, rb=a.bdr.rb))
    shifted_b = TakeMetrics(accuracy_pct=50.0, correct_notes=1, total_notes=2,
                            bdr=ChannelBdr(la=b.bdr.la, bw=b.bdr.bw + 7.0, rb=b.bdr.rb))
    assert compare_takes(a, b) == compare_takes(shifted_a, shifted_b)


def test_compare_takes_requires_breath_metrics():
    pitch_only = TakeMetrics(accuracy_pct=10.0, correct_notes=1, total_notes=10)
    with pytest.raises(ValueError):
        compare_takes(pitch_only, take())


def test_hint_compliance_window_logic(song_a):
    h0 = song_a.hints[0]
    inside = [breath_sample(h0.window_start_ms + 100, 6.0, volume=0.5),
              breath_sample(h0.window_start_ms + 200, 6.0, volume=0.3)]
    achieved = hint_compliance(song_a, inside)
    assert achieved[0] == 0.5
    assert achieved[1:] == [0.0] * (len(song_a.hints) - 1)


def test_hint_compliance_no_samples(song_a):
    assert hint_compliance(song_a, []) == [0.0] * len(song_a.hints)


def test_take_metrics_roundtrip_dict(song_a):
    m = TakeMetrics(accuracy_pct=75.0, correct_notes=3, total_notes=4,
                    bdr=ChannelBdr(1.0, 2.0, 3.0), hint_compliance=[0.5, 0.25])
    assert TakeMetrics.from_dict(m.to_dict()) == m


def test_bdr_all_channels():
    samples = [breath_sample(0, 1.0, bw=2.0, rb=3.0),
               breath_sample(10, 5.0, bw=2.5, rb=9.0)]
    assert bdr_all(samples) == ChannelBdr(la=4.0, bw=0.5, rb=6.0)
