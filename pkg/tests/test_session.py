"""Session engine: ingest, transport state machine, recording,
persistence round-trips."""

from __future__ import annotations

import numpy as np
import pytest

from singtutor import sources
from singtutor.breath import GOOD
from singtutor.session import (
    MODE_PITCH,
    MODE_PITCH_BREATH,
    CommandRejected,
    SensorLineError,
    SessionEngine,
    SessionFormatError,
    SensorLineParser,
    load,
    parse_sensor_line,
    persist,
    run_calibration,
    run_session,
)
from singtutor.simulate import SingerScript, synth_calibration


@pytest.fixture
def perfect_take(song_a):
    """One complete perfect-singer session (shared by several tests)."""
    script = SingerScript(score=song_a)
    engine = SessionEngine(song_a, mode=MODE_PITCH_BREATH)
    run_calibration(engine, *synth_calibration(script))
    audio, sensor = sources.sim_streams(script)
    events = []
    engine.add_sink(events.append)
    record = run_session(song_a, sensor, audio, engine=engine)
    return record, events, engine


# -- wire protocol ------------------------------------------------------

def test_parse_sensor_line_grammar():
    f = parse_sensor_line("1200,10.5,8.2,8.4,9.1,9.3")
    assert f.t_ms == 1200
    assert f.f_la == 10.5
    assert f.reduced() == (10.5, 8.3, 9.2)


def test_parse_sensor_line_malformed():
    with pytest.raises(SensorLineError, match="expected 6 fields"):
        parse_sensor_line("1200,10.5,8.2")
    with pytest.raises(SensorLineError, match="unparseable"):
        parse_sensor_line("1200,ten,8.2,8.4,9.1,9.3")
    with pytest.raises(SensorLineError):
        parse_sensor_line("1200,-3.0,8.2,8.4,9.1,9.3")


def test_parser_clamps_out_of_range():
    parser = SensorLineParser()
    f = parser.ingest("1200,10.5,8.2,8.4,9.1,95.0")
    assert f.f_rb_r == 80.0
    assert parser.stats.clamped == 1


def test_parser_remaps_device_clock():
    parser = SensorLineParser(align_to_ms=0)
    f1 = parser.ingest("5000,8,8,8,8,8")
    f2 = parser.ingest("5010,8,8,8,8,8")
    assert f1.t_ms == 0
    assert f2.t_ms == 10


def test_engine_drops_malformed_lines(song_a, flat_calibration):
    engine = SessionEngine(song_a, calibration=flat_calibration)
    engine.command("play")
    assert engine.feed_sensor_line("bogus") is None
    assert engine.parser.stats.malformed == 1
    assert engine.feed_sensor_line("0,8,8,8,8,8") is not None


# -- transport ----------------------------------------------------------

def test_play_from_stopped_starts_at_zero(song_a, flat_calibration):
    engine = SessionEngine(song_a, calibration=flat_calibration)
    t = engine.command("play")
    assert t.state == "playing"
    assert t.position_ms == 0.0
    assert t.current_measure == 1
    assert t.current_beat == 1


def test_play_requires_calibration_in_breath_mode(song_a):
    engine = SessionEngine(song_a, mode=MODE_PITCH_BREATH)
    with pytest.raises(CommandRejected, match="calibrate"):
        engine.command("play")


def test_pitch_mode_plays_without_calibration(song_a):
    engine = SessionEngine(song_a, mode=MODE_PITCH)
    assert engine.command("play").state == "playing"


def test_seek_targets_measure_starts(song_a, flat_calibration):
    engine = SessionEngine(song_a, calibration=flat_calibration)
    engine.command("play")
    t = engine.command("seek", measure=3)
    assert t.state == "playing"
    assert t.position_ms == 2 * song_a.measure_ms
    assert t.current_measure == 3


def test_seek_beyond_last_measure_rejected(song_a, flat_calibration):
    engine = SessionEngine(song_a, calibration=flat_calibration)
    with pytest.raises(CommandRejected, match="out of range"):
        engine.command("seek", measure=song_a.measures + 1)


def test_invalid_transitions_rejected(song_a, flat_calibration):
    engine = SessionEngine(song_a, calibration=flat_calibration)
    with pytest.raises(CommandRejected, match="not playing"):
        engine.command("pause")
    with pytest.raises(CommandRejected, match="already stopped"):
        engine.command("stop")
    engine.command("play")
    with pytest.raises(CommandRejected, match="already playing"):
        engine.command("play")
    with pytest.raises(CommandRejected, match="unknown command"):
        engine.command("rewind")


def test_pause_seek_resume_position_sequence(song_a, flat_calibration, cfg):
    engine = SessionEngine(song_a, calibration=flat_calibration)
    engine.command("play")
    silence = np.zeros(cfg.frame_samples)
    # play through measure 1..4 boundary (measure_ms = 2400)
    for i in range(4 * 48):
        engine.feed_audio(i * 50, silence)
    assert engine.transport.current_measure >= 4
    engine.command("pause")
    paused_len = len(engine.record.frames)
    # frames fed while paused are not recorded
    assert engine.feed_audio(100000, silence) is None
    assert engine.feed_sensor_line("100000,8,8,8,8,8") is None
    assert len(engine.record.frames) == paused_len
    engine.command("seek", measure=2)
    engine.command("play")
    t_resume = 4 * 48 * 50
    engine.feed_audio(t_resume, silence)
    # the resumed frame lands at the measure-2 start: the position
    # sequence in the record reflects the jump
    positions = [f.position_ms for f in engine.record.frames]
    assert positions[-1] == pytest.approx(song_a.measure_ms)
    assert positions[-2] > positions[-1]


def test_load_score_switches_song(song_a, song_b, flat_calibration):
    engine = SessionEngine(song_a, calibration=flat_calibration)
    engine.load_score(song_b, song_id="B")
    assert engine.score is song_b
    engine.command("play")
    with pytest.raises(CommandRejected, match="stop"):
        engine.load_score(song_a)


def test_calibration_ritual_via_commands(song_a):
    script = SingerScript(score=song_a)
    exhale, deep = synth_calibration(script)
    engine = SessionEngine(song_a, mode=MODE_PITCH_BREATH)
    events = []
    engine.add_sink(events.append)
    cal = run_calibration(engine, exhale, deep)
    assert cal.baseline.la == pytest.approx(8.0)
    states = [e["state"] for e in events if e["type"] == "calibration"]
    assert states == ["capturing_exhale", "capturing_deep", "done"]
    assert engine.command("play").state == "playing"


def test_calibration_failure_rejected_with_reason(song_a):
    engine = SessionEngine(song_a, mode=MODE_PITCH_BREATH)
    engine.command("calibrate_begin")
    for i in range(60):
        engine.feed_sensor_line(f"{i * 10},8,8,8,8,8")
    engine.command("calibrate_mark_exhaled")
    for i in range(60, 120):
        engine.feed_sensor_line(f"{i * 10},8,8,8,8,8")
    with pytest.raises(CommandRejected, match="belt not fitted"):
        engine.command("calibrate_mark_deep")


# -- end-to-end session -------------------------------------------------

def test_perfect_singer_end_to_end(perfect_take, song_a):
    record, events, _ = perfect_take
    m = record.metrics
    assert m.accuracy_pct == 100.0
    assert [p.label for p in m.pattern_by_hint] == [GOOD] * len(song_a.hints)
    # offline re-scoring of the persisted frames is the oracle
    from singtutor.breath import BreathThresholds
    from singtutor.metrics import compute_take_metrics

    again = compute_take_metrics(
        song_a, record.pitch_frames(), record.breath_samples(),
        BreathThresholds.from_calibration(record.calibration))
    assert again == m


def test_empty_sources_give_empty_record(song_a, flat_calibration):
    record = run_session(song_a, [], [], calibration=flat_calibration)
    assert record.frames == []
    assert record.metrics.accuracy_pct == 0.0
    assert record.metrics.correct_notes == 0


def test_record_frames_strictly_ordered_and_complete(perfect_take):
    record, _, engine = perfect_take
    ts = [f.t_ms for f in record.frames]
    assert ts == sorted(ts)
    assert len(ts) == len(set(ts))  # merged records, no duplicates
    # lossless: every analysis fed while playing is in the record
    n_breath = len(record.breath_samples())
    n_pitch = len(record.pitch_frames())
    assert n_breath == 1921  # 19201 ms take at 100 Hz
    assert n_pitch == 384    # 19200 ms at 50 ms frames


def test_pitch_frames_on_50ms_grid(perfect_take):
    record, _, _ = perfect_take
    for pf in record.pitch_frames():
        assert pf.t_ms % 50 == 0


def test_live_events_match_final_metrics(perfect_take, song_a):
    record, events, _ = perfect_take
    note_events = [e for e in events if e["type"] == "note_result"]
    assert len(note_events) == len(song_a.notes)
    assert [e["note"] for e in note_events] == list(range(len(song_a.notes)))
    for e, r in zip(note_events, record.metrics.note_results):
        assert e["correct"] == r.correct
        assert e["correct_ms"] == r.correct_ms
    pattern_events = [e for e in events if e["type"] == "pattern"]
    assert [e["label"] for e in pattern_events] == \
        [p.label for p in record.metrics.pattern_by_hint]
    hint_events = [e for e in events if e["type"] == "hint_result"]
    assert [e["achieved"] for e in hint_events] == record.metrics.hint_compliance


def test_pitch_only_mode_has_zero_breath_samples(song_a):
    script = SingerScript(score=song_a)
    audio, sensor = sources.sim_streams(script)
    record = run_session(song_a, sensor, audio, mode=MODE_PITCH)
    assert record.mode == MODE_PITCH
    assert record.breath_samples() == []
    assert record.metrics.accuracy_pct == 100.0
    assert record.metrics.bdr is None
    assert record.metrics.pattern_by_hint == []


def test_transport_events_cover_beats(perfect_take, song_a):
    _, events, _ = perfect_take
    beats = {(e["measure"], e["beat"]) for e in events if e["type"] == "transport"}
    # every beat of every measure the take crossed is announced
    full = {(m, b) for m in range(1, song_a.measures + 1)
            for b in range(1, song_a.beats_per_measure + 1)}
    assert full <= beats


# -- persistence --------------------------------------------------------

def test_persist_load_roundtrip_bit_exact(perfect_take, tmp_path):
    record, _, _ = perfect_take
    path = tmp_path / "take.json"
    persist(record, path)
    loaded = load(path)
    assert loaded == record  # dataclass equality: every numeric field exact


def test_load_rejects_unknown_version(perfect_take, tmp_path):
    record, _, _ = perfect_take
    path = tmp_path / "take.json"
    persist(record, path)
    text = path.read_text().replace('"version": 1', '"version": 99', 1)
    path.write_text(text)
    with pytest.raises(SessionFormatError, match="version"):
        load(path)


def test_load_rejects_non_session_file(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("not json at all")
    with pytest.raises(SessionFormatError):
        load(path)


def test_reanalysis_of_persisted_record_identical(perfect_take, tmp_path, song_a):
    from singtutor.breath import BreathThresholds
    from singtutor.metrics import compute_take_metrics

    record, _, _ = perfect_take
    path = tmp_path / "take.json"
    persist(record, path)
    loaded = load(path)
    metrics = compute_take_metrics(
        loaded.score, loaded.pitch_frames(), loaded.breath_samples(),
        BreathThresholds.from_calibration(loaded.calibration))
    assert metrics == record.metrics


def test_calibration_save_load_roundtrip(flat_calibration, tmp_path):
    from singtutor.session import load_calibration, save_calibration

    path = tmp_path / "cal.json"
    save_calibration(flat_calibration, path)
    assert load_calibration(path) == flat_calibration


def test_failing_sink_does_not_disturb_record(song_a, flat_calibration, cfg):
    def bad_sink(event):
        raise RuntimeError("ui went away")

    engine = SessionEngine(song_a, calibration=flat_calibration)
    engine.add_sink(bad_sink)
    engine.command("play")
    engine.feed_sensor_line("0,10,8,8,9,9")
    engine.feed_audio(0, np.zeros(cfg.frame_samples))
    engine.command("stop")
    # both inputs landed (merged at t=0) despite the sink failing
    assert len(engine.record.frames) == 1
    assert engine.record.frames[0].breath is not None
    assert engine.record.frames[0].pitch is not None
    assert engine.record.metrics is not None


# -- throughput guard (the full-minute version is in acceptance) --------

def test_one_second_of_input_processes_quickly(song_a, flat_calibration, cfg):
    import time

    engine = SessionEngine(song_a, calibration=flat_calibration)
    engine.command("play")
    tone = np.sin(2 * np.pi * 220.0 * np.arange(cfg.frame_samples) / cfg.sample_rate_hz)
    start = time.perf_counter()
    audio_t = 0
    for t in range(0, 1000, 10):
        engine.feed_sensor_line(f"{t},10,8,8,9,9")
        if t % 50 == 0:
            engine.feed_audio(t, tone)
            audio_t += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 0.25, f"1 s of input took {elapsed:.3f} s"
