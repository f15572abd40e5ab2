"""Session orchestration: transport clock, stream ingestion, pipeline
fan-in, per-frame recording, and the persisted session file.

The engine is the sole owner of transport, filter, and scoring state;
inputs (sensor lines, audio frames) are fed to it in stream-time order
and commands are serialized through the same lock. Event sinks receive
one JSON-ready dict per pipeline event; the session record itself is
the lossless sink and is what gets persisted.

Two clocks are involved: stream time (the timestamps inputs arrive
with) and song position (ms into the score). Sensor device timestamps
are remapped onto stream time by first-line alignment; song position is
stream time minus an anchor that is re-established whenever playback
(re)starts or seeks.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field, replace

from singtutor.breath import (
    BreathSample,
    BreathThresholds,
    Calibration,
    CalibrationError,
    ChannelValues,
    FilterState,
    SensorFrame,
    calibrate,
    process_frame,
)
from singtutor.metrics import TakeMetrics, compute_take_metrics, score_note
from singtutor.pitch import PitchConfig, PitchFrame, detect_pitch
from singtutor.score import PipeScore

log = logging.getLogger(__name__)

MODE_PITCH = "pitch"
MODE_PITCH_BREATH = "pitch+breath"

FORCE_CEILING_N = 80.0
RECORD_VERSION = 1


class CommandRejected(RuntimeError):
    """An invalid transport/calibration command, with the reason."""


class SensorLineError(ValueError):
    """A sensor wire line that does not match the protocol."""


class SessionFormatError(ValueError):
    """A session file that cannot be loaded (bad version or structure)."""


@dataclass
class IngestStats:
    malformed: int = 0
    clamped: int = 0


def parse_sensor_line(line: str) -> SensorFrame:
    """Parse one wire line `t_ms,f_la,f_bw_l,f_bw_r,f_rb_l,f_rb_r`
    without any clock remapping or range clamping."""
    parts = line.strip().split(",")
    if len(parts) != 6:
        raise SensorLineError(f"expected 6 fields, got {len(parts)}: {line!r}")
    try:
        t = int(parts[0])
        forces = [float(p) for p in parts[1:]]
    except ValueError as e:
        raise SensorLineError(f"unparseable field in {line!r}: {e}") from e
    try:
        return SensorFrame(t, *forces)
    except ValueError as e:
        raise SensorLineError(f"invalid frame {line!r}: {e}") from e


class SensorLineParser:
    """Stateful wire-line parser: remaps device timestamps onto the
    session clock (first line lands at align_to_ms) and clamps forces
    into [0, FORCE_CEILING_N], counting what it had to fix."""

    def __init__(self, align_to_ms: int = 0):
        self.align_to_ms = align_to_ms
        self._offset: int | None = None
        self.stats = IngestStats()

    def ingest(self, line: str) -> SensorFrame:
        frame = parse_sensor_line(line)
        forces = {}
        clamped = False
        for name in ("f_la", "f_bw_l", "f_bw_r", "f_rb_l", "f_rb_r"):
            v = getattr(frame, name)
            if v > FORCE_CEILING_N:
                v = FORCE_CEILING_N
                clamped = True
            forces[name] = v
        if clamped:
            self.stats.clamped += 1
            log.debug("clamped out-of-range force in %r", line)
        if self._offset is None:
            self._offset = self.align_to_ms - frame.t_ms
        return SensorFrame(t_ms=frame.t_ms + self._offset, **forces)


@dataclass
class Transport:
    """Playback clock state. Measures and beats are 1-based."""

    tempo_bpm: float
    beats_per_measure: int
    measures: int
    state: str = "stopped"  # stopped | playing | paused
    position_ms: float = 0.0

    @property
    def beat_ms(self) -> float:
        return 60000.0 / self.tempo_bpm

    @property
    def measure_ms(self) -> float:
        return self.beats_per_measure * self.beat_ms

    @property
    def current_measure(self) -> int:
        m = int(self.position_ms // self.measure_ms) + 1
        return min(max(m, 1), self.measures)

    @property
    def current_beat(self) -> int:
        beat = int((self.position_ms % self.measure_ms) // self.beat_ms) + 1
        return min(max(beat, 1), self.beats_per_measure)

    def event(self) -> dict:
        return {"type": "transport", "state": self.state,
                "pos": round(self.position_ms),
                "measure": self.current_measure, "beat": self.current_beat}


@dataclass
class MergedFrame:
    """One line of the session timeline: stream time, song position,
    and whichever analyses landed on it."""

    t_ms: int
    position_ms: float
    breath: BreathSample | None = None
    pitch: PitchFrame | None = None


@dataclass
class SessionRecord:
    song_id: str
    mode: str
    score: PipeScore | None = None
    calibration: Calibration | None = None
    frames: list[MergedFrame] = field(default_factory=list)
    metrics: TakeMetrics | None = None

    def pitch_frames(self) -> list[PitchFrame]:
        return [f.pitch for f in self.frames if f.pitch is not None]

    def breath_samples(self) -> list[BreathSample]:
        return [f.breath for f in self.frames if f.breath is not None]


class SessionEngine:
    """Single-owner analysis consumer. Feed it inputs in stream-time
    order; it advances transport position, runs both pipelines, records
    every analysis frame, and emits live events to the attached sinks.

    All public methods are serialized through one lock, so producers and
    a command source may call in from different threads.
    """

    def __init__(self, score: PipeScore, mode: str = MODE_PITCH_BREATH,
                 pitch_config: PitchConfig | None = None,
                 calibration: Calibration | None = None,
                 song_id: str | None = None):
        if mode not in (MODE_PITCH, MODE_PITCH_BREATH):
            raise ValueError(f"unknown mode {mode!r}")
        self.score = score
        self.mode = mode
        self.pitch_config = pitch_config or PitchConfig()
        self.calibration = calibration
        self.song_id = song_id or score.title
        self.transport = Transport(tempo_bpm=score.tempo_bpm,
                                   beats_per_measure=score.beats_per_measure,
                                   measures=score.measures)
        self.record = SessionRecord(song_id=self.song_id, mode=mode,
                                    score=score, calibration=calibration)
        self.parser = SensorLineParser()
        self._filter = FilterState()
        self._anchor: float | None = None
        self._sinks: list = []
        self._lock = threading.RLock()
        self._cal_phase: str | None = None
        self._cal_exhale: list[SensorFrame] = []
        self._cal_deep: list[SensorFrame] = []
        self._note_cursor = 0
        self._hint_cursor = 0
        self._last_beat: tuple[int, int] | None = None

    # -- event fan-out ------------------------------------------------

    def add_sink(self, sink) -> None:
        self._sinks.append(sink)

    def _emit(self, event: dict) -> None:
        # A failing sink must never disturb the pipeline or the record
        # (the record itself is the lossless persistence path).
        for sink in self._sinks:
            try:
                sink(event)
            except Exception:  # noqa: BLE001
                log.exception("event sink failed; continuing")

    # -- commands -----------------------------------------------------

    def command(self, cmd: str, **args) -> Transport:
        """Execute one transport/calibration command; raises
        CommandRejected (with the reason) on invalid transitions."""
        with self._lock:
            handler = getattr(self, f"_cmd_{cmd}", None)
            if handler is None:
                raise CommandRejected(f"unknown command {cmd!r}")
            handler(**args)
            self._emit(self.transport.event())
            return replace(self.transport)

    def _cmd_play(self) -> None:
        t = self.transport
        if t.state == "playing":
            raise CommandRejected("already playing")
        if self.mode == MODE_PITCH_BREATH and self.calibration is None:
            raise CommandRejected(
                "calibrate before playing in pitch+breath mode"
            )
        if self._cal_phase is not None:
            raise CommandRejected("finish calibration before playing")
        if t.state == "stopped":
            self._reset_take()
        t.state = "playing"
        self._anchor = None

    def _cmd_pause(self) -> None:
        if self.transport.state != "playing":
            raise CommandRejected("not playing")
        self.transport.state = "paused"
        self._anchor = None

    def _cmd_seek(self, measure: int) -> None:
        t = self.transport
        if not 1 <= measure <= t.measures:
            raise CommandRejected(
                f"measure {measure} out of range 1..{t.measures}"
            )
        t.position_ms = (measure - 1) * t.measure_ms
        self._anchor = None
        self._note_cursor = self._cursor_for_position(t.position_ms)
        self._hint_cursor = sum(
            1 for h in self.score.hints if h.window_end_ms < t.position_ms
        )

    def _cmd_stop(self) -> None:
        if self.transport.state == "stopped":
            raise CommandRejected("already stopped")
        self._finalize_take()
        self.transport.state = "stopped"

    def _cmd_calibrate_begin(self) -> None:
        if self.mode != MODE_PITCH_BREATH:
            raise CommandRejected("calibration only applies in pitch+breath mode")
        if self.transport.state == "playing":
            raise CommandRejected("pause before calibrating")
        self._cal_phase = "exhale"
        self._cal_exhale = []
        self._cal_deep = []
        self._emit({"type": "calibration", "state": "capturing_exhale"})

    def _cmd_calibrate_mark_exhaled(self) -> None:
        if self._cal_phase != "exhale":
            raise CommandRejected("calibration is not capturing the exhale")
        self._cal_phase = "deep"
        self._emit({"type": "calibration", "state": "capturing_deep"})

    def _cmd_calibrate_mark_deep(self) -> None:
        if self._cal_phase != "deep":
            raise CommandRejected("calibration is not capturing the deep breath")
        try:
            cal = calibrate(self._cal_exhale, self._cal_deep)
        except CalibrationError as e:
            self._cal_phase = None
            raise CommandRejected(str(e)) from e
        self._cal_phase = None
        self.calibration = cal
        self.record.calibration = cal
        self._emit({"type": "calibration", "state": "done",
                    "baseline": vars(cal.baseline), "deep_max": vars(cal.deep_max)})

    def load_score(self, score: PipeScore, song_id: str | None = None) -> None:
        """Switch songs. Only valid while stopped; keeps the current
        calibration (the belt has not moved)."""
        with self._lock:
            if self.transport.state != "stopped":
                raise CommandRejected("stop before loading another song")
            self.score = score
            self.song_id = song_id or score.title
            self.transport = Transport(tempo_bpm=score.tempo_bpm,
                                       beats_per_measure=score.beats_per_measure,
                                       measures=score.measures)
            self._reset_take()
            self._emit(self.transport.event())

    def _cursor_for_position(self, position_ms: float) -> int:
        for i, n in enumerate(self.score.notes):
            if n.end_ms > position_ms:
                return i
        return len(self.score.notes)

    def _reset_take(self) -> None:
        self.record = SessionRecord(song_id=self.song_id, mode=self.mode,
                                    score=self.score, calibration=self.calibration)
        self._filter = FilterState()
        self.transport.position_ms = 0.0
        self._note_cursor = 0
        self._hint_cursor = 0
        self._last_beat = None

    # -- stream inputs ------------------------------------------------

    def feed_sensor_line(self, line: str) -> BreathSample | None:
        """Ingest one wire line. Malformed lines are logged, counted,
        and dropped. Returns the BreathSample when one was produced."""
        with self._lock:
            try:
                frame = self.parser.ingest(line)
            except SensorLineError as e:
                self.parser.stats.malformed += 1
                log.warning("dropped sensor line: %s", e)
                return None
            if self._cal_phase == "exhale":
                self._cal_exhale.append(frame)
                return None
            if self._cal_phase == "deep":
                self._cal_deep.append(frame)
                return None
            if self.transport.state != "playing" or self.mode != MODE_PITCH_BREATH:
                return None
            pos = self._position_of(frame.t_ms)
            sample = process_frame(frame, self.calibration, self._filter)
            sample = replace(sample, t_ms=round(pos))
            self._append(frame.t_ms, pos, breath=sample)
            self._emit({"type": "breath", "t": sample.t_ms,
                        "la_n": sample.la_n, "bw_n": sample.bw_n,
                        "rb_n": sample.rb_n, "volume": sample.volume})
            self._advance(pos)
            return sample

    def feed_audio(self, t_ms: int, samples) -> PitchFrame | None:
        """Analyze one frame_ms block of mono PCM starting at stream
        time t_ms. Dropped unless playing."""
        with self._lock:
            if self.transport.state != "playing":
                return None
            pos = self._position_of(t_ms)
            pf = detect_pitch(samples, self.pitch_config, t_ms=round(pos))
            self._append(t_ms, pos, pitch=pf)
            event = {"type": "pitch", "t": pf.t_ms, "voiced": pf.voiced}
            if pf.voiced:
                event["hz"] = pf.freq_hz
                event["midi"] = pf.midi_float
            self._emit(event)
            self._advance(pos + self.pitch_config.frame_ms)
            return pf

    def _position_of(self, t_stream_ms: float) -> float:
        if self._anchor is None:
            self._anchor = t_stream_ms - self.transport.position_ms
        return t_stream_ms - self._anchor

    def _append(self, t_ms: int, position_ms: float,
                breath: BreathSample | None = None,
                pitch: PitchFrame | None = None) -> None:
        frames = self.record.frames
        if frames and frames[-1].t_ms == t_ms:
            merged = frames[-1]
            if breath is not None and merged.breath is None:
                merged.breath = breath
                return
            if pitch is not None and merged.pitch is None:
                merged.pitch = pitch
                return
        frames.append(MergedFrame(t_ms=t_ms, position_ms=position_ms,
                                  breath=breath, pitch=pitch))

    # -- live scoring -------------------------------------------------

    def _advance(self, position_ms: float) -> None:
        t = self.transport
        if position_ms <= t.position_ms:
            return
        t.position_ms = position_ms
        beat = (t.current_measure, t.current_beat)
        if beat != self._last_beat:
            self._last_beat = beat
            self._emit(t.event())
        notes = self.score.notes
        while self._note_cursor < len(notes) and position_ms >= notes[self._note_cursor].end_ms:
            self._finalize_note(self._note_cursor)
            self._note_cursor += 1
        if self.mode != MODE_PITCH_BREATH:
            return
        hints = self.score.hints
        while self._hint_cursor < len(hints) and position_ms > hints[self._hint_cursor].window_end_ms:
            self._finalize_hint(self._hint_cursor)
            self._hint_cursor += 1

    def _finalize_note(self, index: int) -> None:
        note = self.score.notes[index]
        result = score_note(note, self.record.pitch_frames(),
                            frame_ms=self.pitch_config.frame_ms)
        self._emit({"type": "note_result", "note": index,
                    "correct": result.correct, "correct_ms": result.correct_ms,
                    "required_ms": result.required_ms})

    def _finalize_hint(self, index: int) -> None:
        from singtutor.metrics import hint_compliance, patterns_by_hint

        hint = self.score.hints[index]
        samples = self.record.breath_samples()
        thresholds = BreathThresholds.from_calibration(self.calibration)
        pattern = patterns_by_hint(self.score, samples, thresholds)[index]
        achieved = hint_compliance(self.score, samples)[index]
        self._emit({"type": "pattern", "hint": index, "label": pattern.label,
                    "delta_la": pattern.delta_la, "delta_bw": pattern.delta_bw,
                    "delta_rb": pattern.delta_rb})
        self._emit({"type": "hint_result", "hint": index,
                    "achieved": achieved, "target": hint.target_fraction})

    def _finalize_take(self) -> None:
        while self._note_cursor < len(self.score.notes):
            self._finalize_note(self._note_cursor)
            self._note_cursor += 1
        if self.mode == MODE_PITCH_BREATH:
            while self._hint_cursor < len(self.score.hints):
                self._finalize_hint(self._hint_cursor)
                self._hint_cursor += 1
        thresholds = (BreathThresholds.from_calibration(self.calibration)
                      if self.calibration is not None else None)
        self.record.metrics = compute_take_metrics(
            self.score, self.record.pitch_frames(),
            self.record.breath_samples(), thresholds,
        )
        self._emit({"type": "take_metrics", **self.record.metrics.to_dict()})


def _peek_line_time(line: str) -> int:
    head = line.split(",", 1)[0]
    try:
        return int(head)
    except ValueError:
        return -1


def run_session(score: PipeScore, sensor_lines=None, audio_frames=None, *,
                mode: str = MODE_PITCH_BREATH,
                calibration: Calibration | None = None,
                pitch_config: PitchConfig | None = None,
                sinks=(), song_id: str | None = None,
                engine: SessionEngine | None = None) -> SessionRecord:
    """Run one complete take offline: merge the two input streams by
    stream time, feed the engine, stop, and return the finished record.

    sensor_lines is an iterable of wire lines; audio_frames an iterable
    of (t_ms, samples). Sensor lines win timestamp ties so a breath
    sample lands before the pitch frame that starts at the same instant.
    """
    if engine is None:
        engine = SessionEngine(score, mode=mode, calibration=calibration,
                               pitch_config=pitch_config, song_id=song_id)
    for sink in sinks:
        engine.add_sink(sink)
    engine.command("play")

    sensor_iter = iter(sensor_lines or ())
    audio_iter = iter(audio_frames or ())
    next_line = next(sensor_iter, None)
    next_audio = next(audio_iter, None)
    while next_line is not None or next_audio is not None:
        if next_audio is None or (
            next_line is not None
            and _peek_line_time(next_line) <= next_audio[0]
        ):
            engine.feed_sensor_line(next_line)
            next_line = next(sensor_iter, None)
        else:
            engine.feed_audio(next_audio[0], next_audio[1])
            next_audio = next(audio_iter, None)
    engine.command("stop")
    return engine.record


def run_calibration(engine: SessionEngine, exhale_lines, deep_lines) -> Calibration:
    """Drive the calibration ritual on an engine from two pre-captured
    line streams (the simulator's, or a device recording)."""
    engine.command("calibrate_begin")
    for line in exhale_lines:
        engine.feed_sensor_line(line)
    engine.command("calibrate_mark_exhaled")
    for line in deep_lines:
        engine.feed_sensor_line(line)
    engine.command("calibrate_mark_deep")
    return engine.calibration


# -- persistence ------------------------------------------------------

def _breath_dict(s: BreathSample) -> dict:
    return {"t": s.t_ms, "la": s.la, "bw": s.bw, "rb": s.rb,
            "la_n": s.la_n, "bw_n": s.bw_n, "rb_n": s.rb_n,
            "volume": s.volume}


def _pitch_dict(p: PitchFrame) -> dict:
    return {"t": p.t_ms, "voiced": p.voiced, "hz": p.freq_hz,
            "midi": p.midi_float, "energy_db": p.energy_db}


def _cal_dict(c: Calibration | None):
    if c is None:
        return None
    return {"baseline": vars(c.baseline), "deep_max": vars(c.deep_max),
            "captured_at_ms": c.captured_at_ms}


def save_calibration(cal: Calibration, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_cal_dict(cal), f, indent=2)


def load_calibration(path) -> Calibration:
    with open(path, encoding="utf-8") as f:
        d = json.load(f)
    return Calibration(baseline=ChannelValues(**d["baseline"]),
                       deep_max=ChannelValues(**d["deep_max"]),
                       captured_at_ms=d.get("captured_at_ms", 0))


def persist(record: SessionRecord, path) -> None:
    """Write a session record as versioned UTF-8 JSON. Frames are
    streamed one per line so arbitrarily long takes never buffer the
    whole document."""
    from singtutor.score import serialize_score

    with open(path, "w", encoding="utf-8") as f:
        f.write('{"version": %d,\n' % RECORD_VERSION)
        f.write('"song_id": %s,\n' % json.dumps(record.song_id))
        f.write('"mode": %s,\n' % json.dumps(record.mode))
        score_doc = None if record.score is None else json.loads(serialize_score(record.score))
        f.write('"score": %s,\n' % json.dumps(score_doc))
        f.write('"calibration": %s,\n' % json.dumps(_cal_dict(record.calibration)))
        f.write('"frames": [\n')
        last = len(record.frames) - 1
        for i, fr in enumerate(record.frames):
            d = {
                "t": fr.t_ms,
                "pos": fr.position_ms,
                "breath": None if fr.breath is None else _breath_dict(fr.breath),
                "pitch": None if fr.pitch is None else _pitch_dict(fr.pitch),
            }
            f.write(json.dumps(d, separators=(",", ":")))
            f.write(",\n" if i != last else "\n")
        f.write('],\n')
        metrics = None if record.metrics is None else record.metrics.to_dict()
        f.write('"metrics": %s\n}\n' % json.dumps(metrics))


def load(path) -> SessionRecord:
    """Inverse of persist; numeric fields round-trip bit-exactly."""
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise SessionFormatError(f"not a session file: {e}") from e
    version = doc.get("version")
    if version != RECORD_VERSION:
        raise SessionFormatError(
            f"unsupported session version {version!r} (expected {RECORD_VERSION})"
        )
    from singtutor.score import parse_score

    score_doc = doc.get("score")
    score = None if score_doc is None else parse_score(json.dumps(score_doc))
    cal = doc["calibration"]
    calibration = None
    if cal is not None:
        calibration = Calibration(
            baseline=ChannelValues(**cal["baseline"]),
            deep_max=ChannelValues(**cal["deep_max"]),
            captured_at_ms=cal["captured_at_ms"],
        )
    frames = []
    for d in doc["frames"]:
        breath = d["breath"]
        pitch = d["pitch"]
        frames.append(MergedFrame(
            t_ms=d["t"],
            position_ms=d["pos"],
            breath=None if breath is None else BreathSample(
                t_ms=breath["t"], la=breath["la"], bw=breath["bw"],
                rb=breath["rb"], la_n=breath["la_n"], bw_n=breath["bw_n"],
                rb_n=breath["rb_n"], volume=breath["volume"],
            ),
            pitch=None if pitch is None else PitchFrame(
                t_ms=pitch["t"], voiced=pitch["voiced"], freq_hz=pitch["hz"],
                midi_float=pitch["midi"], energy_db=pitch["energy_db"],
            ),
        ))
    metrics = doc["metrics"]
    return SessionRecord(
        song_id=doc["song_id"],
        mode=doc["mode"],
        score=score,
        calibration=calibration,
        frames=frames,
        metrics=None if metrics is None else TakeMetrics.from_dict(metrics),
    )
