"""Deterministic singer simulator: paired audio + sensor streams.

Replaces the microphone and the wearable belt for tests, demos, and
offline runs. A SingerScript pins down everything the virtual singer
does (per-note pitch error, breathing style and depth, noise levels), so
for noiseless scripts the whole pipeline outcome is predictable in
closed form and byte-identical across runs with the same seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from singtutor.breath import BAD, GOOD, INDETERMINATE
from singtutor.pitch import midi_to_hz
from singtutor.score import PipeScore, bundled_song, load_score

SENSOR_BASELINE_N = 8.0
INHALE_AMPLITUDE_N = 12.0   # deep-breath rise; keeps forces mid-range of 5..60 N
SENSOR_MIN_N = 5.0
SENSOR_MAX_N = 60.0
RAMP_MS = 20.0              # audio amplitude ramp at note edges
HARMONIC_DB = (-12.0, -18.0)  # 2nd/3rd partials relative to the fundamental

# Share of the inhalation amplitude each style routes to (LA, BW, RB).
# Abdominal breaths leave the ribs untouched; chest breaths leave the
# abdomen untouched; the waist moves a little in both.
STYLE_ROUTES = {
    "abdominal": (1.0, 0.4, 0.0),
    "chest": (0.0, 0.2, 1.0),
}

# Calibration capture layout (one guided deep breath, all channels full).
CAL_EXHALE_MS = 1000
CAL_RISE_MS = 500
CAL_HOLD_MS = 1500
CAL_FALL_MS = 500
CAL_REST_MS = 500


@dataclass
class SingerScript:
    """One fully-specified virtual performance of a score."""

    score: PipeScore
    pitch_error_cents: tuple[float, ...] = ()
    timing_jitter_ms: int = 0
    breath_style: str = "abdominal"   # abdominal | chest | mixed
    mix_weight: float = 0.5           # chest share when style is mixed
    breath_depth: tuple[float, ...] = ()
    sensor_noise_rms_n: float = 0.0
    audio_noise_dbfs: float | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.pitch_error_cents:
            self.pitch_error_cents = (0.0,) * len(self.score.notes)
        if not self.breath_depth:
            self.breath_depth = (1.0,) * len(self.score.hints)
        if len(self.pitch_error_cents) != len(self.score.notes):
            raise ValueError("pitch_error_cents length must match note count")
        if len(self.breath_depth) != len(self.score.hints):
            raise ValueError("breath_depth length must match hint count")
        if self.breath_style not in ("abdominal", "chest", "mixed"):
            raise ValueError(f"unknown breath_style {self.breath_style!r}")
        if not all(0.0 <= d <= 1.0 for d in self.breath_depth):
            raise ValueError("breath_depth values must be in [0, 1]")

    def routes(self) -> tuple[float, float, float]:
        if self.breath_style == "mixed":
            w = self.mix_weight
            abd = STYLE_ROUTES["abdominal"]
            che = STYLE_ROUTES["chest"]
            return tuple((1 - w) * a + w * c for a, c in zip(abd, che))
        return STYLE_ROUTES[self.breath_style]

    def expected_correct_notes(self) -> int:
        """Notes whose scripted error stays inside the quarter-tone."""
        return sum(abs(c) < 50.0 for c in self.pitch_error_cents)

    def expected_accuracy_pct(self) -> float:
        return 100.0 * self.expected_correct_notes() / len(self.score.notes)

    def expected_labels(self) -> list[str]:
        """Predicted per-hint classification for noiseless scripts.

        Valid for depths that are 0 (flat -> indeterminate) or >= 0.25
        (deep enough to clear the rise threshold over any decay residual
        of the previous breath).
        """
        out = []
        for d in self.breath_depth:
            if d == 0.0:
                out.append(INDETERMINATE)
            elif self.breath_style == "abdominal":
                out.append(GOOD)
            elif self.breath_style == "chest":
                out.append(BAD)
            else:
                out.append(INDETERMINATE)
        return out


def load_script(path) -> SingerScript:
    """Read a script JSON file. The "song" field names a bundled song
    ("A"/"B") or a score file path; scalar error/depth fields broadcast
    over all notes/hints."""
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    song = doc.get("song", "A")
    score = bundled_song(song) if str(song).lower() in ("a", "b") else load_score(song)
    err = doc.get("pitch_error_cents", 0.0)
    if isinstance(err, (int, float)):
        err = (float(err),) * len(score.notes)
    depth = doc.get("breath_depth", 1.0)
    if isinstance(depth, (int, float)):
        depth = (float(depth),) * len(score.hints)
    return SingerScript(
        score=score,
        pitch_error_cents=tuple(err),
        timing_jitter_ms=int(doc.get("timing_jitter_ms", 0)),
        breath_style=doc.get("breath_style", "abdominal"),
        mix_weight=float(doc.get("mix_weight", 0.5)),
        breath_depth=tuple(depth),
        sensor_noise_rms_n=float(doc.get("sensor_noise_rms_n", 0.0)),
        audio_noise_dbfs=doc.get("audio_noise_dbfs"),
        seed=int(doc.get("seed", 0)),
    )


def synth_voice(script: SingerScript, sample_rate: int = 44100) -> np.ndarray:
    """Mono PCM for the whole measure grid: a vowel-like tone
    (fundamental plus two weak partials) per note, silence elsewhere."""
    score = script.score
    total = int(round(score.total_ms * sample_rate / 1000.0))
    out = np.zeros(total, dtype=np.float64)
    rng = np.random.default_rng([script.seed, 0])
    amps = np.array([1.0] + [10.0 ** (db / 20.0) for db in HARMONIC_DB])
    amps /= amps.sum()
    for note, cents in zip(score.notes, script.pitch_error_cents):
        jitter = int(rng.integers(-script.timing_jitter_ms, script.timing_jitter_ms + 1)) \
            if script.timing_jitter_ms else 0
        start_ms = max(0, note.start_ms + jitter)
        n0 = int(round(start_ms * sample_rate / 1000.0))
        n1 = min(total, n0 + int(round(note.duration_ms * sample_rate / 1000.0)))
        if n1 <= n0:
            continue
        t = np.arange(n1 - n0) / sample_rate
        freq = midi_to_hz(note.midi + cents / 100.0)
        tone = np.zeros(n1 - n0)
        for k, amp in enumerate(amps, start=1):
            tone += amp * np.sin(2.0 * math.pi * freq * k * t)
        ramp = RAMP_MS / 1000.0
        dur_s = (n1 - n0) / sample_rate
        env = np.minimum(1.0, np.minimum(t / ramp, (dur_s - t) / ramp))
        out[n0:n1] = tone * np.maximum(env, 0.0)
    if script.audio_noise_dbfs is not None:
        sigma = 10.0 ** (script.audio_noise_dbfs / 20.0)
        out += rng.normal(0.0, sigma, total)
    return np.clip(out, -1.0, 1.0)


def _bump(t_ms: np.ndarray, window_start: float, window_end: float,
          sentence_end: float) -> np.ndarray:
    """Unit inhalation shape: half-cosine rise inside the breathing
    window, hold until the window closes, then exponential decay across
    the sentence being sung."""
    w = window_end - window_start
    rise_start = window_start + 0.1 * w
    rise_end = window_start + 0.6 * w
    decay_span = max(sentence_end - window_end, 1.0)
    y = np.zeros_like(t_ms)
    rising = (t_ms >= rise_start) & (t_ms < rise_end)
    y[rising] = 0.5 * (1.0 - np.cos(math.pi * (t_ms[rising] - rise_start) / (rise_end - rise_start)))
    holding = (t_ms >= rise_end) & (t_ms <= window_end)
    y[holding] = 1.0
    decaying = t_ms > window_end
    y[decaying] = np.exp(-3.0 * (t_ms[decaying] - window_end) / decay_span)
    return y


def _breath_envelopes(script: SingerScript, t_ms: np.ndarray) -> np.ndarray:
    """(n, 3) LA/BW/RB force rises above baseline at each timestamp."""
    score = script.score
    routes = np.array(script.routes())
    env = np.zeros((len(t_ms), 3))
    for hint, depth in zip(score.hints, script.breath_depth):
        sentence = score.sentences[hint.sentence]
        sentence_end = score.notes[sentence.last_note].end_ms
        bump = _bump(t_ms, hint.window_start_ms, hint.window_end_ms, sentence_end)
        contrib = depth * INHALE_AMPLITUDE_N * np.outer(bump, routes)
        env = np.maximum(env, contrib)
    return env


def _wire_lines(t_ms: np.ndarray, la: np.ndarray, bw: np.ndarray,
                rb: np.ndarray) -> list[str]:
    return [
        f"{int(t)},{l:.6f},{b:.6f},{b:.6f},{r:.6f},{r:.6f}"
        for t, l, b, r in zip(t_ms, la, bw, rb)
    ]


def synth_breath(script: SingerScript, rate_hz: float = 100.0) -> list[str]:
    """Sensor wire lines for the take, at the given sample rate, timed
    from 0 on the song's position axis."""
    score = script.score
    n = int(score.total_ms * rate_hz / 1000.0) + 1
    t_ms = np.round(np.arange(n) * 1000.0 / rate_hz)
    env = _breath_envelopes(script, t_ms)
    rng = np.random.default_rng([script.seed, 1])
    forces = SENSOR_BASELINE_N + env
    if script.sensor_noise_rms_n > 0:
        forces = forces + rng.normal(0.0, script.sensor_noise_rms_n, forces.shape)
    forces = np.clip(forces, SENSOR_MIN_N, SENSOR_MAX_N)
    return _wire_lines(t_ms, forces[:, 0], forces[:, 1], forces[:, 2])


def synth_calibration(script: SingerScript, rate_hz: float = 100.0) -> tuple[list[str], list[str]]:
    """(exhale_lines, deep_lines) for the guided calibration ritual.

    The exhale capture sits at the resting baseline; the deep capture is
    one maximal guided breath that raises every channel by the full
    inhalation amplitude, whatever the singer's habitual style.
    """
    rng = np.random.default_rng([script.seed, 2])

    def segment(t_ms: np.ndarray, shape: np.ndarray) -> list[str]:
        forces = SENSOR_BASELINE_N + np.outer(shape, np.ones(3)) * INHALE_AMPLITUDE_N
        if script.sensor_noise_rms_n > 0:
            forces = forces + rng.normal(0.0, script.sensor_noise_rms_n, forces.shape)
        forces = np.clip(forces, SENSOR_MIN_N, SENSOR_MAX_N)
        return _wire_lines(t_ms, forces[:, 0], forces[:, 1], forces[:, 2])

    n_ex = int(CAL_EXHALE_MS * rate_hz / 1000.0) + 1
    t_ex = np.round(np.arange(n_ex) * 1000.0 / rate_hz)
    exhale = segment(t_ex, np.zeros(n_ex))

    deep_ms = CAL_RISE_MS + CAL_HOLD_MS + CAL_FALL_MS + CAL_REST_MS
    n_dp = int(deep_ms * rate_hz / 1000.0) + 1
    t_dp = np.round(np.arange(n_dp) * 1000.0 / rate_hz)
    shape = np.zeros(n_dp)
    rising = t_dp < CAL_RISE_MS
    shape[rising] = 0.5 * (1.0 - np.cos(math.pi * t_dp[rising] / CAL_RISE_MS))
    holding = (t_dp >= CAL_RISE_MS) & (t_dp < CAL_RISE_MS + CAL_HOLD_MS)
    shape[holding] = 1.0
    fall_start = CAL_RISE_MS + CAL_HOLD_MS
    falling = (t_dp >= fall_start) & (t_dp < fall_start + CAL_FALL_MS)
    shape[falling] = 0.5 * (1.0 + np.cos(math.pi * (t_dp[falling] - fall_start) / CAL_FALL_MS))
    deep = segment(t_dp, shape)
    return exhale, deep
