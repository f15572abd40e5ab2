"""Monophonic pitch detection on short audio frames.

Each 50 ms frame is Hann-windowed, zero-padded, and transformed with an
FFT; the frequency estimate is the location of the strongest magnitude
bin inside the singing band, refined by fitting a parabola to the
log-magnitude of the peak and its two neighbours. Frames whose RMS falls
below the voicing threshold are reported unvoiced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from singtutor import kernels

# Reported energy is floored here so silence stays a finite dBFS value
# (JSON-safe) instead of -inf.
ENERGY_FLOOR_DB = -120.0


def hz_to_midi(f_hz: float) -> float:
    """Fractional MIDI number of a frequency (12-TET, A4 = 440 Hz)."""
    if f_hz <= 0:
        raise ValueError(f"frequency must be > 0, got {f_hz}")
    return 69.0 + 12.0 * math.log2(f_hz / 440.0)


def midi_to_hz(midi: float) -> float:
    return 440.0 * 2.0 ** ((midi - 69.0) / 12.0)


def within_quarter_tone(f_hz: float, note_midi: int) -> bool:
    """True when a frequency lies strictly inside a quarter-tone
    (50 cents) of the given MIDI note."""
    return abs(hz_to_midi(f_hz) - note_midi) < 0.5


@dataclass(frozen=True)
class PitchConfig:
    sample_rate_hz: int = 44100
    frame_ms: int = 50
    fft_size: int = 8192
    voicing_threshold_db: float = -40.0
    band_hz: tuple[float, float] = (80.0, 1200.0)

    def __post_init__(self):
        if self.fft_size & (self.fft_size - 1):
            raise ValueError("fft_size must be a power of two")
        if self.frame_samples > self.fft_size:
            raise ValueError("frame does not fit in fft_size")
        if not 0 < self.band_hz[0] < self.band_hz[1]:
            raise ValueError("band_hz must satisfy 0 < low < high")

    @property
    def frame_samples(self) -> int:
        return round(self.frame_ms * self.sample_rate_hz / 1000)


@dataclass(frozen=True)
class PitchFrame:
    """Analysis result for one audio frame starting at t_ms.

    freq_hz and midi_float are 0.0 when the frame is unvoiced.
    """

    t_ms: int
    voiced: bool
    freq_hz: float
    midi_float: float
    energy_db: float


@lru_cache(maxsize=8)
def _hann(n: int) -> np.ndarray:
    return np.hanning(n)


def detect_pitch(samples, cfg: PitchConfig = PitchConfig(), t_ms: int = 0) -> PitchFrame:
    """Analyze one frame of mono PCM samples in [-1, 1].

    The sample count must equal cfg.frame_samples. Deterministic:
    identical samples and config give a bit-identical PitchFrame.
    """
    x = np.ascontiguousarray(samples, dtype=np.float64)
    if x.ndim != 1 or len(x) != cfg.frame_samples:
        raise ValueError(
            f"expected {cfg.frame_samples} samples, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("samples contain non-finite values")

    level = kernels.rms(x)
    energy_db = max(20.0 * math.log10(level), ENERGY_FLOOR_DB) if level > 0 else ENERGY_FLOOR_DB
    if energy_db < cfg.voicing_threshold_db:
        return PitchFrame(t_ms=t_ms, voiced=False, freq_hz=0.0,
                          midi_float=0.0, energy_db=energy_db)

    mag = np.abs(np.fft.rfft(x * _hann(len(x)), n=cfg.fft_size))
    hz_per_bin = cfg.sample_rate_hz / cfg.fft_size
    lo = max(1, math.ceil(cfg.band_hz[0] / hz_per_bin))
    hi = min(len(mag) - 1, math.floor(cfg.band_hz[1] / hz_per_bin))
    k, delta = kernels.peak_interp(np.ascontiguousarray(mag), lo, hi)
    freq = (k + delta) * hz_per_bin
    freq = min(max(freq, cfg.band_hz[0]), cfg.band_hz[1])
    return PitchFrame(t_ms=t_ms, voiced=True, freq_hz=freq,
                      midi_float=hz_to_midi(freq), energy_db=energy_db)
