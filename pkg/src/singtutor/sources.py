"""Input stream adapters for the session engine.

Audio sources yield (t_ms, samples) frame tuples; sensor sources yield
raw wire lines. Everything the engine consumes is reduced to these two
shapes so files, sockets, serial ports, and the simulator are
interchangeable.
"""

from __future__ import annotations

import socket
import time

import numpy as np
from scipy.io import wavfile

from singtutor.pitch import PitchConfig
from singtutor.simulate import SingerScript, synth_breath, synth_voice


def read_wav_mono(path) -> tuple[int, np.ndarray]:
    """Load a WAV file (PCM or float) as float64 mono in [-1, 1]."""
    rate, data = wavfile.read(path)
    x = np.asarray(data)
    if x.ndim > 1:
        x = x.mean(axis=1)
    if np.issubdtype(x.dtype, np.integer):
        x = x.astype(np.float64) / float(np.iinfo(data.dtype).max + 1)
    else:
        x = x.astype(np.float64)
    return int(rate), x


def write_wav(path, samples: np.ndarray, sample_rate: int = 44100) -> None:
    pcm = np.clip(samples, -1.0, 1.0)
    wavfile.write(path, sample_rate, (pcm * 32767.0).astype(np.int16))


def frames_from_samples(samples: np.ndarray, cfg: PitchConfig, start_ms: int = 0):
    """Chunk a PCM buffer into engine-ready (t_ms, frame) tuples; an
    incomplete tail frame is dropped."""
    n = cfg.frame_samples
    total = len(samples) // n
    for i in range(total):
        yield start_ms + i * cfg.frame_ms, samples[i * n:(i + 1) * n]


def wav_frames(path, cfg: PitchConfig | None = None):
    """Audio frames from a WAV file. The config is adapted to the file's
    sample rate; returns (config, frame iterator)."""
    rate, samples = read_wav_mono(path)
    if cfg is None or cfg.sample_rate_hz != rate:
        cfg = PitchConfig(sample_rate_hz=rate)
    return cfg, frames_from_samples(samples, cfg)


def file_lines(path):
    """Sensor lines from a text file (one wire line per row)."""
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                yield line


def tcp_lines(host: str, port: int):
    """Sensor lines from a TCP byte stream (newline-delimited)."""
    with socket.create_connection((host, port)) as sock, \
            sock.makefile("r", encoding="utf-8", errors="replace") as f:
        for line in f:
            line = line.strip()
            if line:
                yield line


def serial_lines(path):
    """Sensor lines from a serial device node (or any line-oriented
    byte stream reachable as a path)."""
    with open(path, "r", encoding="utf-8", errors="replace", buffering=1) as f:
        for line in f:
            line = line.strip()
            if line:
                yield line


def sim_streams(script: SingerScript, cfg: PitchConfig | None = None,
                sensor_rate_hz: float = 100.0):
    """Paired simulator streams for one take: (audio frame iterator,
    sensor line list)."""
    cfg = cfg or PitchConfig()
    voice = synth_voice(script, sample_rate=cfg.sample_rate_hz)
    return frames_from_samples(voice, cfg), synth_breath(script, rate_hz=sensor_rate_hz)


def device_frames(cfg: PitchConfig):
    """Audio frames from the default capture device (requires the
    optional sounddevice package)."""
    try:
        import sounddevice as sd
    except ImportError as e:
        raise RuntimeError(
            "audio device capture requires the 'sounddevice' package"
        ) from e
    n = cfg.frame_samples
    t_ms = 0
    with sd.InputStream(samplerate=cfg.sample_rate_hz, channels=1,
                        blocksize=n, dtype="float32") as stream:
        while True:
            block, _ = stream.read(n)
            yield t_ms, block[:, 0].astype(np.float64)
            t_ms += cfg.frame_ms


def paced(stream, time_of, start_wall: float | None = None):
    """Re-emit a timestamped stream at wall-clock pace (for live serving
    of file/simulator sources). time_of maps an item to its stream ms."""
    t0 = time.monotonic() if start_wall is None else start_wall
    for item in stream:
        target = t0 + time_of(item) / 1000.0
        delay = target - time.monotonic()
        if delay > 0:
            time.sleep(delay)
        yield item
