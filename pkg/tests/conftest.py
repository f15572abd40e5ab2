from __future__ import annotations

import numpy as np
import pytest

from singtutor.breath import Calibration, ChannelValues
from singtutor.pitch import PitchConfig
from singtutor.score import bundled_song


@pytest.fixture(scope="session")
def song_a():
    return bundled_song("A")


@pytest.fixture(scope="session")
def song_b():
    return bundled_song("B")


@pytest.fixture(scope="session")
def cfg():
    return PitchConfig()


@pytest.fixture
def flat_calibration():
    """Identity-ish calibration: baseline 8 N, deep range 12 N on all
    channels (matches the simulator's guided deep breath)."""
    return Calibration(baseline=ChannelValues(8.0, 8.0, 8.0),
                       deep_max=ChannelValues(20.0, 20.0, 20.0))


def sine_frame(freq_hz: float, cfg: PitchConfig, amplitude: float = 1.0,
               harmonics: tuple[float, ...] = ()) -> np.ndarray:
    """One frame of a steady tone with optional extra partials."""
    t = np.arange(cfg.frame_samples) / cfg.sample_rate_hz
    x = amplitude * np.sin(2.0 * np.pi * freq_hz * t)
    for k, amp in enumerate(harmonics, start=2):
        x = x + amp * np.sin(2.0 * np.pi * freq_hz * k * t)
    return x
