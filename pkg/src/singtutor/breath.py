"""Breath-sensor processing: calibration, filtering, classification.

The wearable belt reports five force channels; left/right pairs are
averaged down to three body channels (lower abdomen LA, back waist BW,
ribs RB). Each channel is baseline-subtracted against a full-exhalation
capture, clamped at zero, smoothed with a causal 150 ms mean filter, and
normalized against the wearer's deep-breath range.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from singtutor import kernels

FILTER_WINDOW_MS = 150.0
VOLUME_WEIGHTS = (0.5, 0.25, 0.25)  # LA, BW, RB share of the volume proxy
GOOD = "good"
BAD = "bad"
INDETERMINATE = "indeterminate"


class CalibrationError(ValueError):
    """Raised when a calibration capture is unusable."""


@dataclass(frozen=True)
class SensorFrame:
    """One raw reading of the five belt channels, forces in newtons."""

    t_ms: int
    f_la: float
    f_bw_l: float
    f_bw_r: float
    f_rb_l: float
    f_rb_r: float

    def __post_init__(self):
        for name in ("f_la", "f_bw_l", "f_bw_r", "f_rb_l", "f_rb_r"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} is not finite")
            if v < 0:
                raise ValueError(f"{name} must be >= 0, got {v}")

    def reduced(self) -> tuple[float, float, float]:
        """Pair-averaged (la, bw, rb) forces."""
        return (
            self.f_la,
            (self.f_bw_l + self.f_bw_r) / 2.0,
            (self.f_rb_l + self.f_rb_r) / 2.0,
        )


@dataclass(frozen=True)
class ChannelValues:
    la: float
    bw: float
    rb: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.la, self.bw, self.rb)


@dataclass(frozen=True)
class Calibration:
    """Per-channel anchors: baseline at full exhalation, deep_max at the
    deepest guided inhalation."""

    baseline: ChannelValues
    deep_max: ChannelValues
    captured_at_ms: int = 0

    def channel_range(self) -> tuple[float, float, float]:
        return tuple(d - b for d, b in zip(self.deep_max.as_tuple(),
                                           self.baseline.as_tuple()))


@dataclass(frozen=True)
class BreathSample:
    """Filtered, calibrated reading: forces in newtons plus normalized
    [0, 1] channel values and the weighted volume proxy."""

    t_ms: int
    la: float
    bw: float
    rb: float
    la_n: float
    bw_n: float
    rb_n: float
    volume: float


@dataclass(frozen=True)
class BreathPattern:
    label: str  # GOOD | BAD | INDETERMINATE
    delta_la: float
    delta_bw: float
    delta_rb: float


@dataclass(frozen=True)
class BreathThresholds:
    """Inhalation-rise thresholds in newtons, scaled to the wearer.

    rise_n: minimum rise for a channel to count as driving the breath.
    still_n: maximum rise for a channel to count as staying still.
    """

    rise_n: float
    still_n: float

    @classmethod
    def from_calibration(cls, cal: Calibration, rise_fraction: float = 0.15) -> "BreathThresholds":
        rise = rise_fraction * (cal.deep_max.la - cal.baseline.la)
        return cls(rise_n=rise, still_n=0.5 * rise)


def calibrate(exhale_frames, deep_frames) -> Calibration:
    """Build a Calibration from a full-exhalation capture and a
    deep-breath capture (each spanning at least 500 ms).

    Baselines are per-channel medians of the exhale capture (robust to
    spikes); deep_max is the 95th percentile of the deep capture.
    """
    reduced_ex = np.array([f.reduced() for f in exhale_frames], dtype=np.float64)
    reduced_dp = np.array([f.reduced() for f in deep_frames], dtype=np.float64)
    for name, frames, arr in (("exhale", exhale_frames, reduced_ex),
                              ("deep-breath", deep_frames, reduced_dp)):
        if len(arr) < 2:
            raise CalibrationError(f"insufficient {name} frames")
        span = max(f.t_ms for f in frames) - min(f.t_ms for f in frames)
        if span < 500:
            raise CalibrationError(
                f"insufficient {name} capture: spans {span} ms, need >= 500 ms"
            )
    baseline = np.median(reduced_ex, axis=0)
    deep_max = np.percentile(reduced_dp, 95, axis=0)
    if deep_max[0] <= baseline[0]:
        raise CalibrationError(
            "calibration failed: no lower-abdomen rise between exhale and "
            "deep breath (belt not fitted?)"
        )
    if deep_max[1] <= baseline[1] and deep_max[2] <= baseline[2]:
        raise CalibrationError(
            "calibration failed: neither back-waist nor rib channels rose "
            "during the deep breath"
        )
    captured_at = max(f.t_ms for f in deep_frames)
    return Calibration(
        baseline=ChannelValues(*map(float, baseline)),
        deep_max=ChannelValues(*map(float, deep_max)),
        captured_at_ms=captured_at,
    )


class FilterState:
    """Trailing-window state for the causal mean filter.

    Single-owner: advance it from one thread only, in timestamp order.
    """

    def __init__(self, window_ms: float = FILTER_WINDOW_MS):
        self.window_ms = window_ms
        self._buf: deque[tuple[int, float, float, float]] = deque()
        self.last_t_ms: int | None = None

    def push(self, t_ms: int, la: float, bw: float, rb: float) -> tuple[float, float, float]:
        if self.last_t_ms is not None and t_ms <= self.last_t_ms:
            raise ValueError(
                f"non-monotonic sensor timestamp: {t_ms} after {self.last_t_ms}"
            )
        self.last_t_ms = t_ms
        self._buf.append((t_ms, la, bw, rb))
        cutoff = t_ms - self.window_ms
        while self._buf[0][0] <= cutoff:
            self._buf.popleft()
        acc_la = acc_bw = acc_rb = 0.0
        for _, a, b, r in self._buf:
            acc_la += a
            acc_bw += b
            acc_rb += r
        n = len(self._buf)
        return acc_la / n, acc_bw / n, acc_rb / n


def _normalize(value: float, rng: float) -> float:
    if rng <= 0:
        return 0.0
    return min(max(value / rng, 0.0), 1.0)


def _sample_from_filtered(t_ms, la, bw, rb, cal, weights) -> BreathSample:
    la, bw, rb = float(la), float(bw), float(rb)
    r_la, r_bw, r_rb = cal.channel_range()
    la_n = _normalize(la, r_la)
    bw_n = _normalize(bw, r_bw)
    rb_n = _normalize(rb, r_rb)
    volume = weights[0] * la_n + weights[1] * bw_n + weights[2] * rb_n
    return BreathSample(t_ms=t_ms, la=la, bw=bw, rb=rb,
                        la_n=la_n, bw_n=bw_n, rb_n=rb_n, volume=volume)


def process_frame(frame: SensorFrame, cal: Calibration, state: FilterState,
                  weights=VOLUME_WEIGHTS) -> BreathSample:
    """Advance the filter with one sensor frame and return the resulting
    BreathSample. Frames must arrive in strictly increasing time order."""
    la_raw, bw_raw, rb_raw = frame.reduced()
    la = max(0.0, la_raw - cal.baseline.la)
    bw = max(0.0, bw_raw - cal.baseline.bw)
    rb = max(0.0, rb_raw - cal.baseline.rb)
    f_la, f_bw, f_rb = state.push(frame.t_ms, la, bw, rb)
    return _sample_from_filtered(frame.t_ms, f_la, f_bw, f_rb, cal, weights)


def process_stream(frames, cal: Calibration, window_ms: float = FILTER_WINDOW_MS,
                   weights=VOLUME_WEIGHTS) -> list[BreathSample]:
    """Batch equivalent of repeated process_frame calls (same math, same
    results; uses the compiled trailing-mean kernel when available)."""
    if not frames:
        return []
    t = np.ascontiguousarray([f.t_ms for f in frames], dtype=np.float64)
    if np.any(np.diff(t) <= 0):
        raise ValueError("sensor timestamps must be strictly increasing")
    reduced = np.array([f.reduced() for f in frames], dtype=np.float64)
    base = np.array(cal.baseline.as_tuple(), dtype=np.float64)
    clamped = np.maximum(reduced - base, 0.0)
    filtered = [
        np.asarray(kernels.trailing_mean(t, np.ascontiguousarray(clamped[:, ch]), window_ms))
        for ch in range(3)
    ]
    return [
        _sample_from_filtered(f.t_ms, filtered[0][i], filtered[1][i],
                              filtered[2][i], cal, weights)
        for i, f in enumerate(frames)
    ]


def classify_breath(samples, thresholds: BreathThresholds) -> BreathPattern:
    """Label one inhalation window from its BreathSamples.

    The rise of each channel is its maximum over the window minus its
    value at the window start. A breath is good when the abdomen rises
    while the ribs stay still, bad when the ribs rise while the abdomen
    stays still, indeterminate otherwise. The back waist varies between
    people and is reported but never decides the label.
    """
    samples = list(samples)
    if len(samples) < 3 or samples[-1].t_ms - samples[0].t_ms < 300:
        raise ValueError("window too short to classify (need >= 300 ms and 3 samples)")
    first = samples[0]
    delta_la = max(s.la for s in samples) - first.la
    delta_bw = max(s.bw for s in samples) - first.bw
    delta_rb = max(s.rb for s in samples) - first.rb
    if delta_la >= thresholds.rise_n and delta_rb <= thresholds.still_n:
        label = GOOD
    elif delta_rb >= thresholds.rise_n and delta_la <= thresholds.still_n:
        label = BAD
    else:
        label = INDETERMINATE
    return BreathPattern(label=label, delta_la=delta_la,
                         delta_bw=delta_bw, delta_rb=delta_rb)


@dataclass(frozen=True)
class TriangleGeometry:
    """Feedback-triangle construction: vertices sit at fixed bearings
    (ribs on top, abdomen lower-left, waist lower-right) at radius
    base_radius * (1 + gain * channel_n) from the center."""

    base_radius: float = 1.0
    gain: float = 1.0
    angle_rb_deg: float = 90.0
    angle_la_deg: float = 210.0
    angle_bw_deg: float = 330.0

    def __post_init__(self):
        if self.base_radius <= 0 or self.gain <= 0:
            raise ValueError("base_radius and gain must be > 0")


def triangle_vertices(la_n: float, bw_n: float, rb_n: float,
                      geom: TriangleGeometry = TriangleGeometry()) -> np.ndarray:
    """Vertex coordinates in (rb, la, bw) order, shape (3, 2)."""
    angles = np.radians([geom.angle_rb_deg, geom.angle_la_deg, geom.angle_bw_deg])
    radii = geom.base_radius * (1.0 + geom.gain * np.array([rb_n, la_n, bw_n]))
    return np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)


def _bisector(adj1: float, adj2: float, opposite: float) -> float:
    # Length of the internal bisector from the vertex between the two
    # adjacent sides, via the side-length-only identity.
    s = adj1 + adj2
    return float(np.sqrt(adj1 * adj2 * (s * s - opposite * opposite)) / s)


def bisector_lengths(sample: BreathSample,
                     geom: TriangleGeometry = TriangleGeometry()) -> tuple[float, float, float]:
    """(abdomen, rib, waist) internal angle-bisector lengths of the
    feedback triangle for one BreathSample."""
    return triangle_bisectors(sample.la_n, sample.bw_n, sample.rb_n, geom)


def triangle_bisectors(la_n: float, bw_n: float, rb_n: float,
                       geom: TriangleGeometry = TriangleGeometry()) -> tuple[float, float, float]:
    v_rb, v_la, v_bw = triangle_vertices(la_n, bw_n, rb_n, geom)
    side_rb = float(np.linalg.norm(v_la - v_bw))  # opposite the rib vertex
    side_la = float(np.linalg.norm(v_rb - v_bw))
    side_bw = float(np.linalg.norm(v_rb - v_la))
    area = 0.5 * abs(
        (v_la[0] - v_rb[0]) * (v_bw[1] - v_rb[1])
        - (v_bw[0] - v_rb[0]) * (v_la[1] - v_rb[1])
    )
    if area < 1e-12:
        raise ValueError("degenerate feedback triangle (collinear vertices)")
    abdomen = _bisector(side_rb, side_bw, side_la)
    rib = _bisector(side_la, side_bw, side_rb)
    waist = _bisector(side_rb, side_la, side_bw)
    return abdomen, rib, waist
