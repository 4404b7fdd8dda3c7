"""Pose-trajectory kinetics: keypoint speed, Gaussian smoothing, accent picking."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    AllKeypointsBelowConfidence,
    InconsistentKeypointCount,
    NoAccents,
    SchemaViolation,
    TooFewFrames,
    UnreadableFile,
)


@dataclass(frozen=True)
class MotionConfig:
    conf_threshold: float = 0.3
    sigma_frames: float = 2.0
    min_separation: float = 0.2
    prominence_frac: float = 0.1


DEFAULT_MOTION = MotionConfig()


@dataclass(frozen=True)
class KeypointSequence:
    """Array of shape (T, K, 3) holding x, y (pixels) and confidence."""

    frames: np.ndarray
    fps: float
    width: int = 0
    height: int = 0
    layout: str = "unknown"

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_keypoints(self) -> int:
        return self.frames.shape[1]

    @property
    def duration(self) -> float:
        return (self.num_frames - 1) / self.fps


@dataclass(frozen=True)
class VelocitySignal:
    values: np.ndarray
    fps: float

    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) / self.fps


@dataclass(frozen=True)
class AccentTrack:
    accents: np.ndarray
    smoothed: np.ndarray
    sigma_frames: float
    fps: float

    def to_json(self) -> dict:
        # num_frames counts video frames, one more than velocity samples
        return {"accents": [float(a) for a in self.accents], "num_frames": int(len(self.smoothed) + 1)}


def _require(cond, msg):
    if not cond:
        raise SchemaViolation(msg)


def parse_keypoints(doc) -> KeypointSequence:
    _require(isinstance(doc, dict), "top level must be an object")
    for key in ("fps", "frames"):
        _require(key in doc, f"missing field {key!r}")
    fps = doc["fps"]
    _require(isinstance(fps, (int, float)) and not isinstance(fps, bool) and math.isfinite(fps) and fps > 0,
             "fps must be a positive number")
    width, height = doc.get("width", 0), doc.get("height", 0)
    _require(isinstance(width, int) and isinstance(height, int), "width/height must be integers")
    layout = doc.get("layout", "unknown")
    _require(isinstance(layout, str), "layout must be a string")

    frames = doc["frames"]
    _require(isinstance(frames, list), "frames must be a list")
    if len(frames) < 2:
        raise TooFewFrames(f"need at least 2 frames, got {len(frames)}")
    for t, frame in enumerate(frames):
        _require(isinstance(frame, list) and len(frame) >= 1, f"frame {t} must be a non-empty list")
        if len(frame) != len(frames[0]):
            raise InconsistentKeypointCount(
                f"frame {t} has {len(frame)} keypoints, frame 0 has {len(frames[0])}")
        for kp in frame:
            _require(isinstance(kp, list) and len(kp) == 3, f"frame {t}: keypoints must be [x, y, conf]")
    try:
        arr = np.asarray(frames, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SchemaViolation(f"non-numeric keypoint data: {exc}") from exc
    _require(np.all(np.isfinite(arr)), "keypoint values must be finite")
    _require(np.all((arr[..., 2] >= 0) & (arr[..., 2] <= 1)), "confidences must lie in [0, 1]")
    return KeypointSequence(arr, float(fps), width, height, layout)


def load_keypoints(path) -> KeypointSequence:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: invalid JSON ({exc})") from exc
    return parse_keypoints(doc)


def velocity(seq: KeypointSequence, conf_threshold: float = DEFAULT_MOTION.conf_threshold) -> VelocitySignal:
    """Mean keypoint displacement between consecutive frames (pixels/frame).

    Only keypoints confident in both frames of a pair contribute. Pairs with
    no such keypoint are filled by linear interpolation from valid pairs.
    """
    xy = seq.frames[..., :2]
    conf = seq.frames[..., 2]
    disp = np.linalg.norm(xy[1:] - xy[:-1], axis=-1)
    valid = (conf[1:] >= conf_threshold) & (conf[:-1] >= conf_threshold)
    counts = valid.sum(axis=1)
    ok = counts > 0
    if not ok.any():
        raise AllKeypointsBelowConfidence(
            f"no frame pair has a keypoint with confidence >= {conf_threshold}")
    v = np.zeros(len(disp))
    v[ok] = (disp * valid).sum(axis=1)[ok] / counts[ok]
    if not ok.all():
        idx = np.arange(len(v))
        v[~ok] = np.interp(idx[~ok], idx[ok], v[ok])
    return VelocitySignal(v, seq.fps)


def gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def smooth(v: VelocitySignal, sigma_frames: float = DEFAULT_MOTION.sigma_frames) -> VelocitySignal:
    """Unit-sum Gaussian smoothing truncated at 3 sigma, reflect-padded."""
    if sigma_frames <= 0:
        raise ValueError(f"sigma_frames must be positive, got {sigma_frames}")
    k = gaussian_kernel(sigma_frames)
    r = len(k) // 2
    x = np.asarray(v.values, dtype=np.float64)
    if len(x) == 1:
        return VelocitySignal(x.copy(), v.fps)
    padded = np.pad(x, r, mode="reflect")
    return VelocitySignal(np.convolve(padded, k, mode="valid"), v.fps)


def local_maxima(x: np.ndarray) -> np.ndarray:
    """Indices of strict local maxima; a flat-topped peak reports its centre.

    Endpoints are never maxima.
    """
    peaks = []
    i, n = 1, len(x)
    while i < n - 1:
        if x[i] > x[i - 1]:
            j = i
            while j + 1 < n and x[j + 1] == x[i]:
                j += 1
            if j + 1 < n and x[j + 1] < x[i]:
                peaks.append((i + j) // 2)
            i = j + 1
        else:
            i += 1
    return np.array(peaks, dtype=np.int64)


def prominences(x: np.ndarray, peaks: np.ndarray) -> np.ndarray:
    """Topographic prominence: peak height above the higher of its two bases.

    Each base is the minimum between the peak and the nearest strictly
    higher sample on that side (or the signal edge).
    """
    out = np.empty(len(peaks))
    for n, p in enumerate(peaks):
        h = x[p]
        i = p
        left_min = h
        while i > 0 and x[i - 1] <= h:
            i -= 1
            left_min = min(left_min, x[i])
        i = p
        right_min = h
        while i < len(x) - 1 and x[i + 1] <= h:
            i += 1
            right_min = min(right_min, x[i])
        out[n] = h - max(left_min, right_min)
    return out


def detect_accents(
    v: VelocitySignal,
    min_separation: float = DEFAULT_MOTION.min_separation,
    prominence_frac: float = DEFAULT_MOTION.prominence_frac,
    sigma_frames: float = 0.0,
) -> AccentTrack:
    """Motion accents as prominent local maxima of a smoothed speed signal.

    Sample ``i`` (displacement from frame i to i+1) is stamped at ``i / fps``.
    Among maxima closer than ``min_separation`` seconds the taller is kept
    (ties go to the earlier one).
    """
    if min_separation < 0:
        raise ValueError("min_separation must be non-negative")
    x = np.asarray(v.values, dtype=np.float64)
    peaks = local_maxima(x)
    if peaks.size:
        prom = prominences(x, peaks)
        peaks = peaks[prom >= prominence_frac * x.max()]
    if peaks.size and min_separation > 0:
        order = sorted(peaks.tolist(), key=lambda p: (-x[p], p))
        kept = []
        for p in order:
            if all(abs(p - q) / v.fps >= min_separation for q in kept):
                kept.append(p)
        peaks = np.array(sorted(kept), dtype=np.int64)
    if peaks.size == 0:
        raise NoAccents("speed signal has no qualifying local maximum")
    return AccentTrack(peaks / v.fps, x, sigma_frames, v.fps)


def extract_accents(seq: KeypointSequence, config: MotionConfig = DEFAULT_MOTION) -> AccentTrack:
    v = smooth(velocity(seq, config.conf_threshold), config.sigma_frames)
    return detect_accents(v, config.min_separation, config.prominence_frac, config.sigma_frames)
