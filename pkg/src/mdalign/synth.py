"""Deterministic synthetic fixtures: click tracks and dancing skeletons.

Used by the test-suite and by ``mdalign demo`` to build the demonstration
manifest. All randomness comes from explicitly seeded generators.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .audio_io import CANONICAL_RATE, AudioBuffer, write_wav

# COCO-17 rest pose in a 480x480 frame
COCO17_REST = np.array([
    [240, 100], [232, 92], [248, 92], [222, 96], [258, 96],
    [210, 140], [270, 140], [195, 190], [285, 190], [185, 235], [295, 235],
    [222, 245], [258, 245], [218, 320], [262, 320], [215, 395], [265, 395],
], dtype=np.float64)


def click_times(bpm: float, duration: float, offset: float = 0.0) -> np.ndarray:
    period = 60.0 / bpm
    n = int(np.floor((duration - offset - 0.05) / period)) + 1
    return offset + period * np.arange(max(n, 0))


def click_track(
    bpm: float,
    duration: float,
    sample_rate: int = CANONICAL_RATE,
    offset: float = 0.0,
    noise_db: float | None = None,
    click_ms: float = 5.0,
    amplitude: float = 0.9,
    seed: int = 0,
) -> tuple[AudioBuffer, np.ndarray]:
    """Broadband click train plus optional white-noise floor.

    Each click is a short exponentially decaying noise burst. ``noise_db``
    is the floor's RMS relative to the click peak amplitude (e.g. -26).
    Returns the buffer and the true click times.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    x = np.zeros(n)
    L = max(1, int(round(click_ms * 1e-3 * sample_rate)))
    burst = rng.uniform(-1.0, 1.0, L) * np.exp(-np.arange(L) / (L / 4.0))
    burst *= amplitude / np.max(np.abs(burst))
    times = click_times(bpm, duration, offset)
    for t in times:
        s = int(round(t * sample_rate))
        m = min(L, n - s)
        if m > 0:
            x[s:s + m] += burst[:m]
    if noise_db is not None:
        sigma = amplitude * 10.0 ** (noise_db / 20.0)
        x += rng.normal(0.0, sigma, n)
    return AudioBuffer(np.clip(x, -1.0, 1.0), sample_rate), times


def bouncing_skeleton(
    beat_period: float,
    duration: float,
    fps: float = 24.0,
    phase: float = 0.0,
    amplitude: float = 30.0,
    jitter_px: float = 0.0,
    timing_jitter: float = 0.0,
    seed: int = 0,
) -> np.ndarray:
    """Skeleton whose vertical bounce has speed peaks at ``phase + k*beat_period``.

    The body height follows ``amplitude * |sin(pi * (t - phase) / beat_period)|``:
    the bounce reverses sharply at every beat, which is where the keypoint
    speed is largest. Arms swing with a larger amplitude than the torso.
    Returns an array of shape (T, 17, 3) with confidence 1.
    """
    rng = np.random.default_rng(seed)
    T = int(round(duration * fps))
    t = np.arange(T) / fps
    if timing_jitter > 0:
        # slow random warp of the time axis, bounded by timing_jitter seconds
        knots = rng.uniform(-timing_jitter, timing_jitter, int(duration / beat_period) + 2)
        warp = np.interp(t, np.linspace(0, duration, len(knots)), knots)
        t = t + warp
    bounce = amplitude * np.abs(np.sin(np.pi * (t - phase) / beat_period))
    gain = np.ones(17)
    gain[[7, 8, 9, 10]] = 1.6
    frames = np.empty((T, 17, 3))
    frames[:, :, 0] = COCO17_REST[None, :, 0]
    frames[:, :, 1] = COCO17_REST[None, :, 1] - bounce[:, None] * gain[None, :]
    frames[:, :, 2] = 1.0
    if jitter_px > 0:
        frames[:, :, :2] += rng.normal(0.0, jitter_px, (T, 17, 2))
    return frames


def keypoint_document(frames: np.ndarray, fps: float = 24.0, width: int = 480, height: int = 480) -> dict:
    return {
        "fps": float(fps),
        "width": int(width),
        "height": int(height),
        "layout": "coco17",
        "frames": np.round(frames, 4).tolist(),
    }


def write_keypoints(path, frames: np.ndarray, fps: float = 24.0) -> None:
    Path(path).write_text(json.dumps(keypoint_document(frames, fps)))


# (clip_id, model, bpm, dance phase as a fraction of the beat, timing jitter s, seed)
DEMO_CLIPS = [
    ("synced_a", "Synced", 120.0, 0.0, 0.0, 1),
    ("synced_b", "Synced", 100.0, 0.0, 0.0, 2),
    ("offbeat_a", "Offbeat", 120.0, 0.5, 0.0, 3),
    ("offbeat_b", "Offbeat", 100.0, 0.5, 0.0, 4),
    ("drifting_a", "Drifting", 120.0, 0.0, 0.12, 5),
    ("drifting_b", "Drifting", 100.0, 0.1, 0.12, 6),
]


def write_demo(out_dir, duration: float = 6.0) -> Path:
    """Write the six-clip demonstration corpus and return the manifest path."""
    out = Path(out_dir)
    (out / "audio").mkdir(parents=True, exist_ok=True)
    (out / "keypoints").mkdir(parents=True, exist_ok=True)
    entries = []
    for clip_id, model, bpm, phase_frac, tj, seed in DEMO_CLIPS:
        period = 60.0 / bpm
        audio, _ = click_track(bpm, duration, noise_db=-30.0, seed=seed)
        write_wav(out / "audio" / f"{clip_id}.wav", audio)
        frames = bouncing_skeleton(period, duration, phase=phase_frac * period,
                                   jitter_px=0.3, timing_jitter=tj, seed=seed)
        write_keypoints(out / "keypoints" / f"{clip_id}.json", frames)
        entries.append({
            "clip_id": clip_id,
            "model_name": model,
            "prompt_text": f"a dancer bouncing to a {bpm:g} BPM click track",
            "audio_path": f"audio/{clip_id}.wav",
            "keypoints_path": f"keypoints/{clip_id}.json",
        })
    manifest = out / "manifest.json"
    manifest.write_text(json.dumps(entries, indent=2) + "\n")
    return manifest
