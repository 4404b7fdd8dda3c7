"""Per-clip physical-track pipeline and the corpus runner."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..align_metrics import AlignmentParams, AlignmentScores, aggregate, score
from ..audio_io import CANONICAL_RATE, load_audio
from ..beat_tracker import DEFAULT_CONFIG, BeatTrackerConfig, BeatGrid, extract_beats
from ..errors import EmptyAccents, EmptyBeats, MDAlignError, NoAccents, NoPeriodicity
from ..motion_kinetics import (
    DEFAULT_MOTION,
    AccentTrack,
    MotionConfig,
    detect_accents,
    load_keypoints,
    smooth,
    velocity,
)
from .manifest import ClipManifestEntry, load_manifest

logger = logging.getLogger(__name__)

# failures that --lenient turns into an empty event set (score 0)
_LENIENT = (NoPeriodicity, NoAccents, EmptyBeats, EmptyAccents)


@dataclass
class ClipResult:
    clip_id: str
    model_name: str
    ok: bool
    scores: AlignmentScores | None = None
    beats: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tempo_bpm: float | None = None
    duration: float = 0.0
    accents: np.ndarray = field(default_factory=lambda: np.zeros(0))
    smoothed: np.ndarray = field(default_factory=lambda: np.zeros(0))
    fps: float = 0.0
    warnings: list = field(default_factory=list)
    error_kind: str | None = None
    error_message: str | None = None

    def to_json(self) -> dict:
        d = {"clip_id": self.clip_id, "model_name": self.model_name,
             "status": "ok" if self.ok else "failed"}
        if self.ok:
            d.update(self.scores.to_json())
            d["tempo_bpm"] = self.tempo_bpm
            d["beats"] = [float(b) for b in self.beats]
            d["accents"] = [float(a) for a in self.accents]
            d["warnings"] = list(self.warnings)
        else:
            d["error"] = {"kind": self.error_kind, "message": self.error_message}
        return d


@dataclass(frozen=True)
class RunOptions:
    params: AlignmentParams = AlignmentParams()
    lenient: bool = False
    beat_config: BeatTrackerConfig = DEFAULT_CONFIG
    motion_config: MotionConfig = DEFAULT_MOTION


def analyze_audio(path, config: BeatTrackerConfig = DEFAULT_CONFIG, lenient: bool = False):
    """Beat grid for an audio file; under ``lenient`` a beatless clip yields an empty grid."""
    buf = load_audio(path, CANONICAL_RATE)
    try:
        return extract_beats(buf, config), None
    except NoPeriodicity as exc:
        if not lenient:
            raise
        return BeatGrid(np.zeros(0), 0.0, buf.duration), f"{exc.kind}: {exc}"


def analyze_motion(path, config: MotionConfig = DEFAULT_MOTION, lenient: bool = False):
    seq = load_keypoints(path)
    v = smooth(velocity(seq, config.conf_threshold), config.sigma_frames)
    try:
        return detect_accents(v, config.min_separation, config.prominence_frac, config.sigma_frames), None
    except NoAccents as exc:
        if not lenient:
            raise
        return AccentTrack(np.zeros(0), v.values, config.sigma_frames, v.fps), f"{exc.kind}: {exc}"


def process_clip(entry: ClipManifestEntry, options: RunOptions = RunOptions()) -> ClipResult:
    """Audio -> beats, keypoints -> accents, then score. Never raises for clip-level problems."""
    warnings = []
    try:
        grid, w = analyze_audio(entry.audio_path, options.beat_config, options.lenient)
        if w:
            warnings.append(w)
        track, w = analyze_motion(entry.keypoints_path, options.motion_config, options.lenient)
        if w:
            warnings.append(w)
        scores = score(grid, track, options.params, lenient=options.lenient)
        if options.lenient and (grid.beats.size == 0 or track.accents.size == 0) and not warnings:
            warnings.append("empty event set scored as 0")
    except MDAlignError as exc:
        return ClipResult(entry.clip_id, entry.model_name, False,
                          error_kind=exc.kind, error_message=str(exc))
    except Exception as exc:  # clip isolation: anything else is recorded too
        return ClipResult(entry.clip_id, entry.model_name, False,
                          error_kind="internal_error", error_message=f"{type(exc).__name__}: {exc}")
    for w in warnings:
        logger.warning("clip %s: %s", entry.clip_id, w)
    return ClipResult(
        clip_id=entry.clip_id, model_name=entry.model_name, ok=True, scores=scores,
        beats=grid.beats, tempo_bpm=grid.tempo_bpm, duration=grid.source_duration,
        accents=track.accents, smoothed=track.smoothed, fps=track.fps, warnings=warnings,
    )


@dataclass
class BenchResult:
    clips: list
    corpus: dict  # model_name -> CorpusAlignment
    dispersion: str = "std"

    @property
    def failed(self):
        return [c for c in self.clips if not c.ok]


def _process(args):
    return process_clip(*args)


def run_physical(manifest, options: RunOptions = RunOptions(), jobs: int = 1,
                 dispersion: str = "std") -> BenchResult:
    """Score every clip of ``manifest`` (a path or parsed entry list).

    Results keep manifest order regardless of ``jobs``.
    """
    entries = load_manifest(manifest) if not isinstance(manifest, list) else manifest
    work = [(e, options) for e in entries]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(work))) as pool:
            clips = list(pool.map(_process, work))
    else:
        clips = [_process(w) for w in work]

    by_model: dict = {}
    for c in clips:
        if c.ok:
            by_model.setdefault(c.model_name, []).append(c.scores)
    corpus = {m: aggregate(s, dispersion) for m, s in sorted(by_model.items())}
    return BenchResult(clips, corpus, dispersion)
