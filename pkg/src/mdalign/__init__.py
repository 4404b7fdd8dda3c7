"""Rhythmic alignment evaluation for music-dance video generation."""

__version__ = "0.1.0"

from .align_metrics import AlignmentParams, AlignmentScores, CorpusAlignment, abhs, aggregate, overall, score, vbcs
from .audio_io import CANONICAL_RATE, AudioBuffer, decode_wav, load_audio, resample
from .beat_tracker import BeatGrid, OnsetEnvelope, estimate_tempo, extract_beats, onset_envelope, track_beats
from .motion_kinetics import (
    AccentTrack,
    KeypointSequence,
    VelocitySignal,
    detect_accents,
    extract_accents,
    load_keypoints,
    smooth,
    velocity,
)

__all__ = [
    "AlignmentParams", "AlignmentScores", "CorpusAlignment", "abhs", "aggregate", "overall", "score", "vbcs",
    "CANONICAL_RATE", "AudioBuffer", "decode_wav", "load_audio", "resample",
    "BeatGrid", "OnsetEnvelope", "estimate_tempo", "extract_beats", "onset_envelope", "track_beats",
    "AccentTrack", "KeypointSequence", "VelocitySignal", "detect_accents", "extract_accents",
    "load_keypoints", "smooth", "velocity",
]
