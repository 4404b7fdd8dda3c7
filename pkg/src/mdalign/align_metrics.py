"""Reference-free beat/accent alignment scores and their corpus dispersion."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import EmptyAccents, EmptyBeats, EmptyCorpus


@dataclass(frozen=True)
class AlignmentParams:
    sigma: float = 0.1
    tau: float = 0.1

    def __post_init__(self):
        if not (self.sigma > 0 and self.tau > 0):
            raise ValueError(f"sigma and tau must be positive (sigma={self.sigma}, tau={self.tau})")


@dataclass(frozen=True)
class AlignmentScores:
    vbcs: float
    abhs: float
    overall: float
    n_beats: int
    n_accents: int
    params: AlignmentParams

    def to_json(self) -> dict:
        return {
            "vbcs": self.vbcs,
            "abhs": self.abhs,
            "overall": self.overall,
            "sigma": self.params.sigma,
            "tau": self.params.tau,
            "n_beats": self.n_beats,
            "n_accents": self.n_accents,
        }


@dataclass(frozen=True)
class CorpusAlignment:
    per_clip: tuple
    mean_vbcs: float
    mean_abhs: float
    csd: float
    hsd: float
    dispersion: str = "std"

    def to_json(self) -> dict:
        d = asdict(self)
        d["per_clip"] = [s.to_json() for s in self.per_clip]
        return d


def _times(events) -> np.ndarray:
    # accepts a BeatGrid, an AccentTrack or a plain sequence of seconds
    for attr in ("beats", "accents"):
        if hasattr(events, attr):
            events = getattr(events, attr)
            break
    return np.sort(np.asarray(events, dtype=np.float64).ravel())


def nearest_distance(queries: np.ndarray, refs: np.ndarray) -> np.ndarray:
    """Distance from each query to the closest element of sorted ``refs``."""
    idx = np.searchsorted(refs, queries)
    left = refs[np.clip(idx - 1, 0, len(refs) - 1)]
    right = refs[np.clip(idx, 0, len(refs) - 1)]
    return np.minimum(np.abs(queries - left), np.abs(queries - right))


def _check(beats, accents):
    if beats.size == 0:
        raise EmptyBeats("beat set is empty")
    if accents.size == 0:
        raise EmptyAccents("accent set is empty")


def vbcs(beats, accents, params: AlignmentParams = AlignmentParams()) -> float:
    """Mean Gaussian proximity of each motion accent to its nearest beat."""
    a, m = _times(beats), _times(accents)
    _check(a, m)
    d = nearest_distance(m, a)
    return float(np.mean(np.exp(-(d ** 2) / (2.0 * params.sigma ** 2))))


def abhs(beats, accents, params: AlignmentParams = AlignmentParams()) -> float:
    """Fraction of beats with a motion accent strictly closer than ``tau``."""
    a, m = _times(beats), _times(accents)
    _check(a, m)
    d = nearest_distance(a, m)
    return float(np.mean(d < params.tau))


def overall(vbcs_value: float, abhs_value: float) -> float:
    return (vbcs_value + abhs_value) / 2


def score(beats, accents, params: AlignmentParams = AlignmentParams(), lenient: bool = False) -> AlignmentScores:
    """VBCS, ABHS and their mean for one clip.

    With ``lenient`` an empty beat or accent set scores 0 instead of raising.
    """
    a, m = _times(beats), _times(accents)
    try:
        v, h = vbcs(a, m, params), abhs(a, m, params)
    except (EmptyBeats, EmptyAccents):
        if not lenient:
            raise
        v = h = 0.0
    return AlignmentScores(v, h, overall(v, h), int(a.size), int(m.size), params)


def aggregate(per_clip, dispersion: str = "std") -> CorpusAlignment:
    """Corpus means plus the population spread of per-clip VBCS (CSD) and ABHS (HSD).

    ``dispersion`` is ``"std"`` (default) or ``"variance"``.
    """
    per_clip = tuple(per_clip)
    if not per_clip:
        raise EmptyCorpus("no clip scores to aggregate")
    if dispersion not in ("std", "variance"):
        raise ValueError(f"dispersion must be 'std' or 'variance', got {dispersion!r}")
    v = np.array([s.vbcs for s in per_clip])
    h = np.array([s.abhs for s in per_clip])
    spread = np.std if dispersion == "std" else np.var
    return CorpusAlignment(
        per_clip=per_clip,
        mean_vbcs=float(np.mean(v)),
        mean_abhs=float(np.mean(h)),
        csd=float(spread(v)),
        hsd=float(spread(h)),
        dispersion=dispersion,
    )
