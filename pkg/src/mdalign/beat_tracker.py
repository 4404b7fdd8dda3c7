"""Beat extraction: spectral-flux onset envelope, tempo estimate, DP alignment.

The front end is a log-compressed STFT whose positive frame-to-frame
differences are summed over frequency. Tempo comes from a prior-weighted
autocorrelation of that envelope, and beats from a dynamic program that
trades onset strength against deviation from the tempo period.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .audio_io import CANONICAL_RATE, AudioBuffer
from .errors import AudioTooShort, NoPeriodicity

logger = logging.getLogger(__name__)

MIN_BPM = 40.0
MAX_BPM = 240.0


@dataclass(frozen=True)
class BeatTrackerConfig:
    n_fft: int = 1024
    hop_length: int = 160
    log_gain: float = 1000.0
    local_mean_s: float = 0.5
    prior_bpm: float = 120.0
    prior_octaves: float = 1.0
    min_bpm: float = MIN_BPM
    max_bpm: float = MAX_BPM
    tightness: float = 100.0
    # normalised onsets below this value cannot open the beat chain
    start_threshold: float = 0.01
    trim: bool = True


DEFAULT_CONFIG = BeatTrackerConfig()


@dataclass(frozen=True)
class OnsetEnvelope:
    values: np.ndarray
    hop: float
    start_offset: float
    sample_rate: int = CANONICAL_RATE
    duration: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if self.hop <= 0:
            raise ValueError("hop must be positive")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("envelope values must be finite and non-negative")
        object.__setattr__(self, "values", values)

    @property
    def frame_rate(self) -> float:
        return 1.0 / self.hop

    def times(self) -> np.ndarray:
        return self.start_offset + self.hop * np.arange(len(self.values))


@dataclass(frozen=True)
class BeatGrid:
    beats: np.ndarray
    tempo_bpm: float
    source_duration: float

    def __post_init__(self):
        beats = np.asarray(self.beats, dtype=np.float64)
        if beats.size > 1 and np.any(np.diff(beats) <= 0):
            raise ValueError("beats must be strictly increasing")
        object.__setattr__(self, "beats", beats)

    def to_json(self) -> dict:
        return {
            "beats": [float(b) for b in self.beats],
            "tempo_bpm": float(self.tempo_bpm),
            "duration": float(self.source_duration),
        }


def _moving_mean(x: np.ndarray, width: int) -> np.ndarray:
    # zero-padded centred mean, so leading/trailing silence behaves like the edge
    if width <= 1:
        return x.copy()
    kernel = np.full(width, 1.0 / width)
    return np.convolve(x, kernel, mode="same")


def onset_envelope(buf: AudioBuffer, config: BeatTrackerConfig = DEFAULT_CONFIG) -> OnsetEnvelope:
    """Spectral-flux onset strength of ``buf``.

    The signal is left-padded with ``n_fft - hop`` zeros, so envelope frame
    ``j`` is the novelty contributed by samples ``[j*hop, (j+1)*hop)``; it is
    stamped at the midpoint of that hop. Stamping at the window centre
    instead would place the flux peak of an impulse 20-30 ms early.
    """
    if buf.sample_rate != CANONICAL_RATE:
        logger.warning("onset_envelope expects %d Hz input, got %d Hz", CANONICAL_RATE, buf.sample_rate)
    if buf.duration < 0.5:
        raise AudioTooShort(f"need at least 0.5 s of audio, got {buf.duration:.3f} s")

    n_fft, hop = config.n_fft, config.hop_length
    n_frames = -(-len(buf.samples) // hop)
    padded = np.zeros((n_frames - 1) * hop + n_fft)
    padded[n_fft - hop:n_fft - hop + len(buf.samples)] = buf.samples

    idx = np.arange(n_fft)[None, :] + hop * np.arange(n_frames)[:, None]
    window = np.hanning(n_fft + 1)[:-1]
    mag = np.abs(np.fft.rfft(padded[idx] * window, axis=1))
    logmag = np.log1p(config.log_gain * mag)

    flux = np.zeros(n_frames)
    # frame 0 is compared against the all-zero frame before the signal
    flux[0] = logmag[0].sum()
    flux[1:] = np.maximum(np.diff(logmag, axis=0), 0.0).sum(axis=1)

    width = max(1, int(round(config.local_mean_s * buf.sample_rate / hop)))
    env = np.maximum(flux - _moving_mean(flux, width), 0.0)

    return OnsetEnvelope(
        values=env,
        hop=hop / buf.sample_rate,
        start_offset=0.5 * hop / buf.sample_rate,
        sample_rate=buf.sample_rate,
        duration=buf.duration,
    )


def _tempo_prior(bpm: np.ndarray, config: BeatTrackerConfig) -> np.ndarray:
    return np.exp(-0.5 * (np.log2(bpm / config.prior_bpm) / config.prior_octaves) ** 2)


def tempo_curve(env: OnsetEnvelope, config: BeatTrackerConfig = DEFAULT_CONFIG):
    """Return ``(lags, bpm, autocorrelation, weighted)`` over the admissible lag range."""
    x = env.values
    n = len(x)
    fr = env.frame_rate
    lo = max(1, int(np.floor(60.0 * fr / config.max_bpm)))
    hi = min(n - 1, int(np.ceil(60.0 * fr / config.min_bpm)))
    # full linear autocorrelation via zero-padded FFT
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(x, nfft)
    ac = np.fft.irfft(spec * np.conj(spec), nfft)[:n]
    lags = np.arange(lo, hi + 1)
    bpm = 60.0 * fr / lags
    weighted = ac[lags] * _tempo_prior(bpm, config)
    return lags, bpm, ac, weighted


def estimate_tempo(env: OnsetEnvelope, config: BeatTrackerConfig = DEFAULT_CONFIG) -> float:
    """Global tempo in BPM from the prior-weighted envelope autocorrelation."""
    if len(env.values) * env.hop < 2.0:
        raise AudioTooShort("tempo estimation needs at least 2 s of envelope")
    lags, bpm, ac, weighted = tempo_curve(env, config)
    energy = ac[0]
    if energy <= 0 or lags.size == 0 or np.max(ac[lags]) < 1e-6 * energy:
        raise NoPeriodicity("onset envelope has no periodic structure")

    k = int(np.argmax(weighted))
    lag = float(lags[k])
    # parabolic refinement of the peak lag
    if 0 < k < len(weighted) - 1:
        a, b, c = weighted[k - 1], weighted[k], weighted[k + 1]
        denom = a - 2 * b + c
        if denom < 0:
            lag += 0.5 * (a - c) / denom
    tempo = 60.0 * env.frame_rate / lag
    return float(np.clip(tempo, config.min_bpm, config.max_bpm))


def _dp(onset: np.ndarray, period: float, tightness: float, start_threshold: float):
    n = len(onset)
    backlink = np.full(n, -1, dtype=np.int64)
    cumscore = np.zeros(n)
    lo = max(int(round(period / 2)), 1)
    hi = int(round(2 * period))
    log_period = np.log(period)
    # the chain opens at the first onset above threshold; earlier frames cannot be predecessors
    above = np.flatnonzero(onset >= start_threshold)
    start = int(above[0]) if above.size else n
    cumscore[:start] = onset[:start]
    for i in range(start, n):
        cumscore[i] = onset[i]
        first, last = max(i - hi, start), i - lo
        if last < first:
            continue
        cand = np.arange(first, last + 1)
        scores = cumscore[cand] - tightness * (np.log(i - cand) - log_period) ** 2
        j = int(np.argmax(scores))
        cumscore[i] += scores[j]
        backlink[i] = cand[j]
    return cumscore, backlink


def _last_beat(cumscore: np.ndarray) -> int:
    n = len(cumscore)
    left = np.r_[-np.inf, cumscore[:-1]]
    right = np.r_[cumscore[1:], -np.inf]
    peaks = np.flatnonzero((cumscore > left) & (cumscore >= right))
    if peaks.size == 0:
        return n - 1
    threshold = 0.5 * np.median(cumscore[peaks])
    valid = peaks[cumscore[peaks] >= threshold]
    return int(valid[-1]) if valid.size else n - 1


def _onset_scale(values: np.ndarray) -> float:
    # robust to the single large flux frame where a recording starts
    scale = float(np.percentile(values, 99))
    return scale if scale > 0 else float(values.max())


def _trim(onset: np.ndarray, frames: np.ndarray) -> np.ndarray:
    if frames.size == 0:
        return frames
    strength = onset[frames]
    threshold = 0.5 * np.median(strength)
    keep = np.flatnonzero(strength > threshold)
    if keep.size == 0:
        return frames[:0]
    return frames[keep[0]:keep[-1] + 1]


def track_beats(env: OnsetEnvelope, tempo: float, config: BeatTrackerConfig = DEFAULT_CONFIG) -> BeatGrid:
    """Dynamic-programming beat alignment at a fixed global ``tempo``.

    Maximises ``sum(onset[b_i]) + tightness * sum(-(log(delta_i * tempo / 60))**2)``
    over beat sequences. The envelope is first divided by its 99th
    percentile so the tightness weight does not depend on input level. With
    ``config.trim`` the leading and trailing beats whose onset falls below
    half the median beat strength are dropped.
    """
    if not (config.min_bpm <= tempo <= config.max_bpm):
        raise ValueError(f"tempo {tempo} outside [{config.min_bpm}, {config.max_bpm}] BPM")
    if not env.values.size or env.values.max() <= 0:
        raise NoPeriodicity("onset envelope is identically zero")
    onset = env.values / _onset_scale(env.values)
    period = 60.0 * env.frame_rate / tempo

    cumscore, backlink = _dp(onset, period, config.tightness, config.start_threshold)
    frames = []
    i = _last_beat(cumscore)
    while i >= 0:
        frames.append(i)
        i = backlink[i]
    frames = np.array(frames[::-1], dtype=np.int64)
    if config.trim:
        frames = _trim(onset, frames)

    times = env.start_offset + env.hop * frames
    duration = env.duration if env.duration > 0 else len(env.values) * env.hop
    times = times[(times >= 0) & (times <= duration)]
    return BeatGrid(beats=times, tempo_bpm=float(tempo), source_duration=duration)


def extract_beats(buf: AudioBuffer, config: BeatTrackerConfig = DEFAULT_CONFIG) -> BeatGrid:
    env = onset_envelope(buf, config)
    tempo = estimate_tempo(env, config)
    return track_beats(env, tempo, config)
