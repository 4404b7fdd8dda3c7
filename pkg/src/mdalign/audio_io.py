"""WAV decoding and band-limited resampling.

Everything downstream assumes mono float64 audio at ``CANONICAL_RATE``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .errors import EmptyAudio, UnreadableFile, UnsupportedEncoding

CANONICAL_RATE = 16000

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE

# Kaiser beta for the anti-aliasing FIR; ~80 dB stopband.
KAISER_BETA = 8.0


@dataclass(frozen=True)
class AudioBuffer:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional (mono)")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def _parse_chunks(data: bytes, path) -> dict[bytes, bytes]:
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise UnreadableFile(f"{path}: not a RIFF/WAVE file")
    chunks = {}
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack("<4sI", data[pos:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        # keep the first occurrence; a truncated data chunk is tolerated
        chunks.setdefault(cid, body)
        pos += 8 + size + (size & 1)
    return chunks


def _decode_frames(raw: bytes, fmt_tag: int, bits: int, channels: int) -> np.ndarray:
    width = bits // 8
    usable = len(raw) - len(raw) % (width * channels)
    raw = raw[:usable]
    if fmt_tag == _WAVE_FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise UnsupportedEncoding(f"{bits}-bit float WAV is not supported")
        x = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        if not np.all(np.isfinite(x)):
            raise UnsupportedEncoding("float WAV contains non-finite samples")
        x = np.clip(x, -1.0, 1.0)
    elif bits == 8:
        # 8-bit PCM is unsigned with a 128 offset
        x = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif bits == 16:
        x = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif bits == 24:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        v = np.where(v & 0x800000, v - 0x1000000, v)
        x = v.astype(np.float64) / 8388608.0
    elif bits == 32:
        x = np.frombuffer(raw, dtype="<i4").astype(np.float64) / 2147483648.0
    else:
        raise UnsupportedEncoding(f"{bits}-bit PCM is not supported")
    return x.reshape(-1, channels)


def decode_wav(path) -> AudioBuffer:
    """Read a PCM or IEEE-float WAV file into a mono :class:`AudioBuffer`.

    Stereo input is mixed down by averaging the two channels. The file's
    own sample rate is kept; call :func:`resample` to reach the pipeline
    rate.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc

    chunks = _parse_chunks(data, path)
    if b"fmt " not in chunks or b"data" not in chunks:
        raise UnreadableFile(f"{path}: missing fmt or data chunk")
    fmt = chunks[b"fmt "]
    if len(fmt) < 16:
        raise UnreadableFile(f"{path}: truncated fmt chunk")
    fmt_tag, channels, rate, _, _, bits = struct.unpack("<HHIIHH", fmt[:16])
    if fmt_tag == _WAVE_FORMAT_EXTENSIBLE:
        if len(fmt) < 26:
            raise UnreadableFile(f"{path}: truncated WAVE_FORMAT_EXTENSIBLE header")
        # first two bytes of the SubFormat GUID carry the real format tag
        fmt_tag = struct.unpack("<H", fmt[24:26])[0]
    if fmt_tag not in (_WAVE_FORMAT_PCM, _WAVE_FORMAT_IEEE_FLOAT):
        raise UnsupportedEncoding(f"{path}: WAV format tag 0x{fmt_tag:04x} is not PCM or float")
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{path}: {channels} channels (only mono/stereo supported)")
    if rate <= 0 or bits % 8:
        raise UnreadableFile(f"{path}: invalid header (rate={rate}, bits={bits})")

    frames = _decode_frames(chunks[b"data"], fmt_tag, bits, channels)
    if frames.shape[0] == 0:
        raise EmptyAudio(f"{path}: no samples")
    return AudioBuffer(frames.mean(axis=1), rate)


def write_wav(path, buf: AudioBuffer) -> None:
    """Write ``buf`` as 16-bit PCM mono."""
    pcm = np.clip(np.round(buf.samples * 32767.0), -32768, 32767).astype("<i2").tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(pcm), b"WAVE",
        b"fmt ", 16, _WAVE_FORMAT_PCM, 1, buf.sample_rate, buf.sample_rate * 2, 2, 16,
        b"data", len(pcm),
    )
    Path(path).write_bytes(header + pcm)


def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Polyphase windowed-sinc resampling to ``target_rate``.

    Identity (same object) when the rates already match.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == buf.sample_rate:
        return buf
    ratio = Fraction(int(target_rate), int(buf.sample_rate))
    up, down = ratio.numerator, ratio.denominator
    y = resample_poly(buf.samples, up, down, window=("kaiser", KAISER_BETA))
    return AudioBuffer(np.clip(y, -1.0, 1.0), int(target_rate))


def load_audio(path, target_rate: int = CANONICAL_RATE) -> AudioBuffer:
    return resample(decode_wav(path), target_rate)
