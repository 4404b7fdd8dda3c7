import struct
import wave

import numpy as np
import pytest

from mdalign.synth import bouncing_skeleton, click_track, keypoint_document


def pcm_wav(path, frames, rate, sampwidth):
    """Write integer PCM through the stdlib ``wave`` module (independent of mdalign's reader)."""
    frames = np.asarray(frames)
    if frames.ndim == 1:
        frames = frames[:, None]
    with wave.open(str(path), "wb") as w:
        w.setnchannels(frames.shape[1])
        w.setsampwidth(sampwidth)
        w.setframerate(rate)
        if sampwidth == 1:
            data = frames.astype(np.uint8).tobytes()
        elif sampwidth == 2:
            data = frames.astype("<i2").tobytes()
        elif sampwidth == 3:
            v = frames.astype(np.int64).ravel() & 0xFFFFFF
            data = b"".join(int(x).to_bytes(3, "little") for x in v)
        else:
            data = frames.astype("<i4").tobytes()
        w.writeframes(data)
    return path


def float_wav(path, frames, rate, fmt_tag=3):
    frames = np.asarray(frames, dtype="<f4")
    if frames.ndim == 1:
        frames = frames[:, None]
    ch = frames.shape[1]
    data = frames.tobytes()
    fmt = struct.pack("<HHIIHH", fmt_tag, ch, rate, rate * 4 * ch, 4 * ch, 32)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(data)) + data
    path.write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
    return path


@pytest.fixture
def click120():
    return click_track(120.0, 10.0)


@pytest.fixture
def keypoint_doc():
    def make(frames, fps=24.0):
        return keypoint_document(np.asarray(frames, dtype=float), fps)
    return make


@pytest.fixture
def skeleton():
    return bouncing_skeleton
