from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import ManifestInvalid

_REQUIRED = ("clip_id", "model_name", "audio_path", "keypoints_path")
_OPTIONAL = ("prompt_text", "video_path", "judge_cache")


@dataclass(frozen=True)
class ClipManifestEntry:
    clip_id: str
    model_name: str
    prompt_text: str
    audio_path: Path
    keypoints_path: Path
    video_path: Path | None = None
    judge_cache: Path | None = None

    def media(self) -> dict:
        """Files sent to a judge: the video when present, plus the audio track."""
        media = {"audio": self.audio_path}
        if self.video_path is not None:
            media["video"] = self.video_path
        return media


def parse_manifest(entries, base_dir=".") -> list:
    """Validate a manifest (a JSON array of objects). Relative paths resolve against ``base_dir``."""
    base = Path(base_dir)
    if not isinstance(entries, list) or not entries:
        raise ManifestInvalid("manifest must be a non-empty JSON array")
    seen = set()
    out = []
    for i, e in enumerate(entries):
        if not isinstance(e, dict):
            raise ManifestInvalid(f"entry {i} is not an object")
        for key in _REQUIRED:
            if not isinstance(e.get(key), str) or not e[key]:
                raise ManifestInvalid(f"entry {i}: {key!r} must be a non-empty string")
        for key in _OPTIONAL:
            if key in e and e[key] is not None and not isinstance(e[key], str):
                raise ManifestInvalid(f"entry {i}: {key!r} must be a string")
        unknown = set(e) - set(_REQUIRED) - set(_OPTIONAL)
        if unknown:
            raise ManifestInvalid(f"entry {i}: unknown fields {sorted(unknown)}")
        if e["clip_id"] in seen:
            raise ManifestInvalid(f"duplicate clip_id {e['clip_id']!r}")
        seen.add(e["clip_id"])

        def resolve(p):
            return None if p is None else base / p

        out.append(ClipManifestEntry(
            clip_id=e["clip_id"],
            model_name=e["model_name"],
            prompt_text=e.get("prompt_text") or "",
            audio_path=resolve(e["audio_path"]),
            keypoints_path=resolve(e["keypoints_path"]),
            video_path=resolve(e.get("video_path")),
            judge_cache=resolve(e.get("judge_cache")),
        ))
    return out


def load_manifest(path) -> list:
    path = Path(path)
    try:
        entries = json.loads(path.read_text())
    except OSError as exc:
        raise ManifestInvalid(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestInvalid(f"{path}: invalid JSON ({exc})") from exc
    return parse_manifest(entries, path.parent)
