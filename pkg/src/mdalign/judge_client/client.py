"""HTTP client for an external multimodal judge.

Provider specifics live in adapter classes; :class:`JudgeClient` only deals
with retries, rate limiting, concurrency and the on-disk response cache.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import mimetypes
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import httpx

from ..errors import AuthFailure, EndpointUnreachable, UnparseableResponse
from .parsing import parse_score
from .prompts import get_dimension, render_prompt

logger = logging.getLogger(__name__)

API_KEY_ENV = "TMD_JUDGE_API_KEY"
RETRY_STATUS = frozenset({429, 500, 502, 503, 504})


@dataclass(frozen=True)
class JudgeConfig:
    endpoint_url: str
    model_name: str
    max_concurrency: int = 4
    timeout_s: float = 60.0
    adapter: str = "multipart"
    min_interval_s: float = 0.0
    max_attempts: int = 5
    backoff_base_s: float = 1.0

    @classmethod
    def from_file(cls, path) -> "JudgeConfig":
        data = json.loads(Path(path).read_text())
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass(frozen=True)
class JudgeRecord:
    clip_id: str
    dimension: str
    raw_score: int
    normalized: float
    rationale: str
    repeat_index: int
    endpoint_model: str

    @classmethod
    def build(cls, clip_id, dimension, raw_score, rationale, repeat_index, endpoint_model):
        return cls(clip_id, dimension, int(raw_score), normalize(raw_score), rationale,
                   int(repeat_index), endpoint_model)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "JudgeRecord":
        return cls.build(d["clip_id"], d["dimension"], d["raw_score"], d.get("rationale", ""),
                         d.get("repeat_index", 0), d.get("endpoint_model", ""))


def normalize(raw_score: int) -> float:
    """Map a 1-5 rating onto [0, 1]."""
    return (int(raw_score) - 1) / 4


def clip_hash(media: dict, instruction: str = "") -> str:
    """Content hash of a clip's media files (in role order) and its instruction."""
    h = hashlib.sha256()
    for role in sorted(media):
        h.update(role.encode())
        h.update(b"\0")
        h.update(Path(media[role]).read_bytes())
        h.update(b"\0")
    h.update(instruction.encode())
    return h.hexdigest()[:16]


# -- provider adapters --------------------------------------------------------

class Adapter:
    """Turns a prompt plus media into an HTTP request and a response into text."""

    def build_request(self, config: JudgeConfig, prompt: str, media: dict, api_key: str) -> dict:
        raise NotImplementedError

    def response_text(self, response: httpx.Response) -> str:
        try:
            body = response.json()
        except ValueError:
            return response.text
        if isinstance(body, dict):
            if isinstance(body.get("text"), str):
                return body["text"]
            choices = body.get("choices")
            if isinstance(choices, list) and choices:
                msg = choices[0].get("message", {}) if isinstance(choices[0], dict) else {}
                if isinstance(msg.get("content"), str):
                    return msg["content"]
        return json.dumps(body)


def _auth_headers(api_key):
    return {"Authorization": f"Bearer {api_key}"} if api_key else {}


class MultipartAdapter(Adapter):
    """``multipart/form-data`` POST: fields ``model`` and ``prompt``, one file part per media role."""

    def build_request(self, config, prompt, media, api_key):
        files = []
        for role in sorted(media):
            path = Path(media[role])
            mime = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
            files.append((role, (path.name, path.read_bytes(), mime)))
        return {
            "method": "POST",
            "url": config.endpoint_url,
            "headers": _auth_headers(api_key),
            "data": {"model": config.model_name, "prompt": prompt},
            "files": files,
        }


class InlineJSONAdapter(Adapter):
    """JSON POST with media inlined as base64."""

    def build_request(self, config, prompt, media, api_key):
        parts = []
        for role in sorted(media):
            path = Path(media[role])
            parts.append({
                "role": role,
                "filename": path.name,
                "mime_type": mimetypes.guess_type(path.name)[0] or "application/octet-stream",
                "data": base64.b64encode(path.read_bytes()).decode("ascii"),
            })
        return {
            "method": "POST",
            "url": config.endpoint_url,
            "headers": _auth_headers(api_key),
            "json": {"model": config.model_name, "prompt": prompt, "media": parts},
        }


ADAPTERS = {"multipart": MultipartAdapter, "json": InlineJSONAdapter}


class RateLimiter:
    """Enforces a minimum interval between request starts across threads."""

    def __init__(self, min_interval_s: float, sleep=time.sleep, clock=time.monotonic):
        self.min_interval = min_interval_s
        self._sleep, self._clock = sleep, clock
        self._lock = threading.Lock()
        self._next = 0.0

    def wait(self):
        if self.min_interval <= 0:
            return
        with self._lock:
            now = self._clock()
            start = max(now, self._next)
            self._next = start + self.min_interval
        if start > now:
            self._sleep(start - now)


class JudgeClient:
    def __init__(self, config: JudgeConfig, cache_dir=None, api_key=None, transport=None,
                 sleep=time.sleep, adapter: Adapter | None = None, template_dir=None):
        self.config = config
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.adapter = adapter or ADAPTERS[config.adapter]()
        self.template_dir = template_dir
        self._sleep = sleep
        self._http = httpx.Client(transport=transport, timeout=config.timeout_s)
        self._limiter = RateLimiter(config.min_interval_s, sleep=sleep)
        self._cache_lock = threading.Lock()
        self._stats_lock = threading.Lock()
        self.requests_sent = 0
        self.retries = 0

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- cache ---------------------------------------------------------------
    def _cache_path(self, chash, dimension, repeat):
        return self.cache_dir / chash / dimension / f"{repeat}.json"

    def _cache_get(self, chash, dimension, repeat):
        if self.cache_dir is None:
            return None
        path = self._cache_path(chash, dimension, repeat)
        try:
            data = json.loads(path.read_text())
        except (OSError, ValueError):
            return None
        if data.get("endpoint_model") != self.config.model_name:
            return None
        return JudgeRecord.from_json(data)

    def _cache_put(self, chash, record: JudgeRecord):
        if self.cache_dir is None:
            return
        path = self._cache_path(chash, record.dimension, record.repeat_index)
        with self._cache_lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(record.to_json(), indent=2, sort_keys=True))
            tmp.replace(path)

    # -- transport -----------------------------------------------------------
    def _send(self, prompt: str, media: dict) -> str:
        if not self.api_key:
            raise AuthFailure(f"no API key; set {API_KEY_ENV}")
        cfg = self.config
        last = None
        for attempt in range(cfg.max_attempts):
            if attempt:
                delay = cfg.backoff_base_s * 2 ** (attempt - 1)
                with self._stats_lock:
                    self.retries += 1
                logger.warning("judge request retry %d/%d in %.1fs after %s",
                               attempt, cfg.max_attempts - 1, delay, last)
                self._sleep(delay)
            self._limiter.wait()
            request = self.adapter.build_request(cfg, prompt, media, self.api_key)
            with self._stats_lock:
                self.requests_sent += 1
            try:
                resp = self._http.request(**request)
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}: {exc}"
                continue
            if resp.status_code in (401, 403):
                raise AuthFailure(f"endpoint rejected credentials (HTTP {resp.status_code})")
            if resp.status_code in RETRY_STATUS:
                last = f"HTTP {resp.status_code}"
                continue
            if resp.status_code >= 400:
                raise EndpointUnreachable(f"endpoint returned HTTP {resp.status_code}: {resp.text[:200]}")
            return self.adapter.response_text(resp)
        raise EndpointUnreachable(f"gave up after {cfg.max_attempts} attempts ({last})")

    def judge_once(self, clip_id, media, dimension, instruction, repeat_index, chash=None) -> JudgeRecord:
        dim = get_dimension(dimension)
        chash = chash or clip_hash(media, instruction)
        cached = self._cache_get(chash, dim.id, repeat_index)
        if cached is not None:
            return cached
        prompt = render_prompt(dim, instruction, clip_id=clip_id, template_dir=self.template_dir)
        text = self._send(prompt, media)
        try:
            score, rationale = parse_score(text)
        except UnparseableResponse as exc:
            raise UnparseableResponse(
                f"clip {clip_id!r} dimension {dim.id!r} repeat {repeat_index}: {exc}", exc.text) from None
        record = JudgeRecord.build(clip_id, dim.id, score, rationale, repeat_index, self.config.model_name)
        self._cache_put(chash, record)
        return record

    def judge_clip(self, clip_id, media: dict, dimension, instruction: str = "", repeats: int = 1):
        """Run ``repeats`` independent judgments; records come back in repeat order.

        Every repeat is attempted even if one fails; the first failure is
        then re-raised, with the successful repeats already cached.
        """
        if repeats < 1:
            raise ValueError("repeats must be >= 1")
        chash = clip_hash(media, instruction)
        workers = max(1, min(self.config.max_concurrency, repeats))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(self.judge_once, clip_id, media, dimension, instruction, r, chash)
                       for r in range(repeats)]
        errors = [f.exception() for f in futures if f.exception() is not None]
        if errors:
            raise errors[0]
        return [f.result() for f in futures]


def judge_clip(clip_id, media, dimension, repeats, config: JudgeConfig, instruction="",
               cache_dir=None, **client_kwargs):
    with JudgeClient(config, cache_dir=cache_dir, **client_kwargs) as client:
        return client.judge_clip(clip_id, media, dimension, instruction, repeats)
