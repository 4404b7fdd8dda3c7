from .client import (
    ADAPTERS,
    API_KEY_ENV,
    Adapter,
    InlineJSONAdapter,
    JudgeClient,
    JudgeConfig,
    JudgeRecord,
    MultipartAdapter,
    RateLimiter,
    clip_hash,
    judge_clip,
    normalize,
)
from .parsing import parse_score
from .prompts import DIMENSIONS, JudgeDimension, get_dimension, render_prompt

__all__ = [
    "ADAPTERS", "API_KEY_ENV", "Adapter", "InlineJSONAdapter", "JudgeClient", "JudgeConfig",
    "JudgeRecord", "MultipartAdapter", "RateLimiter", "clip_hash", "judge_clip", "normalize", "parse_score",
    "DIMENSIONS", "JudgeDimension", "get_dimension", "render_prompt",
]
