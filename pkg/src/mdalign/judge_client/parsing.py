"""Extract a 1-5 score from free-form judge output."""

from __future__ import annotations

import json
import re

from ..errors import UnparseableResponse

_SCORE_LINE = re.compile(r"\bscore\b\s*[:=]\s*\**\s*(-?\d+(?:\.\d+)?)", re.IGNORECASE)
_LONE_INT = re.compile(r"^\W*(\d+)\W*$")
_RATIONALE_KEYS = ("rationale", "reasoning", "reason", "explanation")


def _json_objects(text: str):
    """Yield ``(object, start, end)`` for every JSON object embedded in ``text``."""
    dec = json.JSONDecoder()
    i = 0
    while True:
        i = text.find("{", i)
        if i < 0:
            return
        try:
            obj, end = dec.raw_decode(text, i)
        except json.JSONDecodeError:
            i += 1
            continue
        if isinstance(obj, dict):
            yield obj, i, end
        i = end


def _as_level(value):
    if isinstance(value, bool):
        return None
    if isinstance(value, str):
        value = value.strip()
        if not re.fullmatch(r"-?\d+(\.0+)?", value):
            return None
        value = float(value)
    if isinstance(value, (int, float)) and float(value).is_integer() and 1 <= value <= 5:
        return int(value)
    return None


def parse_score(text: str) -> tuple[int, str]:
    """Return ``(score, rationale)``.

    Accepted forms: ``Score: N`` anywhere in the text, a JSON object with a
    ``score`` field, or a line holding nothing but an integer. Every form
    found must agree on one value in 1..5; otherwise the response is
    rejected rather than guessed.
    """
    candidates = []
    rationale = None
    pieces, pos = [], 0
    for obj, start, end in _json_objects(text):
        if "score" in obj:
            candidates.append(obj["score"])
        for key in _RATIONALE_KEYS:
            if rationale is None and isinstance(obj.get(key), str):
                rationale = obj[key]
        pieces.append(text[pos:start])
        pos = end
    pieces.append(text[pos:])
    # JSON objects are excised so their "score" keys are not counted twice
    stripped = "\n".join(pieces)
    for m in _SCORE_LINE.finditer(stripped):
        candidates.append(m.group(1))
    for line in stripped.splitlines():
        m = _LONE_INT.match(line)
        if m:
            candidates.append(m.group(1))

    levels = {_as_level(c) for c in candidates}
    if not candidates:
        raise UnparseableResponse("no score found in judge response", text)
    if None in levels:
        raise UnparseableResponse(f"score outside 1..5 in judge response: {candidates!r}", text)
    if len(levels) > 1:
        raise UnparseableResponse(f"ambiguous scores in judge response: {sorted(levels)}", text)
    return levels.pop(), (rationale if rationale is not None else text.strip())
