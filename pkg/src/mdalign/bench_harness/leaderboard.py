"""Per-model leaderboard: physical scores, optional judge alignment, combined average."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from ..judge_client import JudgeRecord

ALIGN_DIMENSION = "alignment"


@dataclass(frozen=True)
class LeaderboardRow:
    model_name: str
    n_clips: int
    vbcs: float
    csd: float
    abhs: float
    hsd: float
    low_level: float
    align: float | None = None
    avg: float | None = None

    @property
    def sort_value(self) -> float:
        return self.avg if self.avg is not None else self.low_level


def model_align_scores(records, clip_models: dict) -> dict:
    """Mean normalised alignment rating per model.

    Repeats are averaged within a clip first, so clips weigh equally.
    Records for clips outside ``clip_models`` are ignored.
    """
    per_clip: dict = {}
    for r in records:
        if isinstance(r, dict):
            r = JudgeRecord.from_json(r)
        if r.dimension != ALIGN_DIMENSION or r.clip_id not in clip_models:
            continue
        per_clip.setdefault(r.clip_id, []).append(r.normalized)
    per_model: dict = {}
    for clip_id in sorted(per_clip):
        vals = per_clip[clip_id]
        per_model.setdefault(clip_models[clip_id], []).append(sum(vals) / len(vals))
    return {m: sum(v) / len(v) for m, v in per_model.items()}


def build_leaderboard(physical: dict, align: dict | None = None) -> list:
    """Rows sorted by combined average (descending), ties by model name.

    ``physical`` maps model -> CorpusAlignment; ``align`` maps model ->
    normalised judge alignment. Models without a judge score get no
    combined average and rank by their low-level average.
    """
    align = align or {}
    rows = []
    for model, corpus in physical.items():
        low = (corpus.mean_vbcs + corpus.mean_abhs) / 2
        a = align.get(model)
        rows.append(LeaderboardRow(
            model_name=model,
            n_clips=len(corpus.per_clip),
            vbcs=corpus.mean_vbcs,
            csd=corpus.csd,
            abhs=corpus.mean_abhs,
            hsd=corpus.hsd,
            low_level=low,
            align=a,
            avg=None if a is None else (low + a) / 2,
        ))
    rows.sort(key=lambda r: (-r.sort_value, r.model_name))
    return rows


def _columns(rows):
    cols = ["model_name", "n_clips", "vbcs", "csd", "abhs", "hsd", "low_level"]
    if any(r.align is not None for r in rows):
        cols += ["align", "avg"]
    return cols


def leaderboard_json(rows) -> list:
    cols = _columns(rows)
    return [{c: getattr(r, c) for c in cols} for r in rows]


def _cell(v):
    if v is None:
        return ""
    # repr round-trips floats exactly
    return repr(v) if isinstance(v, float) else v


def leaderboard_csv(rows) -> str:
    cols = _columns(rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(getattr(r, c)) for c in cols])
    return buf.getvalue()


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"
