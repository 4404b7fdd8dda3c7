"""Write a bench run to disk.

Layout under ``out_dir``::

    per_clip.json  leaderboard.csv  leaderboard.json  errors.json
    plots/<clip_id>.svg
    figures/leaderboard.svg  figures/clip_scores.svg
"""

from __future__ import annotations

import json
from pathlib import Path

from ..judge_client import JudgeRecord
from .figures import clip_scatter_figure, leaderboard_figure
from .leaderboard import build_leaderboard, dumps, leaderboard_csv, leaderboard_json, model_align_scores
from .plots import render_clip


def load_judge_records(paths) -> list:
    records = []
    for p in paths:
        data = json.loads(Path(p).read_text())
        if isinstance(data, dict):
            data = data.get("records", [])
        records.extend(JudgeRecord.from_json(d) for d in data)
    return records


def write_reports(result, out_dir, params, judge_records=(), plots: bool = True) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    (out / "per_clip.json").write_text(dumps([c.to_json() for c in result.clips]))
    errors = [c.to_json() for c in result.clips if not c.ok]
    (out / "errors.json").write_text(dumps(errors))

    clip_models = {c.clip_id: c.model_name for c in result.clips if c.ok}
    align = model_align_scores(judge_records, clip_models) if judge_records else {}
    rows = build_leaderboard(result.corpus, align)
    (out / "leaderboard.json").write_text(dumps({
        "sigma": params.sigma,
        "tau": params.tau,
        "dispersion": result.dispersion,
        "rows": leaderboard_json(rows),
    }))
    (out / "leaderboard.csv").write_text(leaderboard_csv(rows))

    if plots:
        (out / "plots").mkdir(exist_ok=True)
        for c in result.clips:
            if c.ok:
                (out / "plots" / f"{c.clip_id}.svg").write_text(render_clip(c, params.tau))
        (out / "figures").mkdir(exist_ok=True)
        if rows:
            leaderboard_figure(rows, out / "figures" / "leaderboard.svg")
        clip_scatter_figure(result.clips, out / "figures" / "clip_scores.svg")
    return rows
