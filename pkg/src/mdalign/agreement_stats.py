"""Judge-vs-human agreement (PLCC, SRCC, QWK) and judge self-consistency."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateExpected, DegenerateVector

LEVELS = 5


@dataclass(frozen=True)
class StabilityReport:
    dimension: str
    consistency: float
    n_runs: int
    score_histogram: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "consistency": self.consistency,
            "n_runs": self.n_runs,
            "score_histogram": list(self.score_histogram),
        }


def _pair(x, y):
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("need at least two paired scores")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("scores must be finite")
    return x, y


def plcc(x, y) -> float:
    x, y = _pair(x, y)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise DegenerateVector("Pearson correlation undefined for a constant vector")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def rankdata(x) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x))
    sx = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def srcc(x, y) -> float:
    x, y = _pair(x, y)
    return plcc(rankdata(x), rankdata(y))


def _levels(a, levels):
    a = np.asarray(a)
    if a.size and not np.all(np.equal(np.mod(a, 1), 0)):
        raise ValueError("QWK needs integer scores")
    a = a.astype(np.int64)
    if np.any((a < 1) | (a > levels)):
        raise ValueError(f"QWK scores must lie in 1..{levels}")
    return a - 1


def qwk(rater_a, rater_b, levels: int = LEVELS) -> float:
    """Quadratic weighted kappa on integer scores ``1..levels``.

    Expected agreement is the outer product of the two raters' marginals.
    """
    a, b = _pair(rater_a, rater_b)
    a, b = _levels(a, levels), _levels(b, levels)
    n = len(a)
    observed = np.zeros((levels, levels))
    np.add.at(observed, (a, b), 1.0)
    observed /= n
    expected = np.outer(observed.sum(axis=1), observed.sum(axis=0))
    i, j = np.indices((levels, levels))
    w = (i - j) ** 2 / (levels - 1) ** 2
    denom = float((w * expected).sum())
    if denom == 0:
        raise DegenerateExpected("both raters are constant and equal; kappa undefined")
    return 1.0 - float((w * observed).sum()) / denom


def histogram(scores, levels: int = LEVELS) -> list:
    counts = Counter(int(s) for s in scores)
    bad = [s for s in counts if not 1 <= s <= levels]
    if bad:
        raise ValueError(f"scores outside 1..{levels}: {sorted(bad)}")
    return [counts.get(k, 0) for k in range(1, levels + 1)]


def consistency(scores, levels: int = LEVELS) -> float:
    """One minus the normalised Shannon entropy of the score histogram."""
    hist = histogram(scores, levels)
    n = sum(hist)
    if n == 0:
        raise ValueError("need at least one run")
    h = -sum((c / n) * math.log(c / n) for c in hist if c)
    return 1.0 - h / math.log(levels)


def stability(dimension: str, scores, levels: int = LEVELS) -> StabilityReport:
    hist = histogram(scores, levels)
    return StabilityReport(dimension, consistency(scores, levels), sum(hist), hist)


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def discretize(means, levels: int = LEVELS):
    """Round mean scores to the nearest level; also return which were exact halves."""
    out, ambiguous = [], []
    for i, m in enumerate(means):
        if math.isclose(m % 1.0, 0.5, abs_tol=1e-9):
            ambiguous.append(i)
        out.append(min(levels, max(1, round_half_up(m))))
    return out, ambiguous


# -- CSV ingestion -----------------------------------------------------------

def _read_rows(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty CSV")
        fields = [f.strip() for f in reader.fieldnames]
        missing = {"clip_id", "dimension"} - set(fields)
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        rows = [{k.strip(): (v or "").strip() for k, v in row.items() if k is not None} for row in reader]
    return fields, rows


def read_human_csv(path) -> dict:
    """``clip_id,dimension,<rater>...`` -> {dimension: {clip_id: mean rating}}.

    Every column other than ``clip_id`` and ``dimension`` is one rater; blank
    cells are skipped.
    """
    fields, rows = _read_rows(path)
    raters = [f for f in fields if f not in ("clip_id", "dimension")]
    if not raters:
        raise ValueError(f"{path}: no rater columns")
    out: dict = {}
    for row in rows:
        vals = [float(row[r]) for r in raters if row.get(r, "") != ""]
        if not vals:
            continue
        out.setdefault(row["dimension"], {})[row["clip_id"]] = sum(vals) / len(vals)
    return out


def read_judge_csv(path) -> dict:
    """``clip_id,dimension,score[,repeat_index]`` -> {dimension: {clip_id: mean score}}.

    Repeated runs of the same clip are averaged.
    """
    fields, rows = _read_rows(path)
    if "score" not in fields:
        raise ValueError(f"{path}: missing column 'score'")
    acc: dict = {}
    for row in rows:
        if row["score"] == "":
            continue
        acc.setdefault(row["dimension"], {}).setdefault(row["clip_id"], []).append(float(row["score"]))
    return {d: {c: sum(v) / len(v) for c, v in clips.items()} for d, clips in acc.items()}


def read_runs_csv(path) -> dict:
    """``clip_id,dimension,score`` (one row per run) -> {dimension: {clip_id: [scores]}}."""
    fields, rows = _read_rows(path)
    if "score" not in fields:
        raise ValueError(f"{path}: missing column 'score'")
    out: dict = {}
    for row in rows:
        if row["score"] == "":
            continue
        out.setdefault(row["dimension"], {}).setdefault(row["clip_id"], []).append(int(float(row["score"])))
    return out


def agreement_by_dimension(human: dict, judge: dict) -> dict:
    """PLCC/SRCC/QWK per dimension over the clips both sources scored.

    QWK needs integer levels on both sides, so mean scores are rounded half
    up; clips whose mean sat exactly on a half are listed under
    ``ambiguous_rounding``. A statistic that is undefined for the data is
    reported as ``null`` with the reason under ``errors``.
    """
    report = {}
    for dim in sorted(set(human) & set(judge)):
        clips = sorted(set(human[dim]) & set(judge[dim]))
        h = [human[dim][c] for c in clips]
        j = [judge[dim][c] for c in clips]
        entry = {"n": len(clips), "errors": {}}
        for name, fn in (("plcc", plcc), ("srcc", srcc)):
            try:
                entry[name] = fn(h, j)
            except (DegenerateVector, ValueError) as exc:
                entry[name] = None
                entry["errors"][name] = str(exc)
        hq, h_amb = discretize(h)
        jq, j_amb = discretize(j)
        entry["ambiguous_rounding"] = sorted({clips[i] for i in h_amb + j_amb})
        try:
            entry["qwk"] = qwk(hq, jq)
        except (DegenerateExpected, ValueError) as exc:
            entry["qwk"] = None
            entry["errors"]["qwk"] = str(exc)
        report[dim] = entry
    return report


def stability_by_dimension(runs: dict) -> dict:
    """Per-clip consistency for every dimension, plus the mean over clips."""
    report = {}
    for dim in sorted(runs):
        clips = [dict(clip_id=c, **stability(dim, runs[dim][c]).to_json()) for c in sorted(runs[dim])]
        for c in clips:
            del c["dimension"]
        report[dim] = {
            "dimension": dim,
            "consistency": sum(c["consistency"] for c in clips) / len(clips),
            "n_clips": len(clips),
            "clips": clips,
        }
    return report
