import csv
import json
import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from mdalign.align_metrics import AlignmentParams, CorpusAlignment
from mdalign.audio_io import write_wav
from mdalign.bench_harness import (
    RunOptions,
    build_leaderboard,
    leaderboard_csv,
    leaderboard_json,
    load_manifest,
    model_align_scores,
    parse_manifest,
    render_plot,
    run_physical,
    write_reports,
)
from mdalign.errors import ManifestInvalid
from mdalign.judge_client import JudgeRecord
from mdalign.synth import bouncing_skeleton, click_track, write_demo, write_keypoints

SVG = "{http://www.w3.org/2000/svg}"


def on_beat_corpus(root, n=3, duration=6.0):
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, bpm in enumerate([120.0, 100.0, 90.0][:n]):
        audio, _ = click_track(bpm, duration, noise_db=-30.0, seed=i)
        write_wav(root / f"c{i}.wav", audio)
        write_keypoints(root / f"c{i}.json", bouncing_skeleton(60.0 / bpm, duration, jitter_px=0.3, seed=i))
        entries.append({"clip_id": f"c{i}", "model_name": "M", "prompt_text": "bounce",
                        "audio_path": f"c{i}.wav", "keypoints_path": f"c{i}.json"})
    path = root / "manifest.json"
    path.write_text(json.dumps(entries))
    return path


@pytest.fixture(scope="module")
def onbeat(tmp_path_factory):
    return on_beat_corpus(tmp_path_factory.mktemp("onbeat"))


@pytest.fixture(scope="module")
def demo(tmp_path_factory):
    return write_demo(tmp_path_factory.mktemp("demo"))


def test_three_on_beat_clips(onbeat):
    res = run_physical(onbeat)
    assert [c.clip_id for c in res.clips] == ["c0", "c1", "c2"]
    assert all(c.ok for c in res.clips)
    corp = res.corpus["M"]
    v = [c.scores.vbcs for c in res.clips]
    assert corp.mean_vbcs == pytest.approx(np.mean(v))
    assert corp.csd == pytest.approx(np.std(v))
    assert all(c.scores.vbcs >= 0.8 and c.scores.abhs >= 0.8 for c in res.clips)


def test_missing_file_isolated(onbeat, tmp_path):
    entries = json.loads(onbeat.read_text())
    for e in entries:
        for k in ("audio_path", "keypoints_path"):
            e[k] = str(onbeat.parent / e[k])
    entries.append(dict(entries[0], clip_id="ghost", audio_path=str(tmp_path / "nope.wav")))
    man = tmp_path / "m.json"
    man.write_text(json.dumps(entries))
    res = run_physical(man)
    base = run_physical(onbeat)
    ghost = res.clips[-1]
    assert not ghost.ok and ghost.error_kind == "unreadable_file"
    assert [c.scores for c in res.clips[:-1]] == [c.scores for c in base.clips]
    assert res.corpus["M"].mean_vbcs == base.corpus["M"].mean_vbcs


def _tree(path):
    return {p.relative_to(path).as_posix(): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


def test_reports_byte_identical_and_jobs_independent(demo, tmp_path):
    params = AlignmentParams()
    outs = []
    for name, jobs in (("a", 1), ("b", 1), ("c", 8)):
        res = run_physical(demo, RunOptions(params), jobs=jobs)
        write_reports(res, tmp_path / name, params)
        outs.append(_tree(tmp_path / name))
    assert outs[0] == outs[1] == outs[2]
    assert {"per_clip.json", "errors.json", "leaderboard.json", "leaderboard.csv",
            "figures/leaderboard.svg", "figures/clip_scores.svg"} <= set(outs[0])
    assert sum(k.startswith("plots/") for k in outs[0]) == 6


def test_aggregates_recomputed_from_per_clip(demo, tmp_path):
    res = run_physical(demo)
    write_reports(res, tmp_path, AlignmentParams())
    per_clip = json.loads((tmp_path / "per_clip.json").read_text())
    board = json.loads((tmp_path / "leaderboard.json").read_text())
    assert board["dispersion"] == "std"
    for row in board["rows"]:
        v = [c["vbcs"] for c in per_clip if c["model_name"] == row["model_name"]]
        h = [c["abhs"] for c in per_clip if c["model_name"] == row["model_name"]]
        mv, mh = sum(v) / len(v), sum(h) / len(h)
        assert row["n_clips"] == len(v)
        assert row["vbcs"] == pytest.approx(mv, rel=1e-12)
        assert row["abhs"] == pytest.approx(mh, rel=1e-12)
        assert row["csd"] == pytest.approx((sum((x - mv) ** 2 for x in v) / len(v)) ** 0.5, abs=1e-12)
        assert row["hsd"] == pytest.approx((sum((x - mh) ** 2 for x in h) / len(h)) ** 0.5, abs=1e-12)
        assert row["low_level"] == pytest.approx((mv + mh) / 2, rel=1e-12)
    with open(tmp_path / "leaderboard.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["model_name"] for r in rows] == [r["model_name"] for r in board["rows"]]
    assert board["rows"][0]["model_name"] == "Synced"
    assert board["rows"][-1]["model_name"] == "Offbeat"


def test_variance_dispersion(demo):
    std = run_physical(demo).corpus["Drifting"]
    var = run_physical(demo, dispersion="variance").corpus["Drifting"]
    assert var.csd == pytest.approx(std.csd ** 2)


# -- leaderboard ---------------------------------------------------------------

def corpus(v, h):
    return CorpusAlignment(per_clip=(None,), mean_vbcs=v, mean_abhs=h, csd=0.0, hsd=0.0)


def test_leaderboard_combined_average():
    rows = build_leaderboard({"model_x": corpus(0.50, 0.27)}, {"model_x": 0.79})
    assert rows[0].low_level == pytest.approx(0.385, abs=1e-15)
    assert rows[0].avg == pytest.approx(0.5875, abs=1e-15)
    assert round(rows[0].avg, 2) == 0.59


def test_leaderboard_without_judge_drops_columns():
    rows = build_leaderboard({"A": corpus(0.5, 0.5)})
    assert "align" not in leaderboard_csv(rows).splitlines()[0]
    assert "avg" not in leaderboard_json(rows)[0]


def test_leaderboard_tie_break_by_name():
    rows = build_leaderboard({"zeta": corpus(0.6, 0.2), "alpha": corpus(0.2, 0.6), "mid": corpus(0.9, 0.9)})
    assert [r.model_name for r in rows] == ["mid", "alpha", "zeta"]


def test_model_align_scores_average_repeats_first():
    recs = [JudgeRecord.build("a", "alignment", 5, "", 0, "j"),
            JudgeRecord.build("a", "alignment", 5, "", 1, "j"),
            JudgeRecord.build("a", "alignment", 5, "", 2, "j"),
            JudgeRecord.build("b", "alignment", 1, "", 0, "j"),
            JudgeRecord.build("b", "video_motion", 5, "", 0, "j"),
            JudgeRecord.build("zz", "alignment", 5, "", 0, "j")]
    assert model_align_scores(recs, {"a": "M", "b": "M"}) == {"M": 0.5}


def test_reports_merge_judge_records(demo, tmp_path):
    res = run_physical(demo)
    recs = [JudgeRecord.build(c.clip_id, "alignment", 4, "", 0, "j") for c in res.clips]
    write_reports(res, tmp_path, AlignmentParams(), recs, plots=False)
    rows = json.loads((tmp_path / "leaderboard.json").read_text())["rows"]
    assert all(r["align"] == 0.75 for r in rows)
    assert all(r["avg"] == pytest.approx((r["low_level"] + 0.75) / 2) for r in rows)
    assert not (tmp_path / "plots").exists()


# -- SVG -----------------------------------------------------------------------

def test_on_beat_accents_inside_bands(onbeat):
    res = run_physical(onbeat)
    tau = 0.1
    for clip in res.clips:
        root = ET.fromstring(render_plot(clip.beats, clip.accents, clip.smoothed, clip.fps, tau,
                                         duration=clip.duration))
        bands = [(float(r.get("x")), float(r.get("x")) + float(r.get("width")))
                 for r in root.iter(SVG + "rect") if r.get("class") == "tau-band"]
        dots = [float(c.get("cx")) for c in root.iter(SVG + "circle") if c.get("class") == "accent"]
        assert len(bands) == len(clip.beats) and len(dots) == len(clip.accents) > 0
        assert all(any(lo <= x <= hi for lo, hi in bands) for x in dots)


def test_svg_geometry_exact():
    svg = render_plot([1.0], [1.05, 3.0], np.linspace(0, 1, 97), 24.0, 0.1, duration=4.0)
    root = ET.fromstring(svg)
    band = next(r for r in root.iter(SVG + "rect") if r.get("class") == "tau-band")
    x0, w = float(band.get("x")), float(band.get("width"))
    cx = [float(c.get("cx")) for c in root.iter(SVG + "circle")]
    assert x0 <= cx[0] <= x0 + w
    assert not x0 <= cx[1] <= x0 + w


def test_svg_empty_accents_and_determinism():
    smoothed = np.abs(np.sin(np.linspace(0, 10, 100)))
    a = render_plot([0.5, 1.0], [], smoothed, 24.0, 0.1)
    assert a == render_plot([0.5, 1.0], [], smoothed, 24.0, 0.1)
    root = ET.fromstring(a)
    assert not [c for c in root.iter(SVG + "circle")]
    assert sum(1 for l in root.iter(SVG + "line") if l.get("class") == "beat") == 2
    assert root.find(f".//{SVG}polyline") is not None
    assert not re.search(r"(href|src)=", a)


def test_lenient_motionless_clip(tmp_path):
    audio, _ = click_track(120.0, 4.0, seed=1)
    write_wav(tmp_path / "a.wav", audio)
    write_keypoints(tmp_path / "k.json", np.tile(bouncing_skeleton(0.5, 0.1)[:1], (96, 1, 1)))
    man = tmp_path / "m.json"
    man.write_text(json.dumps([{"clip_id": "still", "model_name": "M", "audio_path": "a.wav",
                                "keypoints_path": "k.json"}]))
    strict = run_physical(man)
    assert strict.clips[0].error_kind == "no_accents"
    res = run_physical(man, RunOptions(lenient=True))
    clip = res.clips[0]
    assert clip.ok and clip.scores.vbcs == 0.0 and clip.warnings
    write_reports(res, tmp_path / "out", AlignmentParams())
    svg = (tmp_path / "out" / "plots" / "still.svg").read_text()
    assert "accent" in svg and "<circle" not in svg


# -- manifest ------------------------------------------------------------------

GOOD = {"clip_id": "a", "model_name": "M", "audio_path": "a.wav", "keypoints_path": "a.json"}


@pytest.mark.parametrize("doc", [
    [],
    {"clip_id": "a"},
    [dict(GOOD, clip_id="")],
    [{k: v for k, v in GOOD.items() if k != "audio_path"}],
    [dict(GOOD, extra=1)],
    [GOOD, GOOD],
    [dict(GOOD, prompt_text=5)],
    ["a"],
])
def test_manifest_invalid(doc):
    with pytest.raises(ManifestInvalid):
        parse_manifest(doc)


def test_manifest_paths_resolve_relative(tmp_path):
    (tmp_path / "m.json").write_text(json.dumps([dict(GOOD, video_path="v.mp4")]))
    (e,) = load_manifest(tmp_path / "m.json")
    assert e.audio_path == tmp_path / "a.wav"
    assert e.media() == {"audio": tmp_path / "a.wav", "video": tmp_path / "v.mp4"}
    with pytest.raises(ManifestInvalid):
        load_manifest(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ManifestInvalid):
        load_manifest(tmp_path / "bad.json")
