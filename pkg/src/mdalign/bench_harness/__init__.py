from .leaderboard import LeaderboardRow, build_leaderboard, leaderboard_csv, leaderboard_json, model_align_scores
from .manifest import ClipManifestEntry, load_manifest, parse_manifest
from .pipeline import BenchResult, ClipResult, RunOptions, process_clip, run_physical
from .plots import render_clip, render_plot
from .report import load_judge_records, write_reports

__all__ = [
    "LeaderboardRow", "build_leaderboard", "leaderboard_csv", "leaderboard_json", "model_align_scores",
    "ClipManifestEntry", "load_manifest", "parse_manifest",
    "BenchResult", "ClipResult", "RunOptions", "process_clip", "run_physical",
    "render_clip", "render_plot", "load_judge_records", "write_reports",
]
