"""``mdalign`` command line.

Exit codes: 0 success, 1 usage error, 2 partial corpus failure, 3 total failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .agreement_stats import (
    agreement_by_dimension,
    read_human_csv,
    read_judge_csv,
    read_runs_csv,
    stability_by_dimension,
)
from .align_metrics import AlignmentParams, score
from .beat_tracker import DEFAULT_CONFIG
from .bench_harness import RunOptions, load_judge_records, load_manifest, render_plot, run_physical, write_reports
from .bench_harness.pipeline import analyze_audio, analyze_motion
from .errors import MDAlignError
from .motion_kinetics import MotionConfig

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL, EXIT_FAILED = 0, 1, 2, 3

logger = logging.getLogger("mdalign")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(x):
    v = float(x)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {x}")
    return v


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _params(args):
    return AlignmentParams(sigma=args.sigma, tau=args.tau)


def _motion(args):
    return MotionConfig(args.conf_threshold, args.sigma_frames, args.min_separation, args.prominence)


def _add_align(p):
    p.add_argument("--sigma", type=_positive, default=0.1, help="VBCS Gaussian tolerance in seconds")
    p.add_argument("--tau", type=_positive, default=0.1, help="ABHS hit window in seconds")
    p.add_argument("--lenient", action="store_true", help="score empty beat/accent sets as 0 instead of failing")


def _add_motion(p):
    p.add_argument("--conf-threshold", type=float, default=0.3)
    p.add_argument("--sigma-frames", type=_positive, default=2.0)
    p.add_argument("--min-separation", type=float, default=0.2)
    p.add_argument("--prominence", type=float, default=0.1, help="minimum prominence as a fraction of the peak speed")


def cmd_beats(args):
    grid, _ = analyze_audio(args.audio, DEFAULT_CONFIG)
    _emit(grid.to_json(), args.output)
    return EXIT_OK


def cmd_accents(args):
    track, _ = analyze_motion(args.keypoints, _motion(args))
    _emit(track.to_json(), args.output)
    return EXIT_OK


def cmd_score(args):
    grid, _ = analyze_audio(args.audio, DEFAULT_CONFIG, args.lenient)
    track, _ = analyze_motion(args.keypoints, _motion(args), args.lenient)
    _emit(score(grid, track, _params(args), lenient=args.lenient).to_json(), args.output)
    return EXIT_OK


def cmd_plot(args):
    grid, _ = analyze_audio(args.audio, DEFAULT_CONFIG, args.lenient)
    track, _ = analyze_motion(args.keypoints, _motion(args), args.lenient)
    svg = render_plot(grid.beats, track.accents, track.smoothed, track.fps, args.tau,
                      duration=grid.source_duration, title=Path(args.audio).stem)
    Path(args.output).write_text(svg)
    return EXIT_OK


def cmd_bench(args):
    entries = load_manifest(args.manifest)
    options = RunOptions(params=_params(args), lenient=args.lenient, motion_config=_motion(args))
    result = run_physical(entries, options, jobs=args.jobs, dispersion=args.dispersion)

    judge_paths = list(args.judge_records or [])
    judge_paths += sorted({str(e.judge_cache) for e in entries if e.judge_cache is not None})
    records = load_judge_records(judge_paths) if judge_paths else []
    write_reports(result, args.out, options.params, records, plots=not args.no_plots)

    n_failed = len(result.failed)
    for c in result.failed:
        logger.error("clip %s failed: %s: %s", c.clip_id, c.error_kind, c.error_message)
    if n_failed == len(result.clips):
        return EXIT_FAILED
    return EXIT_PARTIAL if n_failed else EXIT_OK


def cmd_judge(args):
    from .judge_client import JudgeClient, JudgeConfig

    entries = load_manifest(args.manifest)
    config = JudgeConfig.from_file(args.config)
    records, failures = [], []
    with JudgeClient(config, cache_dir=args.cache) as client:
        for e in entries:
            for dim in args.dimension:
                try:
                    records += client.judge_clip(e.clip_id, e.media(), dim, e.prompt_text, args.repeats)
                except MDAlignError as exc:
                    failures.append({"clip_id": e.clip_id, "dimension": dim, "kind": exc.kind,
                                     "message": str(exc), "response": getattr(exc, "text", None)})
                    logger.error("judge failed for %s/%s: %s", e.clip_id, dim, exc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "judge_records.json").write_text(json.dumps([r.to_json() for r in records], indent=2) + "\n")
    (out / "judge_errors.json").write_text(json.dumps(failures, indent=2) + "\n")
    with open(out / "judge.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["clip_id", "dimension", "score", "repeat_index"])
        for r in records:
            w.writerow([r.clip_id, r.dimension, r.raw_score, r.repeat_index])
    if failures and not records:
        return EXIT_FAILED
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_agree(args):
    _emit(agreement_by_dimension(read_human_csv(args.human), read_judge_csv(args.judge)), args.output)
    return EXIT_OK


def cmd_stability(args):
    _emit(stability_by_dimension(read_runs_csv(args.scores)), args.output)
    return EXIT_OK


def cmd_demo(args):
    from .synth import write_demo

    path = write_demo(args.out, duration=args.duration)
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mdalign", description="Rhythmic alignment evaluation for music-dance video.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("beats", help="extract beat timestamps from a WAV file")
    p.add_argument("audio")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_beats)

    p = sub.add_parser("accents", help="detect motion accents in a keypoint JSON file")
    p.add_argument("keypoints")
    _add_motion(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_accents)

    p = sub.add_parser("score", help="VBCS / ABHS for one clip")
    p.add_argument("--audio", required=True)
    p.add_argument("--keypoints", required=True)
    _add_align(p)
    _add_motion(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("plot", help="SVG timeline of one clip")
    p.add_argument("--audio", required=True)
    p.add_argument("--keypoints", required=True)
    _add_align(p)
    _add_motion(p)
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("bench", help="score a manifest and write leaderboard reports")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--dispersion", choices=("std", "variance"), default="std")
    p.add_argument("--judge-records", nargs="*", help="judge_records.json files to merge into the leaderboard")
    p.add_argument("--no-plots", action="store_true")
    _add_align(p)
    _add_motion(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("judge", help="query the multimodal judge for every manifest clip")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", required=True, help="JSON endpoint config")
    p.add_argument("--dimension", nargs="+", default=["alignment"])
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--cache", default="cache")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_judge)

    p = sub.add_parser("agree", help="judge-vs-human agreement per dimension")
    p.add_argument("--human", required=True)
    p.add_argument("--judge", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("stability", help="judge self-consistency over repeated runs")
    p.add_argument("--scores", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("demo", help="write the synthetic demonstration corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--duration", type=_positive, default=6.0)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", 1) < 1 or getattr(args, "repeats", 1) < 1:
        parser.error("--jobs and --repeats must be >= 1")
    try:
        return args.func(args)
    except MDAlignError as exc:
        print(f"mdalign: {exc.kind}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (OSError, ValueError) as exc:
        print(f"mdalign: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
