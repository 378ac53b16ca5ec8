"""Command line interface: run sweeps, build reports, replay episodes."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiment import load_spec, run_sweep
from .report import emit_report, episode_trajectory_svg


def _parse_seed_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",")]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mazerl", description="intrinsic-reward maze agent laboratory"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a seed sweep from a spec file")
    p_run.add_argument("--spec", required=True, help="experiment spec (labspec-v1 JSON)")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--seeds", help="override seeds, e.g. 0..19 or 0,3,7")
    p_run.add_argument("--traps", choices=["on", "off", "both"], help="override trap arms")
    p_run.add_argument("--configs", help="override config labels, e.g. N,E,EH")
    p_run.add_argument("--workers", type=int, default=None, help="worker processes")

    p_report = sub.add_parser("report", help="emit CSV/JSON/SVG reports for a sweep")
    p_report.add_argument("--in", dest="in_dir", required=True, help="sweep directory")
    p_report.add_argument("--out", dest="out_dir", default=None, help="report directory")

    p_replay = sub.add_parser("replay", help="re-render one stored episode as SVG")
    p_replay.add_argument("--run", required=True, help="single run directory")
    p_replay.add_argument("--episode", type=int, required=True, help="epoch index")
    p_replay.add_argument("--svg", required=True, help="output SVG path")

    args = parser.parse_args(argv)

    if args.command == "run":
        spec = load_spec(args.spec)
        if args.seeds:
            spec.seeds = _parse_seed_range(args.seeds)
        if args.traps:
            spec.traps = args.traps
        if args.configs:
            spec.configs = args.configs.split(",")
        spec.__post_init__()
        metas = run_sweep(spec, args.out, workers=args.workers)
        failed = [m for m in metas if m["status"] != "completed"]
        for meta in metas:
            print(
                f"{meta['label']:>2} {'traps' if meta['traps'] else 'clear':>6} "
                f"seed {meta['seed']:>3}: {meta['status']} ({meta['epochs']} epochs)"
            )
        if failed:
            print(f"{len(failed)} run(s) failed", file=sys.stderr)
            return 1
        return 0

    if args.command == "report":
        comparison = emit_report(args.in_dir, args.out_dir)
        out = Path(args.out_dir) if args.out_dir else Path(args.in_dir) / "report"
        print(f"report written to {out}")
        print(json.dumps(comparison, indent=2))
        return 0

    if args.command == "replay":
        svg = episode_trajectory_svg(args.run, args.episode)
        Path(args.svg).write_text(svg)
        print(f"wrote {args.svg}")
        return 0

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
