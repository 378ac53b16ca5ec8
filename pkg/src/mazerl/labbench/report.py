"""Report emission: CSV summaries, the comparison JSON and SVG trajectory
plots regenerated purely from stored epoch streams."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from ..mazeworld import Maze, exit_glow_color, load_asset, replay_positions
from .stats import (
    InsufficientSeedsError,
    RunRecord,
    SweepResult,
    exit_proportions,
    exit_rate,
    phase_slices,
    run_phase_rate,
    trap_impact,
)

_PATH_COLORS = (
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
    "#17becf", "#e377c2", "#8c564b", "#bcbd22", "#7f7f7f",
)


def emit_report(in_dir, out_dir=None) -> dict:
    """Write summary.csv, phases.csv, comparison.json, exit_proportions.csv
    and per-run trajectory SVGs; returns the comparison dict."""
    result_dir = Path(in_dir)
    report_dir = Path(out_dir) if out_dir else result_dir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    from .stats import load_sweep

    result = load_sweep(result_dir)

    with open(report_dir / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["config", "traps", "seed", "rate"])
        for run in sorted(result.runs, key=lambda r: (r.label, r.traps, r.seed)):
            writer.writerow(
                [run.label, "on" if run.traps else "off", run.seed, run_phase_rate(run)]
            )

    with open(report_dir / "phases.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["config", "traps", "seed", "maze", "rate"])
        for run in sorted(result.runs, key=lambda r: (r.label, r.traps, r.seed)):
            for maze_name, _, _ in phase_slices(run.curriculum):
                writer.writerow(
                    [
                        run.label,
                        "on" if run.traps else "off",
                        run.seed,
                        maze_name,
                        run_phase_rate(run, maze_name),
                    ]
                )

    comparison: dict = {"configs": {}}
    for label in result.labels():
        entry: dict = {}
        for traps in result.trap_arms():
            try:
                mean, lo, hi, rates = exit_rate(result, label, traps)
            except InsufficientSeedsError:
                continue
            entry["traps" if traps else "no_traps"] = {
                "rate": mean,
                "ci99": [lo, hi],
                "seeds": len(rates),
            }
        if "traps" in entry and "no_traps" in entry:
            entry["trap_impact"] = trap_impact(result, label)
        comparison["configs"][label] = entry
    (report_dir / "comparison.json").write_text(json.dumps(comparison, indent=2) + "\n")

    with open(report_dir / "exit_proportions.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["config", "traps", "epoch", "outcome", "proportion"])
        for label in result.labels():
            for traps in result.trap_arms():
                epochs, props = exit_proportions(result, label, traps)
                for key in sorted(props):
                    for i in epochs:
                        writer.writerow(
                            [label, "on" if traps else "off", i, key, props[key][i]]
                        )

    traj_dir = report_dir / "trajectories"
    traj_dir.mkdir(exist_ok=True)
    for run in result.runs:
        svg = final_window_trajectories_svg(run)
        (traj_dir / f"{Path(run.path).name}.svg").write_text(svg)
    return comparison


def final_window_trajectories_svg(run: RunRecord, window: int | None = None) -> str:
    """Overhead plot of the final-window episodes of the run's last phase."""
    window = window or run.metrics_window
    maze_name, _, end = phase_slices(run.curriculum)[-1]
    maze = load_asset(maze_name)
    paths = []
    for record in run.epochs[end - window : end]:
        positions = replay_positions(maze, record["env_seed"], record["actions"])
        paths.append(positions)
    return trajectory_svg(maze, paths)


def episode_trajectory_svg(run_dir, episode_index: int) -> str:
    """Overhead plot of one stored episode, re-simulated from its seed and
    action list."""
    run_path = Path(run_dir)
    meta = json.loads((run_path / "meta.json").read_text())
    record = None
    with open(run_path / "epochs.jsonl") as fh:
        for line in fh:
            rec = json.loads(line)
            if rec["epoch"] == episode_index:
                record = rec
                break
    if record is None:
        raise ValueError(f"episode {episode_index} not found in {run_dir}")
    maze = load_asset(record["maze"])
    if not meta["traps"]:
        maze = maze.without_traps()
    positions = replay_positions(maze, record["env_seed"], record["actions"])
    return trajectory_svg(maze, [positions])


def trajectory_svg(maze: Maze, paths: list[list[tuple[float, float]]], cell: int = 40) -> str:
    """Hand-rolled SVG: wall grid, exit markers, one polyline per episode."""
    width, height = maze.width * cell, maze.height * cell
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    trap_set = set(maze.trap_cells)
    for r in range(maze.height):
        for c in range(maze.width):
            if maze.walls[r, c]:
                fill = "#b08" if (r, c) in trap_set else "#444"
                parts.append(
                    f'<rect x="{c * cell}" y="{r * cell}" width="{cell}" height="{cell}" '
                    f'fill="{fill}"/>'
                )
            exit_id = int(maze.exit_ids[r, c])
            if exit_id:
                rr, gg, bb = (int(255 * v) for v in exit_glow_color(exit_id))
                mark = "&#10003;" if maze.exits[exit_id].is_correct else "&#10007;"
                parts.append(
                    f'<rect x="{c * cell}" y="{r * cell}" width="{cell}" height="{cell}" '
                    f'fill="rgb({rr},{gg},{bb})" fill-opacity="0.5"/>'
                )
                parts.append(
                    f'<text x="{(c + 0.5) * cell}" y="{(r + 0.72) * cell}" '
                    f'text-anchor="middle" font-size="{int(cell * 0.6)}">{mark}</text>'
                )
    sr, sc = maze.start_cell
    parts.append(
        f'<circle cx="{(sc + 0.5) * cell}" cy="{(sr + 0.5) * cell}" r="{cell * 0.18}" '
        f'fill="#000"/>'
    )
    for i, path in enumerate(paths):
        points = " ".join(f"{x * cell:.1f},{y * cell:.1f}" for x, y in path)
        color = _PATH_COLORS[i % len(_PATH_COLORS)]
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" '
            f'stroke-width="{cell * 0.07:.1f}" stroke-opacity="0.8"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
