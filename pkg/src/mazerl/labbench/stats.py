"""Sweep-level statistics: correct-exit rates with confidence intervals and
trap-impact comparisons."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..mazeworld import load_asset

Z_99_TWO_SIDED = 2.5758293035489004  # Phi^-1(0.995)
Z_99_ONE_SIDED = 2.3263478740408408  # Phi^-1(0.99)


class InsufficientSeedsError(Exception):
    pass


@dataclass
class RunRecord:
    label: str
    traps: bool
    seed: int
    status: str
    curriculum: list[tuple[str, int]]
    metrics_window: int
    epochs: list[dict]  # parsed epoch lines
    path: str


@dataclass
class SweepResult:
    runs: list[RunRecord]

    def select(self, label: str | None = None, traps: bool | None = None):
        out = []
        for run in self.runs:
            if label is not None and run.label != label:
                continue
            if traps is not None and run.traps != traps:
                continue
            out.append(run)
        return out

    def labels(self):
        return sorted({r.label for r in self.runs})

    def trap_arms(self):
        return sorted({r.traps for r in self.runs})


def load_sweep(out_dir) -> SweepResult:
    """Scan a sweep directory for completed runs."""
    out_path = Path(out_dir)
    runs: list[RunRecord] = []
    for meta_path in sorted(out_path.glob("*/meta.json")):
        meta = json.loads(meta_path.read_text())
        if meta.get("status") != "completed":
            continue
        epochs = []
        with open(meta_path.parent / "epochs.jsonl") as fh:
            for line in fh:
                epochs.append(json.loads(line))
        runs.append(
            RunRecord(
                label=meta["label"],
                traps=bool(meta["traps"]),
                seed=int(meta["seed"]),
                status=meta["status"],
                curriculum=[(m, int(n)) for m, n in meta["curriculum"]],
                metrics_window=int(meta.get("metrics_window", 10)),
                epochs=epochs,
                path=str(meta_path.parent),
            )
        )
    return SweepResult(runs)


_CORRECT_IDS: dict[str, set[int]] = {}


def correct_exit_ids(maze_name: str) -> set[int]:
    ids = _CORRECT_IDS.get(maze_name)
    if ids is None:
        maze = load_asset(maze_name)
        ids = {i for i, rule in maze.exits.items() if rule.is_correct}
        _CORRECT_IDS[maze_name] = ids
    return ids


def phase_slices(curriculum: list[tuple[str, int]]):
    """(maze, start_epoch, end_epoch) per curriculum phase."""
    out = []
    start = 0
    for maze_name, n in curriculum:
        out.append((maze_name, start, start + int(n)))
        start += int(n)
    return out


def run_phase_rate(run: RunRecord, maze_name: str | None = None, window: int | None = None) -> float:
    """Correct-exit rate over the final ``window`` episodes of a phase
    (default: the last phase)."""
    window = window or run.metrics_window
    phases = phase_slices(run.curriculum)
    if maze_name is None:
        maze_name, _, end = phases[-1]
    else:
        matching = [p for p in phases if p[0] == maze_name]
        if not matching:
            raise ValueError(f"maze {maze_name!r} not in curriculum {run.curriculum}")
        _, _, end = matching[-1]
    ids = correct_exit_ids(maze_name)
    tail = run.epochs[end - window : end]
    hits = sum(1 for e in tail if e["event"] == "exit" and e["exit_id"] in ids)
    return hits / window


def exit_rate(
    result: SweepResult,
    label: str,
    traps: bool,
    maze_name: str | None = None,
    window: int | None = None,
):
    """Mean correct-exit rate across seeds with a normal-approximation 99%
    confidence interval; returns (mean, lo, hi, per_seed_rates)."""
    runs = result.select(label, traps)
    if len(runs) < 2:
        raise InsufficientSeedsError(
            f"need at least 2 seeds for {label}/{'traps' if traps else 'notraps'}, have {len(runs)}"
        )
    rates = np.array(
        [run_phase_rate(r, maze_name, window) for r in sorted(runs, key=lambda r: r.seed)]
    )
    mean = float(rates.mean())
    half = float(Z_99_TWO_SIDED * rates.std(ddof=1) / np.sqrt(len(rates)))
    return mean, max(mean - half, 0.0), min(mean + half, 1.0), rates


def trap_impact(
    result: SweepResult,
    label: str,
    maze_name: str | None = None,
    window: int | None = None,
):
    """One-sided 99% comparison of no-trap vs trap correct-exit rates.

    Verdict is "degraded" when the no-trap rate exceeds the trap rate at
    that confidence, else "unaffected". Returns a dict with the verdict,
    the z statistic and both means.
    """
    _, _, _, r_nt = exit_rate(result, label, False, maze_name, window)
    _, _, _, r_tr = exit_rate(result, label, True, maze_name, window)
    diff = float(r_nt.mean() - r_tr.mean())
    se = float(np.sqrt(r_nt.var(ddof=1) / len(r_nt) + r_tr.var(ddof=1) / len(r_tr)))
    if se == 0.0:
        degraded = diff > 0.0
        z = float("inf") if diff > 0 else 0.0
    else:
        z = diff / se
        degraded = z > Z_99_ONE_SIDED
    return {
        "verdict": "degraded" if degraded else "unaffected",
        "z": z,
        "rate_no_trap": float(r_nt.mean()),
        "rate_trap": float(r_tr.mean()),
        "gap": diff,
    }


def outcome_key(epoch_record: dict) -> str:
    if epoch_record["event"] == "exit":
        return f"exit_{epoch_record['exit_id']}"
    return epoch_record["event"]


def exit_proportions(result: SweepResult, label: str, traps: bool):
    """Per-epoch share of each outcome across seeds; rows sum to one.

    Returns (epoch_index_list, {outcome: np.ndarray of proportions}).
    """
    runs = result.select(label, traps)
    if not runs:
        return [], {}
    n_epochs = min(len(r.epochs) for r in runs)
    keys = sorted({outcome_key(e) for r in runs for e in r.epochs[:n_epochs]})
    counts = {k: np.zeros(n_epochs) for k in keys}
    for run in runs:
        for i, e in enumerate(run.epochs[:n_epochs]):
            counts[outcome_key(e)][i] += 1.0
    total = float(len(runs))
    return list(range(n_epochs)), {k: v / total for k, v in counts.items()}
