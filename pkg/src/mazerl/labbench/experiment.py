"""Experiment definitions and the seed-sweep runner.

A sweep is a grid of independent runs (config label x trap arm x seed),
each fully determined by its own seed material, so results do not depend
on worker scheduling. Runs land in ``<out>/<label>_<arm>_s<seed>/`` as an
``epochs.jsonl`` stream plus a final checkpoint, with ``meta.json``
written last; completed runs are skipped on re-invocation.
"""

from __future__ import annotations

import json
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..diffcore import DiffcoreError
from ..mazeworld import load_asset
from ..replay import ReplayBuffer
from ..trainer import AGENT_LABELS, Agent, EpochReport, config_for, train_epoch

SPEC_VERSION = "labspec-v1"


@dataclass
class ExperimentSpec:
    name: str
    curriculum: list[tuple[str, int]]  # ordered (maze asset, epochs)
    configs: list[str]
    traps: str  # "on" | "off" | "both"
    seeds: list[int]
    metrics_window: int = 10
    checkpoint_every: int = 0

    def __post_init__(self):
        if not self.curriculum:
            raise ValueError("curriculum must name at least one maze phase")
        for label in self.configs:
            if label not in AGENT_LABELS:
                raise ValueError(f"unknown config label {label!r}")
        if self.traps not in ("on", "off", "both"):
            raise ValueError("traps must be on, off or both")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be unique")

    @property
    def trap_arms(self) -> list[bool]:
        return {"on": [True], "off": [False], "both": [False, True]}[self.traps]

    @property
    def total_epochs(self) -> int:
        return sum(int(n) for _, n in self.curriculum)

    def to_json(self) -> dict:
        d = asdict(self)
        d["curriculum"] = [[m, int(n)] for m, n in self.curriculum]
        d["version"] = SPEC_VERSION
        return d


def load_spec(path) -> ExperimentSpec:
    data = json.loads(Path(path).read_text())
    if data.get("version") != SPEC_VERSION:
        raise ValueError(f"{path}: expected version {SPEC_VERSION!r}, got {data.get('version')!r}")
    return ExperimentSpec(
        name=data["name"],
        curriculum=[(m, int(n)) for m, n in data["curriculum"]],
        configs=list(data["configs"]),
        traps=data["traps"],
        seeds=[int(s) for s in data["seeds"]],
        metrics_window=int(data.get("metrics_window", 10)),
        checkpoint_every=int(data.get("checkpoint_every", 0)),
    )


def save_spec(spec: ExperimentSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_json(), indent=2) + "\n")


def run_dir_name(label: str, traps: bool, seed: int) -> str:
    return f"{label}_{'traps' if traps else 'notraps'}_s{seed}"


def _run_seed_sequence(label: str, traps: bool, seed: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((seed, AGENT_LABELS.index(label), int(traps)))


def _report_line(rep: EpochReport) -> str:
    return json.dumps(
        {
            "epoch": rep.epoch,
            "maze": rep.maze,
            "return": round(rep.episode_return, 9),
            "steps": rep.steps,
            "event": rep.event,
            "exit_id": rep.exit_id,
            "env_seed": rep.env_seed,
            "actions": [[round(a, 8), round(b, 8)] for a, b in rep.actions],
            "losses": {
                k: (round(val, 9) if val is not None else None)
                for k, val in rep.losses.items()
            },
            "curiosity_mean": round(rep.curiosity_mean, 9),
            "alpha": round(rep.alpha, 9),
        },
        separators=(",", ":"),
    )


def run_single(spec_json: dict, label: str, traps: bool, seed: int, out_dir: str) -> dict:
    """Train one agent through the whole curriculum; returns its meta record.

    The replay buffer is cleared at every maze relocation; network and
    optimizer state persist.
    """
    spec = ExperimentSpec(
        name=spec_json["name"],
        curriculum=[(m, int(n)) for m, n in spec_json["curriculum"]],
        configs=list(spec_json["configs"]),
        traps=spec_json["traps"],
        seeds=list(spec_json["seeds"]),
        metrics_window=int(spec_json.get("metrics_window", 10)),
        checkpoint_every=int(spec_json.get("checkpoint_every", 0)),
    )
    run_path = Path(out_dir) / run_dir_name(label, traps, seed)
    meta_path = run_path / "meta.json"
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        if meta.get("status") == "completed" and meta.get("epochs") == spec.total_epochs:
            return meta
    run_path.mkdir(parents=True, exist_ok=True)

    config = config_for(label, checkpoint_every=spec.checkpoint_every)
    root_ss = _run_seed_sequence(label, traps, seed)
    agent_ss, run_ss = root_ss.spawn(2)
    agent = Agent(config, agent_ss)
    rng = np.random.default_rng(run_ss)

    from ..genmodel import model_manifest

    (run_path / "manifest.json").write_text(
        json.dumps(
            {
                "seed": seed,
                "models": [
                    model_manifest("forward", agent.fm, seed),
                    model_manifest("actor", agent.actor, seed),
                    model_manifest("critic", agent.critics[0], seed),
                ],
            },
            indent=2,
        )
        + "\n"
    )
    meta = {
        "label": label,
        "traps": traps,
        "seed": seed,
        "spec_name": spec.name,
        "curriculum": [[m, int(n)] for m, n in spec.curriculum],
        "metrics_window": spec.metrics_window,
        "status": "running",
        "epochs": 0,
    }
    epoch = 0
    try:
        with open(run_path / "epochs.jsonl", "w") as fh:
            for maze_name, phase_epochs in spec.curriculum:
                maze = load_asset(maze_name)
                if not traps:
                    maze = maze.without_traps()
                buffer = ReplayBuffer(config.capacity)
                for _ in range(int(phase_epochs)):
                    rep = train_epoch(agent, maze, buffer, rng, epoch)
                    fh.write(_report_line(rep) + "\n")
                    epoch += 1
                    if config.checkpoint_every and epoch % config.checkpoint_every == 0:
                        agent.save(run_path / f"checkpoint_ep{epoch}.bin")
        agent.save(run_path / "checkpoint.bin")
        meta.update(status="completed", epochs=epoch)
    except DiffcoreError as exc:
        meta.update(
            status="failed",
            epochs=epoch,
            error=f"{type(exc).__name__}: {exc}",
            trace=traceback.format_exc(),
        )
    meta_path.write_text(json.dumps(meta, indent=2) + "\n")
    return meta


def run_sweep(spec: ExperimentSpec, out_dir, workers: int | None = None) -> list[dict]:
    """Run every (config, trap arm, seed) cell; failures are recorded and do
    not stop the sweep. Returns the meta records."""
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    save_spec(spec, out_path / "sweep.json")
    cells = [
        (label, arm, seed)
        for label in spec.configs
        for arm in spec.trap_arms
        for seed in spec.seeds
    ]
    spec_json = spec.to_json()
    if workers is None:
        workers = os.cpu_count() or 1
    metas: list[dict] = []
    if workers <= 1:
        for label, arm, seed in cells:
            metas.append(run_single(spec_json, label, arm, seed, str(out_path)))
        return metas
    # keep BLAS single-threaded in the children; one process per core
    os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
    os.environ.setdefault("OMP_NUM_THREADS", "1")
    import multiprocessing as mp

    ctx = mp.get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        futures = [
            pool.submit(run_single, spec_json, label, arm, seed, str(out_path))
            for label, arm, seed in cells
        ]
        for fut in futures:
            metas.append(fut.result())
    return metas
