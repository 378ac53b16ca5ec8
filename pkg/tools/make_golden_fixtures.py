"""Regenerate the pinned renderer fixtures under tests/fixtures/golden/."""

import json
from pathlib import Path

import numpy as np

from mazerl.mazeworld import load_asset, reset, step

CASES = [("biased_t", 7, 0), ("biased_t", 7, 2), ("t", 3, 1)]
OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "golden"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, seed, steps in CASES:
        maze = load_asset(name)
        state, obs = reset(maze, seed)
        rng = np.random.default_rng(0)
        for _ in range(steps):
            obs = step(state, (float(rng.uniform(-0.3, 0.3)), -0.2)).obs
        flat = np.concatenate([obs.image.reshape(-1), [obs.speed]]).astype("<f8")
        stem = OUT / f"{name}_s{seed}_t{steps}"
        stem.with_suffix(".f64").write_bytes(flat.tobytes())
        stem.with_suffix(".json").write_text(
            json.dumps({"maze": name, "seed": seed, "step": steps}) + "\n"
        )
        print("wrote", stem)


if __name__ == "__main__":
    main()
