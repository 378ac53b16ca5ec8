"""Episodic replay buffer with FIFO eviction, zero padding and masks.

Episodes are stored whole for recurrent training. A sampled batch is
padded to the longest episode it contains; ``masks`` is 1 on real
transitions and 0 on padding, and every padded cell is exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffcore import UsageError
from .mazeworld import IMAGE_SIZE


@dataclass
class EpisodeRecord:
    """One episode: o_0..o_{T+1}, a_{-1}..a_T, r_0..r_T, done_0..done_T.

    ``images`` has T+2 frames, ``actions`` T+2 rows (the zero action
    prepended), ``rewards``/``dones`` T+1 entries.
    """

    images: np.ndarray  # (T+2, 8, 8, 4)
    speeds: np.ndarray  # (T+2,)
    actions: np.ndarray  # (T+2, 2)
    rewards: np.ndarray  # (T+1,)
    dones: np.ndarray  # (T+1,)

    @property
    def steps(self) -> int:
        return self.rewards.shape[0]

    def validate(self) -> None:
        t1 = self.rewards.shape[0]
        if t1 < 1:
            raise UsageError("episode must contain at least one step")
        if self.images.shape != (t1 + 1, IMAGE_SIZE, IMAGE_SIZE, 4):
            raise UsageError(f"bad image stack shape {self.images.shape}")
        if self.speeds.shape != (t1 + 1,) or self.actions.shape != (t1 + 1, 2):
            raise UsageError("episode arrays are mutually inconsistent")
        if self.dones.shape != (t1,):
            raise UsageError("dones length mismatch")
        if np.any(self.actions[0] != 0.0):
            raise UsageError("a_{-1} must be the zero action")
        if self.dones[-1] != 1.0 or np.any(self.dones[:-1] != 0.0):
            raise UsageError("done must be 0 until the final step, then 1")


@dataclass
class PaddedBatch:
    """Stacked episodes padded to the longest one in the batch."""

    images: np.ndarray  # (B, T+2, 8, 8, 4)
    speeds: np.ndarray  # (B, T+2)
    actions: np.ndarray  # (B, T+2, 2)
    rewards: np.ndarray  # (B, T+1)
    dones: np.ndarray  # (B, T+1)
    masks: np.ndarray  # (B, T+1)
    lengths: np.ndarray  # (B,) true step counts

    @property
    def batch_size(self) -> int:
        return self.rewards.shape[0]

    @property
    def horizon(self) -> int:
        """Number of real transition slots (padded T+1)."""
        return self.rewards.shape[1]


class ReplayBuffer:
    """FIFO episode store; capacity counts episodes."""

    def __init__(self, capacity: int = 250):
        self.capacity = capacity
        self._episodes: list[EpisodeRecord] = []

    def __len__(self) -> int:
        return len(self._episodes)

    def push(self, episode: EpisodeRecord) -> None:
        episode.validate()
        self._episodes.append(episode)
        if len(self._episodes) > self.capacity:
            del self._episodes[0]

    def episodes(self) -> list[EpisodeRecord]:
        return list(self._episodes)

    def sample(self, batch_size: int, rng: np.random.Generator) -> PaddedBatch:
        """Uniform sample; with replacement only while the buffer is still
        smaller than the batch."""
        if not self._episodes:
            raise UsageError("sample from an empty buffer")
        n = len(self._episodes)
        if n < batch_size:
            idx = rng.integers(0, n, size=batch_size)
        else:
            idx = rng.choice(n, size=batch_size, replace=False)
        return collate([self._episodes[i] for i in idx])

    def dump(self, path) -> None:
        from .diffcore import save_arrays

        arrays: dict[str, np.ndarray] = {}
        for i, ep in enumerate(self._episodes):
            key = f"ep{i:05d}"
            arrays[f"{key}.images"] = ep.images
            arrays[f"{key}.speeds"] = ep.speeds
            arrays[f"{key}.actions"] = ep.actions
            arrays[f"{key}.rewards"] = ep.rewards
            arrays[f"{key}.dones"] = ep.dones
        save_arrays(path, arrays)

    @classmethod
    def load(cls, path, capacity: int = 250) -> "ReplayBuffer":
        from .diffcore import load_arrays

        arrays = load_arrays(path)
        keys = sorted({name.split(".")[0] for name in arrays})
        buf = cls(capacity)
        for key in keys:
            buf.push(
                EpisodeRecord(
                    images=arrays[f"{key}.images"],
                    speeds=arrays[f"{key}.speeds"],
                    actions=arrays[f"{key}.actions"],
                    rewards=arrays[f"{key}.rewards"],
                    dones=arrays[f"{key}.dones"],
                )
            )
        return buf


def collate(episodes: list[EpisodeRecord]) -> PaddedBatch:
    b = len(episodes)
    t1 = max(ep.steps for ep in episodes)
    images = np.zeros((b, t1 + 1, IMAGE_SIZE, IMAGE_SIZE, 4))
    speeds = np.zeros((b, t1 + 1))
    actions = np.zeros((b, t1 + 1, 2))
    rewards = np.zeros((b, t1))
    dones = np.zeros((b, t1))
    masks = np.zeros((b, t1))
    lengths = np.zeros(b, dtype=np.int64)
    for i, ep in enumerate(episodes):
        n = ep.steps
        images[i, : n + 1] = ep.images
        speeds[i, : n + 1] = ep.speeds
        actions[i, : n + 1] = ep.actions
        rewards[i, :n] = ep.rewards
        dones[i, :n] = ep.dones
        masks[i, :n] = 1.0
        lengths[i] = n
    return PaddedBatch(images, speeds, actions, rewards, dones, masks, lengths)
