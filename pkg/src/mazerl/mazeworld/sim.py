"""Deterministic kinematic episode simulator.

Continuous pose over a unit grid: x runs along columns, y along rows
(downward), yaw in degrees with 0=east and 90=north, so the direction
vector is (cos yaw, -sin yaw). One action turns by up to 90 degrees and
translates along the new heading; the swept segment is walked cell by
cell, and the first wall or exit cell it enters decides the step's event.
Hitting a wall stops the motion there and costs -1 without ending the
episode; only exits and the 30-step cap terminate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .maze import DEFAULT_WALL_COLOR, Maze, RewardRule, exit_glow_color
from .render import render

STEP_DISCOUNT = 0.99


class SimUsageError(Exception):
    pass


@dataclass
class Event:
    kind: str  # "none" | "exit" | "collision" | "timeout"
    exit_id: int | None = None


@dataclass
class Observation:
    """8x8x4 image (r, g, b, distance channels in [0,1]) plus normalized speed."""

    image: np.ndarray
    speed: float


@dataclass
class SimState:
    maze: Maze
    x: float
    y: float
    yaw: float
    speed: float  # last commanded speed, meters per step
    step_count: int
    trap_colors: dict[tuple[int, int], np.ndarray]
    rng: np.random.Generator
    color_grid: np.ndarray = None  # (H, W, 3) color of every ray-stopping cell
    finished: bool = False
    last_event: Event = field(default_factory=lambda: Event("none"))


@dataclass
class StepResult:
    obs: Observation
    reward: float
    done: bool
    event: Event


def _base_color_grid(maze: Maze) -> np.ndarray:
    grid = np.zeros((maze.height, maze.width, 3))
    grid[maze.walls] = DEFAULT_WALL_COLOR
    for r, c in np.argwhere(maze.exit_ids > 0):
        grid[r, c] = exit_glow_color(int(maze.exit_ids[r, c]))
    return grid


def reset(maze: Maze, seed: int) -> tuple[SimState, Observation]:
    rng = np.random.default_rng(seed)
    state = SimState(
        maze=maze,
        x=maze.start_cell[1] + 0.5,
        y=maze.start_cell[0] + 0.5,
        yaw=maze.heading,
        speed=0.0,
        step_count=0,
        trap_colors={},
        rng=rng,
        color_grid=_base_color_grid(maze),
    )
    _randomize_traps(state)
    return state, render(state)


def _randomize_traps(state: SimState) -> None:
    for cell in state.maze.trap_cells:
        color = state.rng.uniform(0.0, 1.0, size=3)
        state.trap_colors[cell] = color
        state.color_grid[cell] = color


def _clamp_cmd(v: float, what: str) -> float:
    v = float(v)
    if not math.isfinite(v):
        raise SimUsageError(f"non-finite {what}")
    return min(1.0, max(-1.0, v))


def step(state: SimState, action) -> StepResult:
    """Apply (yaw_cmd, speed_cmd) in [-1, 1]^2 and advance one time step."""
    if state.finished:
        raise SimUsageError("step on a finished episode")
    yaw_cmd = _clamp_cmd(action[0], "yaw command")
    speed_cmd = _clamp_cmd(action[1], "speed command")

    state.yaw = (state.yaw + 90.0 * yaw_cmd) % 360.0
    state.speed = (speed_cmd + 1.0) / 2.0 * state.maze.speed_limit
    rad = math.radians(state.yaw)
    dx, dy = math.cos(rad), -math.sin(rad)
    state.step_count += 1

    hit = _sweep(state.maze, state.x, state.y, dx, dy, state.speed)
    reward = 0.0
    event = Event("none")
    if hit is not None:
        kind, cell, t = hit
        if kind == "wall":
            # bump: stop just short of the wall face, take the punishment,
            # play on (only exits and the step cap end an episode)
            t_stop = max(t - 1e-9, 0.0)
            state.x += dx * t_stop
            state.y += dy * t_stop
            reward = -1.0
            event = Event("collision")
        else:
            state.x += dx * min(t + 1e-9, state.speed)
            state.y += dy * min(t + 1e-9, state.speed)
            exit_id = int(state.maze.exit_ids[cell])
            rule: RewardRule = state.maze.exits[exit_id]
            reward = rule.sample(state.rng)
            if reward > 0.0:
                reward *= STEP_DISCOUNT**state.step_count
            event = Event("exit", exit_id)
            state.finished = True
    else:
        state.x += dx * state.speed
        state.y += dy * state.speed
    if not state.finished and state.step_count >= state.maze.max_steps:
        # cap reached without an exit; a same-step bump is already punished
        reward = -1.0
        event = Event("timeout")
        state.finished = True

    _randomize_traps(state)
    state.last_event = event
    return StepResult(render(state), reward, state.finished, event)


def _sweep(maze: Maze, x: float, y: float, dx: float, dy: float, length: float):
    """Walk the segment through grid cells; return the first wall or exit
    entered as (kind, (row, col), t) or None."""
    if length <= 0.0:
        return None
    cx, cy = int(math.floor(x)), int(math.floor(y))
    step_x = 1 if dx > 0 else (-1 if dx < 0 else 0)
    step_y = 1 if dy > 0 else (-1 if dy < 0 else 0)
    inf = math.inf
    t_max_x = ((cx + 1 - x) / dx if step_x > 0 else (cx - x) / dx) if step_x else inf
    t_max_y = ((cy + 1 - y) / dy if step_y > 0 else (cy - y) / dy) if step_y else inf
    t_dx = abs(1.0 / dx) if step_x else inf
    t_dy = abs(1.0 / dy) if step_y else inf
    walls = maze.walls
    exit_ids = maze.exit_ids
    h, w = walls.shape
    while True:
        if t_max_x < t_max_y:
            t = t_max_x
            cx += step_x
            t_max_x += t_dx
        else:
            t = t_max_y
            cy += step_y
            t_max_y += t_dy
        if t > length:
            return None
        if not (0 <= cy < h and 0 <= cx < w):
            return None
        if walls[cy, cx]:
            return "wall", (cy, cx), t
        if exit_ids[cy, cx]:
            return "exit", (cy, cx), t


def replay_positions(maze: Maze, seed: int, actions) -> list[tuple[float, float]]:
    """Re-simulate an action list and return the pose after each step,
    starting with the initial pose."""
    state, _ = reset(maze, seed)
    positions = [(state.x, state.y)]
    for action in actions:
        step(state, action)
        positions.append((state.x, state.y))
        if state.finished:
            break
    return positions
