"""First-person 8x8x4 observation renderer.

Eight rays fan over a 90-degree horizontal field of view centered on the
agent's yaw (column 0 leftmost). Each ray stops at the first wall (base
gray, or the trap cell's current color) or escapes through an exit cell
(fixed glow color per exit id). All eight rows of a column share that
ray's color and its entry distance normalized by the maze diagonal; rays
that leave the grid entirely read as black at maximum distance.
"""

from __future__ import annotations

import numpy as np

from .maze import Maze

IMAGE_SIZE = 8
FOV_DEGREES = 90.0

# per-column angular offsets, leftmost first
_COLUMN_OFFSETS = (np.arange(IMAGE_SIZE)[::-1] + 0.5 - IMAGE_SIZE / 2) * (
    FOV_DEGREES / IMAGE_SIZE
)


def render(state) -> "Observation":
    from .sim import Observation  # avoid import cycle

    maze: Maze = state.maze
    colors, dists = _cast_fan(maze, state.color_grid, state.x, state.y, state.yaw)
    image = np.empty((IMAGE_SIZE, IMAGE_SIZE, 4))
    image[:, :, :3] = colors[None, :, :]
    image[:, :, 3] = dists[None, :]
    return Observation(image=image, speed=state.speed / maze.speed_limit)


def _cast_fan(maze: Maze, color_grid: np.ndarray, x: float, y: float, yaw: float):
    angles = np.radians(yaw + _COLUMN_OFFSETS)
    dirx = np.cos(angles)
    diry = -np.sin(angles)
    n = angles.size
    h, w = maze.walls.shape
    d_max = maze.diagonal

    cx = np.full(n, int(np.floor(x)))
    cy = np.full(n, int(np.floor(y)))
    step_x = np.sign(dirx).astype(np.int64)
    step_y = np.sign(diry).astype(np.int64)
    with np.errstate(divide="ignore"):
        inv_x = np.where(dirx != 0, 1.0 / dirx, np.inf)
        inv_y = np.where(diry != 0, 1.0 / diry, np.inf)
    t_max_x = np.where(
        step_x > 0, (cx + 1 - x) * inv_x, np.where(step_x < 0, (cx - x) * inv_x, np.inf)
    )
    t_max_y = np.where(
        step_y > 0, (cy + 1 - y) * inv_y, np.where(step_y < 0, (cy - y) * inv_y, np.inf)
    )
    t_dx = np.abs(inv_x)
    t_dy = np.abs(inv_y)

    colors = np.zeros((n, 3))
    dists = np.ones(n)
    # stops_grid: 0 free, 1 wall, 2 exit (by palette row in color_grid)
    active = np.ones(n, dtype=bool)
    for _ in range(2 * (h + w)):
        take_x = t_max_x < t_max_y
        t = np.where(take_x, t_max_x, t_max_y)
        cx = np.where(take_x, cx + step_x, cx)
        cy = np.where(take_x, cy, cy + step_y)
        t_max_x = np.where(take_x, t_max_x + t_dx, t_max_x)
        t_max_y = np.where(take_x, t_max_y, t_max_y + t_dy)

        inside = active & (cy >= 0) & (cy < h) & (cx >= 0) & (cx < w)
        cyc = np.where(inside, cy, 0)
        cxc = np.where(inside, cx, 0)
        stopped = inside & (maze.walls[cyc, cxc] | (maze.exit_ids[cyc, cxc] > 0))
        if stopped.any():
            colors[stopped] = color_grid[cyc[stopped], cxc[stopped]]
            dists[stopped] = np.minimum(t[stopped] / d_max, 1.0)
        active = inside & ~stopped
        if not active.any():
            break
    return colors, dists
