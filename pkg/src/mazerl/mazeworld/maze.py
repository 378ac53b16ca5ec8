"""Maze descriptions and the versioned text layout format.

A layout document looks like::

    mazeworld-v1
    speed_limit 1.0
    max_steps 30
    heading N
    exit 1 constant 1.0 incorrect
    exit 2 coinflip 0.0 10.0 correct
    grid
    #?#########
    1.......#.2
    #?S####...#
    ###########

Grid glyphs: ``#`` wall, ``.`` floor, ``S`` start, digits exit ids, ``?``
trap wall (recolored every step while traps are enabled).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

FORMAT_VERSION = "mazeworld-v1"
ASSET_NAMES = ("biased_t", "t", "double_t", "triple_t")

DEFAULT_WALL_COLOR = (0.5, 0.5, 0.5)

# one fixed glow color per exit id, cycled
EXIT_GLOW_PALETTE = (
    (1.0, 0.85, 0.1),
    (0.1, 0.9, 1.0),
    (1.0, 0.3, 0.9),
    (0.2, 1.0, 0.4),
    (1.0, 0.5, 0.1),
    (0.4, 0.3, 1.0),
    (0.9, 1.0, 0.2),
    (0.6, 1.0, 0.9),
)

HEADING_DEGREES = {"E": 0.0, "N": 90.0, "W": 180.0, "S": 270.0}


class MazeLoadError(Exception):
    pass


def exit_glow_color(exit_id: int) -> tuple[float, float, float]:
    return EXIT_GLOW_PALETTE[(exit_id - 1) % len(EXIT_GLOW_PALETTE)]


@dataclass(frozen=True)
class RewardRule:
    """Terminal reward attached to one exit."""

    kind: str  # "constant" | "coin_flip"
    values: tuple[float, ...]
    is_correct: bool

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == "constant":
            return self.values[0]
        return self.values[int(rng.integers(2))]

    def expected(self) -> float:
        return float(np.mean(self.values))


@dataclass(frozen=True)
class Maze:
    """Immutable maze description: geometry, rules, limits."""

    name: str
    walls: np.ndarray  # bool (H, W), True where wall (traps included)
    exit_ids: np.ndarray  # int16 (H, W), 0 where no exit
    trap_cells: tuple[tuple[int, int], ...]  # sorted (row, col) wall cells
    start_cell: tuple[int, int]
    heading: float  # degrees, 0=E 90=N
    exits: dict[int, RewardRule] = field(repr=False)
    speed_limit: float = 1.0
    max_steps: int = 30

    @property
    def height(self) -> int:
        return self.walls.shape[0]

    @property
    def width(self) -> int:
        return self.walls.shape[1]

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.height, self.width))

    def without_traps(self) -> "Maze":
        return replace(self, trap_cells=())


def load_maze(text: str, name: str = "maze") -> Maze:
    lines = text.splitlines()
    if not lines or lines[0].strip() != FORMAT_VERSION:
        raise MazeLoadError(f"{name}: first line must be {FORMAT_VERSION!r}")

    speed_limit = None
    max_steps = None
    heading = None
    exits: dict[int, RewardRule] = {}
    grid_rows: list[str] = []
    in_grid = False
    for lineno, raw in enumerate(lines[1:], start=2):
        if in_grid:
            if raw.strip():
                grid_rows.append(raw.rstrip("\n"))
            continue
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0]
        if key == "grid":
            in_grid = True
        elif key == "speed_limit":
            speed_limit = float(parts[1])
        elif key == "max_steps":
            max_steps = int(parts[1])
        elif key == "heading":
            if parts[1] not in HEADING_DEGREES:
                raise MazeLoadError(f"{name}:{lineno}: heading must be one of N/E/S/W")
            heading = HEADING_DEGREES[parts[1]]
        elif key == "exit":
            exits[int(parts[1])] = _parse_rule(parts[2:], name, lineno)
        else:
            raise MazeLoadError(f"{name}:{lineno}: unknown header key {key!r}")

    if speed_limit is None or speed_limit <= 0:
        raise MazeLoadError(f"{name}: missing or invalid speed_limit")
    if max_steps is None or max_steps <= 0:
        raise MazeLoadError(f"{name}: missing or invalid max_steps")
    if heading is None:
        raise MazeLoadError(f"{name}: missing heading")
    if not grid_rows:
        raise MazeLoadError(f"{name}: missing grid")

    width = len(grid_rows[0])
    if any(len(r) != width for r in grid_rows):
        raise MazeLoadError(f"{name}: grid rows must all have width {width}")
    height = len(grid_rows)

    walls = np.zeros((height, width), dtype=bool)
    exit_ids = np.zeros((height, width), dtype=np.int16)
    traps: list[tuple[int, int]] = []
    start = None
    seen_exit_ids: set[int] = set()
    for r, row in enumerate(grid_rows):
        for c, ch in enumerate(row):
            if ch == "#":
                walls[r, c] = True
            elif ch == "?":
                walls[r, c] = True
                traps.append((r, c))
            elif ch == ".":
                pass
            elif ch == "S":
                if start is not None:
                    raise MazeLoadError(f"{name}: multiple start cells (row {r}, col {c})")
                start = (r, c)
            elif ch.isdigit() and ch != "0":
                exit_id = int(ch)
                exit_ids[r, c] = exit_id
                seen_exit_ids.add(exit_id)
                if exit_id not in exits:
                    raise MazeLoadError(
                        f"{name}: exit {exit_id} (row {r}, col {c}) has no reward rule"
                    )
            else:
                raise MazeLoadError(f"{name}: unknown glyph {ch!r} at row {r}, col {c}")

    if start is None:
        raise MazeLoadError(f"{name}: no start cell")
    unused = sorted(set(exits) - seen_exit_ids)
    if unused:
        raise MazeLoadError(f"{name}: reward rules for absent exits {unused}")

    # the playable area must be enclosed: boundary cells are walls or exits
    edge = np.zeros((height, width), dtype=bool)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
    open_edge = edge & ~walls & (exit_ids == 0)
    if open_edge.any():
        r, c = np.argwhere(open_edge)[0]
        raise MazeLoadError(f"{name}: boundary is open at row {r}, col {c}")

    _check_reachable(name, walls, exit_ids, start, seen_exit_ids)

    return Maze(
        name=name,
        walls=walls,
        exit_ids=exit_ids,
        trap_cells=tuple(sorted(traps)),
        start_cell=start,
        heading=heading,
        exits=exits,
        speed_limit=speed_limit,
        max_steps=max_steps,
    )


def _parse_rule(parts: list[str], name: str, lineno: int) -> RewardRule:
    try:
        kind = parts[0]
        if kind == "constant":
            values = (float(parts[1]),)
            flag = parts[2]
        elif kind == "coinflip":
            values = (float(parts[1]), float(parts[2]))
            flag = parts[3]
        else:
            raise MazeLoadError(f"{name}:{lineno}: unknown reward kind {kind!r}")
        if flag not in ("correct", "incorrect"):
            raise MazeLoadError(f"{name}:{lineno}: expected correct/incorrect, got {flag!r}")
    except (IndexError, ValueError) as exc:
        raise MazeLoadError(f"{name}:{lineno}: malformed exit rule") from exc
    return RewardRule("coin_flip" if kind == "coinflip" else "constant", values, flag == "correct")


def _check_reachable(name, walls, exit_ids, start, ids) -> None:
    height, width = walls.shape
    seen = np.zeros_like(walls)
    queue = deque([start])
    seen[start] = True
    reached: set[int] = set()
    while queue:
        r, c = queue.popleft()
        if exit_ids[r, c]:
            reached.add(int(exit_ids[r, c]))
            continue  # exits end the walk
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nr, nc = r + dr, c + dc
            if 0 <= nr < height and 0 <= nc < width and not seen[nr, nc] and not walls[nr, nc]:
                seen[nr, nc] = True
                queue.append((nr, nc))
    missing = sorted(ids - reached)
    if missing:
        raise MazeLoadError(f"{name}: exits {missing} unreachable from start")


def load_asset(asset_name: str) -> Maze:
    """Load one of the shipped layouts by name."""
    if asset_name not in ASSET_NAMES:
        raise MazeLoadError(f"unknown maze asset {asset_name!r}, have {ASSET_NAMES}")
    text = (
        resources.files("mazerl.mazeworld")
        .joinpath("assets", f"{asset_name}.maze")
        .read_text(encoding="utf-8")
    )
    return load_maze(text, name=asset_name)
