"""Layout parsing, validation errors, and the shipped assets."""

import numpy as np
import pytest

from mazerl import mazeworld as mw
from mazerl.mazeworld import MazeLoadError, load_asset, load_maze

MINIMAL = """mazeworld-v1
speed_limit 1.0
max_steps 30
heading N
exit 1 constant 1.0 correct
grid
###
1S#
###
"""


def test_minimal_maze_parses():
    maze = load_maze(MINIMAL, name="mini")
    assert sorted(maze.exits) == [1]
    assert maze.start_cell == (1, 1)
    assert maze.speed_limit == 1.0
    assert maze.max_steps == 30
    assert maze.heading == 90.0


def test_unknown_glyph_names_position():
    bad = MINIMAL.replace("1S#", "QS#")
    with pytest.raises(MazeLoadError, match=r"row 1, col 0"):
        load_maze(bad, name="mini")


def test_exit_without_rule_rejected():
    bad = MINIMAL.replace("exit 1 constant 1.0 correct\n", "")
    with pytest.raises(MazeLoadError, match="reward rule"):
        load_maze(bad, name="mini")


def test_rule_without_exit_rejected():
    bad = MINIMAL.replace("exit 1 constant 1.0 correct",
                          "exit 1 constant 1.0 correct\nexit 2 constant 0.5 incorrect")
    with pytest.raises(MazeLoadError, match="absent"):
        load_maze(bad, name="mini")


def test_missing_start_rejected():
    bad = MINIMAL.replace("1S#", "1.#")
    with pytest.raises(MazeLoadError, match="no start"):
        load_maze(bad, name="mini")


def test_unreachable_exit_rejected():
    text = """mazeworld-v1
speed_limit 1.0
max_steps 30
heading N
exit 1 constant 1.0 correct
exit 2 constant 0.0 incorrect
grid
#####
1S#.2
#####
"""
    with pytest.raises(MazeLoadError, match=r"exits \[2\] unreachable"):
        load_maze(text, name="mini")


def test_open_boundary_rejected():
    bad = MINIMAL.replace("1S#", "1S.")
    with pytest.raises(MazeLoadError, match="boundary"):
        load_maze(bad, name="mini")


def test_version_line_required():
    with pytest.raises(MazeLoadError, match="mazeworld-v1"):
        load_maze("not-a-version\n" + MINIMAL, name="mini")


def test_ragged_grid_rejected():
    bad = MINIMAL.replace("1S#\n", "1S##\n")
    with pytest.raises(MazeLoadError, match="width"):
        load_maze(bad, name="mini")


def test_trap_cells_are_wall_subset():
    for name in mw.ASSET_NAMES:
        maze = load_asset(name)
        for cell in maze.trap_cells:
            assert maze.walls[cell]


def test_biased_asset_contract():
    maze = load_asset("biased_t")
    assert sorted(maze.exits) == [1, 2]
    left, right = maze.exits[1], maze.exits[2]
    assert left.kind == "constant" and left.values == (1.0,) and not left.is_correct
    assert right.kind == "coin_flip" and right.values == (0.0, 10.0) and right.is_correct
    assert right.expected() == 5.0
    assert maze.speed_limit == 1.0
    assert maze.max_steps == 30
    assert len(maze.trap_cells) > 0


def test_expanding_assets_contract():
    for name, n_exits in (("t", 2), ("double_t", 4), ("triple_t", 8)):
        maze = load_asset(name)
        assert len(maze.exits) == n_exits
        assert maze.speed_limit == 2.0
        assert maze.max_steps == 30
        correct = [i for i, r in maze.exits.items() if r.is_correct]
        assert len(correct) == 1
        assert maze.exits[correct[0]].values == (10.0,)
        wrong = [r for i, r in maze.exits.items() if not r.is_correct]
        assert all(r.values == (-0.5,) for r in wrong)


def test_correct_exit_alternates_sides_through_curriculum():
    # t: right side, double_t: left side, triple_t: right side
    def correct_side(name):
        maze = load_asset(name)
        (cid,) = [i for i, r in maze.exits.items() if r.is_correct]
        cols = np.argwhere(maze.exit_ids == cid)[:, 1]
        return "right" if cols.mean() > maze.width / 2 else "left"

    assert correct_side("t") == "right"
    assert correct_side("double_t") == "left"
    assert correct_side("triple_t") == "right"


def test_without_traps_clears_trap_cells():
    maze = load_asset("biased_t")
    cleared = maze.without_traps()
    assert cleared.trap_cells == ()
    assert maze.trap_cells  # original untouched
