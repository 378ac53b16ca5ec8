from .maze import (
    ASSET_NAMES,
    DEFAULT_WALL_COLOR,
    EXIT_GLOW_PALETTE,
    FORMAT_VERSION,
    Maze,
    MazeLoadError,
    RewardRule,
    exit_glow_color,
    load_asset,
    load_maze,
)
from .render import FOV_DEGREES, IMAGE_SIZE, render
from .sim import (
    STEP_DISCOUNT,
    Event,
    Observation,
    SimState,
    SimUsageError,
    StepResult,
    replay_positions,
    reset,
    step,
)
