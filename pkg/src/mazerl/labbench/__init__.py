from .experiment import (
    ExperimentSpec,
    load_spec,
    run_dir_name,
    run_single,
    run_sweep,
    save_spec,
)
from .stats import (
    InsufficientSeedsError,
    SweepResult,
    exit_proportions,
    exit_rate,
    load_sweep,
    run_phase_rate,
    trap_impact,
)
from .report import emit_report, episode_trajectory_svg, trajectory_svg
