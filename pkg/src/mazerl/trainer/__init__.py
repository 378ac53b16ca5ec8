from .config import AGENT_LABELS, AGENT_TABLE, AgentConfig, config_for
from .loop import (
    Agent,
    EpisodeInfo,
    EpochReport,
    collect_episode,
    compute_targets,
    train_epoch,
)
