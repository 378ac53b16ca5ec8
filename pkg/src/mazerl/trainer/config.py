"""Agent configurations: the six labeled rows plus shared hyperparameters."""

from __future__ import annotations

from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class AgentConfig:
    label: str
    alpha_mode: str  # "fixed" | "dynamic"
    eta: float
    curiosity: str  # "none" | "prediction" | "hidden"
    alpha_fixed: float = 0.0
    target_entropy: float = -1.0
    gamma: float = 0.9
    tau: float = 0.1
    actor_delay: int = 2
    beta: float = 0.03
    lr: float = 0.01
    batch_size: int = 32
    capacity: int = 250
    checkpoint_every: int = 0  # 0 = final checkpoint only

    def __post_init__(self):
        if self.alpha_mode not in ("fixed", "dynamic"):
            raise ValueError(f"bad alpha_mode {self.alpha_mode!r}")
        if self.curiosity not in ("none", "prediction", "hidden"):
            raise ValueError(f"bad curiosity kind {self.curiosity!r}")

    def with_overrides(self, **kwargs) -> "AgentConfig":
        return replace(self, **kwargs)


AGENT_LABELS = ("N", "E", "P", "EP", "H", "EH")

AGENT_TABLE: dict[str, AgentConfig] = {
    "N": AgentConfig("N", "fixed", eta=0.0, curiosity="none"),
    "E": AgentConfig("E", "dynamic", eta=0.0, curiosity="none"),
    "P": AgentConfig("P", "fixed", eta=1.0, curiosity="prediction"),
    "EP": AgentConfig("EP", "dynamic", eta=1.0, curiosity="prediction"),
    "H": AgentConfig("H", "fixed", eta=1.0, curiosity="hidden"),
    "EH": AgentConfig("EH", "dynamic", eta=1.0, curiosity="hidden"),
}


def config_for(label: str, **overrides) -> AgentConfig:
    if label not in AGENT_TABLE:
        raise KeyError(f"unknown agent label {label!r}, have {AGENT_LABELS}")
    cfg = AGENT_TABLE[label]
    return cfg.with_overrides(**overrides) if overrides else cfg
