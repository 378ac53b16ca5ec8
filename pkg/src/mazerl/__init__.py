"""Desk-scale laboratory for intrinsic-reward maze agents: a variational
recurrent world model with soft actor-critic control, compared across
entropy and curiosity reward regimes on first-person T-maze navigation."""

__version__ = "0.1.0"
