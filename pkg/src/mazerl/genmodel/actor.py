"""Tanh-Gaussian policy fed the forward model's hidden state."""

from __future__ import annotations

import numpy as np

from ..diffcore import (
    GaussianParams,
    ParamSet,
    STD_FLOOR,
    Tensor,
    add,
    reparam_sample,
    softplus,
    tanh,
    tanh_gaussian_logprob,
)
from .forward import ACTION_DIM, HIDDEN_DIM
from .layers import Linear, LinearPReLU


class Actor:
    """Four linear+PReLU blocks on h, then mean and softplus-std heads;
    actions are tanh-squashed reparameterized samples."""

    def __init__(self, rng: np.random.Generator):
        ps = ParamSet()
        self.params = ps
        self.blocks = [
            LinearPReLU(ps, f"trunk{i}.fc", rng, HIDDEN_DIM, HIDDEN_DIM) for i in range(4)
        ]
        self.mu = Linear(ps, "mu", rng, HIDDEN_DIM, ACTION_DIM)
        self.sigma = Linear(ps, "sigma", rng, HIDDEN_DIM, ACTION_DIM)

    def distribution(self, h: Tensor) -> GaussianParams:
        x = h
        for block in self.blocks:
            x = block(x)
        mean = self.mu(x)
        std = add(softplus(self.sigma(x)), STD_FLOOR)
        return GaussianParams(mean, std)

    def act(self, h: Tensor, noise: Tensor) -> tuple[Tensor, Tensor]:
        """Sample a = tanh(mu + sigma * noise); returns (action, log prob)."""
        dist = self.distribution(h)
        pre = reparam_sample(dist, noise)
        action = tanh(pre)
        logprob = tanh_gaussian_logprob(dist, pre)
        return action, logprob
