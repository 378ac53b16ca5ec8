"""Recurrent state-action value models with frozen target copies.

A critic encodes the observation image, speed and action (32 each),
advances its own 32-d GRU state on the 96-d concatenation, and reads a
scalar Q from the hidden state.
"""

from __future__ import annotations

import numpy as np

from ..diffcore import ParamSet, Tensor, concat
from .forward import ACTION_DIM, HIDDEN_DIM, ImageEncoder
from .layers import GRUCell, Linear, LinearPReLU


class Critic:
    def __init__(self, rng: np.random.Generator, trainable: bool = True):
        ps = ParamSet()
        self.params = ps
        self.image_in = ImageEncoder(ps, "image_in", rng)
        self.speed_in = LinearPReLU(ps, "speed_in.fc", rng, 1, 32)
        self.action_in = LinearPReLU(ps, "action_in.fc", rng, ACTION_DIM, 32)
        self.gru = GRUCell(ps, "gru", rng, 96, HIDDEN_DIM)
        self.q_l1 = LinearPReLU(ps, "q.l1", rng, HIDDEN_DIM, 32)
        self.q_l2 = Linear(ps, "q.l2", rng, 32, 1)
        if not trainable:
            self.freeze()

    def freeze(self) -> None:
        for t in self.params.tensors():
            t.requires_grad = False

    def encode_obs(self, images: Tensor, speeds: Tensor) -> Tensor:
        """(N,8,8,4) and (N,1) -> (N,64) image+speed encoding."""
        img = self.image_in(images)
        spd = self.speed_in(speeds)
        return concat([img, spd], axis=1)

    def encode_action(self, actions: Tensor) -> Tensor:
        return self.action_in(actions)

    def advance(self, o_enc: Tensor, a_enc: Tensor, h_prev: Tensor) -> Tensor:
        return self.gru(concat([o_enc, a_enc], axis=1), h_prev)

    def q_value(self, h: Tensor) -> Tensor:
        return self.q_l2(self.q_l1(h))

    def zero_hidden(self, batch: int) -> Tensor:
        return Tensor(np.zeros((batch, HIDDEN_DIM)))

    def eval_step(self, images: Tensor, speeds: Tensor, actions: Tensor, h_prev: Tensor) -> tuple[Tensor, Tensor]:
        """One recurrent evaluation: Q for this (o, a) and the next hidden
        state."""
        h = self.advance(self.encode_obs(images, speeds), self.encode_action(actions), h_prev)
        return self.q_value(h), h


def make_target(critic: Critic, rng: np.random.Generator) -> Critic:
    """Frozen copy with identical parameter values."""
    target = Critic(rng, trainable=False)
    target.params.copy_values_from(critic.params)
    return target


def polyak_update(target: Critic, critic: Critic, tau: float) -> None:
    target.params.polyak_from(critic.params, tau)
