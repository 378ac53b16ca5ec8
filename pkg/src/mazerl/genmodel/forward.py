"""Variational recurrent forward model.

Per step: a prior over the 32-d inner state comes from (h_prev, a_prev),
a posterior additionally conditions on o_t, the inner state is sampled
from the posterior by reparameterization, and a GRU advances the 32-d
hidden state from (h_prev, z). Decoders predict the next observation
from the hidden state and the encoded current action.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diffcore import (
    GaussianParams,
    ParamSet,
    STD_FLOOR,
    Tensor,
    add,
    avg_pool3x3_s2,
    concat,
    mul,
    reparam_sample,
    reshape,
    softplus,
    square,
    sub,
    sum_axis,
    tanh,
    upsample_bilinear2x,
)
from .layers import Conv1x1, Conv3x3PReLU, GRUCell, Linear, LinearPReLU

HIDDEN_DIM = 32
LATENT_DIM = 32
OBS_ENC_DIM = 64
ACTION_DIM = 2
OBS_SCALARS = 8 * 8 * 4 + 1  # image plus speed


@dataclass
class ForwardState:
    """One step of the model: hidden state, inner-state distributions and
    the sampled inner state."""

    h: Tensor
    prior: GaussianParams
    posterior: GaussianParams
    z: Tensor


class GaussianHead:
    """linear -> PReLU -> linear -> (tanh mean | softplus std)."""

    def __init__(self, ps, name, rng, din):
        self.mu_l1 = LinearPReLU(ps, f"{name}.mu_l1", rng, din, 32)
        self.mu_l2 = Linear(ps, f"{name}.mu_l2", rng, 32, LATENT_DIM)
        self.sd_l1 = LinearPReLU(ps, f"{name}.sd_l1", rng, din, 32)
        self.sd_l2 = Linear(ps, f"{name}.sd_l2", rng, 32, LATENT_DIM)

    def __call__(self, x: Tensor) -> GaussianParams:
        mean = tanh(self.mu_l2(self.mu_l1(x)))
        std = add(softplus(self.sd_l2(self.sd_l1(x))), STD_FLOOR)
        return GaussianParams(mean, std)


class ImageEncoder:
    """conv 4->16, pool 8->4, conv 16->16, pool 4->2, flatten, linear 64->32."""

    def __init__(self, ps, name, rng):
        self.c1 = Conv3x3PReLU(ps, f"{name}.c1", rng, 4, 16)
        self.c2 = Conv3x3PReLU(ps, f"{name}.c2", rng, 16, 16)
        self.fc = LinearPReLU(ps, f"{name}.fc", rng, 64, 32)

    def __call__(self, x: Tensor) -> Tensor:
        h = avg_pool3x3_s2(self.c1(x))
        h = avg_pool3x3_s2(self.c2(h))
        h = reshape(h, (h.shape[0], 64))  # (N,2,2,16) -> 64 features
        return self.fc(h)


class ImageDecoder:
    """linear 64->16, reshape to 2x2x4, conv/upsample back to 8x8x4."""

    def __init__(self, ps, name, rng):
        self.fc = LinearPReLU(ps, f"{name}.fc", rng, 64, 16)
        self.c1 = Conv3x3PReLU(ps, f"{name}.c1", rng, 4, 16)
        self.c2 = Conv3x3PReLU(ps, f"{name}.c2", rng, 16, 16)
        self.c3 = Conv3x3PReLU(ps, f"{name}.c3", rng, 16, 16)
        self.out = Conv1x1(ps, f"{name}.out", rng, 16, 4)

    def __call__(self, x: Tensor) -> Tensor:
        h = reshape(self.fc(x), (x.shape[0], 2, 2, 4))
        h = upsample_bilinear2x(self.c1(h))
        h = upsample_bilinear2x(self.c2(h))
        return self.out(self.c3(h))


class ForwardModel:
    def __init__(self, rng: np.random.Generator):
        ps = ParamSet()
        self.params = ps
        self.image_in = ImageEncoder(ps, "image_in", rng)
        self.speed_in = LinearPReLU(ps, "speed_in.fc", rng, 1, 32)
        self.action_in = LinearPReLU(ps, "action_in.fc", rng, ACTION_DIM, 32)
        self.prior_head = GaussianHead(ps, "prior", rng, 64)
        self.posterior_head = GaussianHead(ps, "posterior", rng, 128)
        self.gru = GRUCell(ps, "gru", rng, LATENT_DIM, HIDDEN_DIM)
        self.image_out = ImageDecoder(ps, "image_out", rng)
        self.speed_out_l1 = LinearPReLU(ps, "speed_out.l1", rng, 64, 32)
        self.speed_out_l2 = LinearPReLU(ps, "speed_out.l2", rng, 32, 32)
        self.speed_out_l3 = Linear(ps, "speed_out.l3", rng, 32, 1)

    def encode_obs(self, images: Tensor, speeds: Tensor) -> Tensor:
        """(N,8,8,4) images and (N,1) speeds -> (N,64) encoding."""
        img = self.image_in(images)
        spd = self.speed_in(speeds)
        return concat([img, spd], axis=1)

    def encode_action(self, actions: Tensor) -> Tensor:
        return self.action_in(actions)

    def prior(self, h_prev: Tensor, a_enc: Tensor) -> GaussianParams:
        return self.prior_head(concat([h_prev, a_enc], axis=1))

    def posterior(self, h_prev: Tensor, a_enc: Tensor, o_enc: Tensor) -> GaussianParams:
        return self.posterior_head(concat([h_prev, a_enc, o_enc], axis=1))

    def advance(self, h_prev: Tensor, z: Tensor) -> Tensor:
        return self.gru(z, h_prev)

    def decode(self, h: Tensor, a_enc: Tensor) -> tuple[Tensor, Tensor]:
        """Predict the next observation: (N,8,8,4) image and (N,1) speed."""
        x = concat([h, a_enc], axis=1)
        img = self.image_out(x)
        spd = self.speed_out_l2(self.speed_out_l1(x))
        return img, self.speed_out_l3(spd)

    def zero_hidden(self, batch: int) -> Tensor:
        return Tensor(np.zeros((batch, HIDDEN_DIM)))

    def observe(self, h_prev: Tensor, a_prev: Tensor, images: Tensor, speeds: Tensor, noise: Tensor) -> ForwardState:
        """One filtering step: prior from (h, a), posterior also from o,
        sample z from the posterior, advance the hidden state."""
        a_enc = self.encode_action(a_prev)
        o_enc = self.encode_obs(images, speeds)
        prior = self.prior(h_prev, a_enc)
        posterior = self.posterior(h_prev, a_enc, o_enc)
        z = reparam_sample(posterior, noise)
        h = self.advance(h_prev, z)
        return ForwardState(h=h, prior=prior, posterior=posterior, z=z)

    def predict(self, h: Tensor, a_raw: Tensor) -> tuple[Tensor, Tensor]:
        """Deterministic next-observation prediction from a hidden state and
        a raw action."""
        return self.decode(h, self.encode_action(a_raw))


def accuracy_nll(pred_img: Tensor, pred_spd: Tensor, img: Tensor, spd: Tensor) -> Tensor:
    """Unit-variance Gaussian negative log likelihood up to its constant:
    half the summed squared error over all 257 observation scalars, one
    value per row."""
    img_err = square(sub(pred_img, img))
    spd_err = square(sub(pred_spd, spd))
    n = img.shape[0]
    flat = reshape(img_err, (n, 256))
    total = add(sum_axis(flat, axis=-1), sum_axis(spd_err, axis=-1))
    return mul(total, 0.5)
