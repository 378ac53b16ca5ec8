"""Diagonal-Gaussian utilities: reparameterized sampling, KL divergence,
tanh-squashed log densities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import (
    NumericError,
    Tensor,
    UsageError,
    add,
    div,
    log,
    mean_axis,
    mul,
    square,
    sub,
    sum_axis,
    tanh,
)

STD_FLOOR = 1e-6
_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass
class GaussianParams:
    """Elementwise mean/std pair; std must be strictly positive."""

    mean: Tensor
    std: Tensor

    def __post_init__(self):
        if self.mean.data.shape != self.std.data.shape:
            raise UsageError(
                f"gaussian mean shape {self.mean.data.shape} != std shape {self.std.data.shape}"
            )
        if self.std.data.min() <= 0.0:
            raise NumericError("gaussian std must be strictly positive")


def reparam_sample(dist: GaussianParams, noise: Tensor) -> Tensor:
    """mean + std * noise; gradient flows to mean and std, never the noise."""
    if noise.data.shape != dist.mean.data.shape:
        raise UsageError(
            f"noise shape {noise.data.shape} != distribution shape {dist.mean.data.shape}"
        )
    return add(dist.mean, mul(dist.std, noise.detach()))


def diag_gaussian_kl(q: GaussianParams, p: GaussianParams) -> Tensor:
    """KL(q || p), averaged over the trailing (latent) axis.

    One value per leading cell; always >= 0, zero iff q == p. The
    per-dimension mean keeps the value in a range where a [0, 1] clamp
    discriminates (familiar data near zero, genuinely novel data near or
    above one); training losses that need the full factorized divergence
    scale this by the latent width.
    """
    if q.mean.data.shape != p.mean.data.shape:
        raise UsageError("KL operands must be shape-matched")
    ratio = div(q.std, p.std)
    var_term = mul(square(ratio), 0.5)
    mean_term = div(square(sub(q.mean, p.mean)), mul(square(p.std), 2.0))
    per_elem = sub(add(add(mul(log(ratio), -1.0), var_term), mean_term), 0.5)
    return mean_axis(per_elem, axis=-1)


def tanh_gaussian_logprob(dist: GaussianParams, pre_squash: Tensor) -> Tensor:
    """log density of a = tanh(x) with x ~ N(mean, std^2), summed over the
    trailing (action) axis: log N(x) - log(1 - tanh(x)^2 + 1e-6)."""
    if pre_squash.data.shape != dist.mean.data.shape:
        raise UsageError("pre_squash must be shape-matched to the distribution")
    z = div(sub(pre_squash, dist.mean), dist.std)
    log_n = sub(mul(square(z), -0.5), add(log(dist.std), _LOG_SQRT_2PI))
    a = tanh(pre_squash)
    corr = log(add(sub(Tensor(np.ones(())), square(a)), 1e-6))
    return sum_axis(sub(log_n, corr), axis=-1)


# plain-array twins for detached paths (curiosity values, targets)


def kl_np(mu_q, sd_q, mu_p, sd_p) -> np.ndarray:
    ratio = sd_q / sd_p
    per = -np.log(ratio) + 0.5 * ratio * ratio + (mu_q - mu_p) ** 2 / (2.0 * sd_p * sd_p) - 0.5
    return per.mean(axis=-1)


def tanh_gaussian_logprob_np(mu, sd, pre_squash) -> np.ndarray:
    z = (pre_squash - mu) / sd
    log_n = -0.5 * z * z - np.log(sd) - _LOG_SQRT_2PI
    a = np.tanh(pre_squash)
    corr = np.log(1.0 - a * a + 1e-6)
    return (log_n - corr).sum(axis=-1)
