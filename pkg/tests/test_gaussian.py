"""Gaussian utility math: reparameterization, KL, squashed log densities."""

import numpy as np
import pytest

from mazerl import diffcore as dc
from mazerl.diffcore import (
    GaussianParams,
    diag_gaussian_kl,
    reparam_sample,
    tanh_gaussian_logprob,
)


def gp(mean, std):
    return GaussianParams(dc.Tensor(np.asarray(mean, dtype=float)),
                          dc.Tensor(np.asarray(std, dtype=float)))


def test_reparam_zero_noise_returns_mean():
    d = gp([[0.4, -0.2]], [[1.0, 2.0]])
    out = reparam_sample(d, dc.Tensor(np.zeros((1, 2))))
    assert np.array_equal(out.data, d.mean.data)


def test_reparam_unit_distribution_returns_noise():
    eps = np.array([[0.3, -1.2]])
    d = gp([[0.0, 0.0]], [[1.0, 1.0]])
    out = reparam_sample(d, dc.Tensor(eps))
    assert np.allclose(out.data, eps)


def test_reparam_hand_value():
    d = gp([[1.0]], [[2.0]])
    out = reparam_sample(d, dc.Tensor([[0.5]]))
    assert np.allclose(out.data, [[2.0]])


def test_reparam_shape_mismatch():
    d = gp([[0.0, 0.0]], [[1.0, 1.0]])
    with pytest.raises(dc.UsageError):
        reparam_sample(d, dc.Tensor(np.zeros((1, 3))))


def test_reparam_gradient_flows_to_params_not_noise():
    mean = dc.Tensor([[1.0, 2.0]], requires_grad=True)
    std = dc.Tensor([[1.0, 1.5]], requires_grad=True)
    noise = dc.Tensor([[0.5, -0.5]], requires_grad=True)
    out = reparam_sample(GaussianParams(mean, std), noise)
    dc.backward(dc.tsum(out))
    assert mean.grad is not None and std.grad is not None
    assert noise.grad is None


def test_gaussian_params_requires_positive_std():
    with pytest.raises(dc.NumericError):
        gp([[0.0]], [[0.0]])


def test_kl_identical_is_zero():
    q = gp([[0.3, -1.0]], [[0.5, 2.0]])
    p = gp([[0.3, -1.0]], [[0.5, 2.0]])
    assert np.allclose(diag_gaussian_kl(q, p).data, 0.0, atol=1e-15)


def test_kl_shifted_mean_unit_std():
    # KL(N(1,1) || N(0,1)) = 0.5
    out = diag_gaussian_kl(gp([[1.0]], [[1.0]]), gp([[0.0]], [[1.0]]))
    assert np.allclose(out.data, 0.5, atol=1e-12)


def test_kl_widened_std():
    # KL(N(0,2) || N(0,1)) = log(1/2) + 4/2 - 1/2
    out = diag_gaussian_kl(gp([[0.0]], [[2.0]]), gp([[0.0]], [[1.0]]))
    expected = np.log(0.5) + 2.0 - 0.5
    assert np.allclose(out.data, expected, atol=1e-12)


def test_kl_matches_closed_form_and_is_nonnegative(rng):
    for _ in range(200):
        mu_q = rng.standard_normal((2, 5))
        sd_q = np.abs(rng.standard_normal((2, 5))) + 0.05
        mu_p = rng.standard_normal((2, 5))
        sd_p = np.abs(rng.standard_normal((2, 5))) + 0.05
        out = diag_gaussian_kl(gp(mu_q, sd_q), gp(mu_p, sd_p)).data
        closed = (
            np.log(sd_p / sd_q) + (sd_q**2 + (mu_q - mu_p) ** 2) / (2 * sd_p**2) - 0.5
        ).mean(axis=-1)
        assert np.allclose(out, closed, atol=1e-12)
        assert (out >= -1e-15).all()


def test_kl_reduces_mean_over_latent_axis():
    q = gp([[1.0, 0.0]], [[1.0, 1.0]])
    p = gp([[0.0, 0.0]], [[1.0, 1.0]])
    # per-dim divergences are 0.5 and 0; the cell value is their mean
    assert np.allclose(diag_gaussian_kl(q, p).data, [0.25])


def test_logprob_standard_normal_at_zero():
    d = gp([[0.0]], [[1.0]])
    out = tanh_gaussian_logprob(d, dc.Tensor([[0.0]]))
    expected = -0.5 * np.log(2 * np.pi) - np.log(1.0 + 1e-6)
    assert np.allclose(out.data, expected, atol=1e-12)


def test_logprob_correction_negligible_at_zero():
    d = gp([[0.0]], [[1.0]])
    base = -0.5 * np.log(2 * np.pi)
    out = tanh_gaussian_logprob(d, dc.Tensor([[0.0]]))
    assert abs(float(out.data) - base) < 2e-6


def test_logprob_correction_grows_with_pre_squash_magnitude():
    d = gp([[0.0]], [[1.0]])
    xs = [0.5, 1.0, 2.0, 3.0, 5.0]
    corrections = []
    for x in xs:
        lp = float(tanh_gaussian_logprob(d, dc.Tensor([[x]])).data)
        log_n = -0.5 * x * x - 0.5 * np.log(2 * np.pi)
        corrections.append(log_n - lp)  # = log(1 - tanh^2 + 1e-6)
    diffs = np.diff(corrections)
    assert (diffs < 0).all()  # correction term gets more negative, |corr| grows
    # asymptotics: -log(1 - tanh(x)^2 + 1e-6) ~ 2|x| - log(4), up to the epsilon
    big = -corrections[-1]
    assert abs(big - (2 * 5.0 - np.log(4.0))) < 1e-2


def test_logprob_sums_over_action_axis():
    d = gp([[0.0, 0.0]], [[1.0, 1.0]])
    out = tanh_gaussian_logprob(d, dc.Tensor([[0.0, 0.0]]))
    single = tanh_gaussian_logprob(
        gp([[0.0]], [[1.0]]), dc.Tensor([[0.0]])
    )
    assert np.allclose(out.data, 2 * single.data)
    assert out.data.shape == (1,)
