"""Model architectures: parameter counts, shape flow, filtering step,
policy sampling, critics and target copies."""

import numpy as np
import pytest

from mazerl import diffcore as dc
from mazerl import genmodel as gm

# counts derived once from the layer tables and pinned
FORWARD_PARAM_COUNT = 37652
ACTOR_PARAM_COUNT = 4360
CRITIC_PARAM_COUNT = 18727


@pytest.fixture(scope="module")
def fm():
    return gm.ForwardModel(np.random.default_rng(11))


@pytest.fixture(scope="module")
def actor():
    return gm.Actor(np.random.default_rng(12))


def obs_batch(rng, n=3):
    return (
        dc.Tensor(rng.uniform(size=(n, 8, 8, 4))),
        dc.Tensor(rng.uniform(size=(n, 1))),
    )


def test_parameter_counts_pinned(fm, actor):
    assert fm.params.num_values() == FORWARD_PARAM_COUNT
    assert actor.params.num_values() == ACTOR_PARAM_COUNT
    critic = gm.Critic(np.random.default_rng(13))
    assert critic.params.num_values() == CRITIC_PARAM_COUNT


def test_forward_encode_shapes(fm, rng):
    imgs, spds = obs_batch(rng)
    enc = fm.encode_obs(imgs, spds)
    assert enc.data.shape == (3, 64)
    a_enc = fm.encode_action(dc.Tensor(rng.uniform(-1, 1, (3, 2))))
    assert a_enc.data.shape == (3, 32)


def test_observe_zero_noise_returns_posterior_mean(fm, rng):
    imgs, spds = obs_batch(rng)
    fs = fm.observe(
        fm.zero_hidden(3),
        dc.Tensor(np.zeros((3, 2))),
        imgs,
        spds,
        dc.Tensor(np.zeros((3, 32))),
    )
    assert np.array_equal(fs.z.data, fs.posterior.mean.data)
    assert fs.h.data.shape == (3, 32)


def test_observe_deterministic_given_noise(fm, rng):
    imgs, spds = obs_batch(rng)
    noise = dc.Tensor(rng.standard_normal((3, 32)))
    a = dc.Tensor(rng.uniform(-1, 1, (3, 2)))
    fs1 = fm.observe(fm.zero_hidden(3), a, imgs, spds, noise)
    fs2 = fm.observe(fm.zero_hidden(3), a, imgs, spds, noise)
    assert np.array_equal(fs1.h.data, fs2.h.data)
    assert np.array_equal(fs1.z.data, fs2.z.data)


def test_untrained_posterior_diverges_from_prior(fm, rng):
    imgs, spds = obs_batch(rng)
    fs = fm.observe(
        fm.zero_hidden(3), dc.Tensor(np.zeros((3, 2))), imgs, spds,
        dc.Tensor(np.zeros((3, 32))),
    )
    kl = dc.kl_np(
        fs.posterior.mean.data, fs.posterior.std.data,
        fs.prior.mean.data, fs.prior.std.data,
    )
    assert (kl > 0).all()


def test_predict_shapes_and_determinism(fm, rng):
    h = dc.Tensor(rng.standard_normal((3, 32)))
    a = dc.Tensor(rng.uniform(-1, 1, (3, 2)))
    img1, spd1 = fm.predict(h, a)
    img2, spd2 = fm.predict(h, a)
    assert img1.data.shape == (3, 8, 8, 4)
    assert spd1.data.shape == (3, 1)
    assert np.array_equal(img1.data, img2.data)
    assert np.array_equal(spd1.data, spd2.data)


def test_actor_zero_noise_is_tanh_mu(actor, rng):
    h = dc.Tensor(rng.standard_normal((4, 32)))
    action, _ = actor.act(h, dc.Tensor(np.zeros((4, 2))))
    dist = actor.distribution(h)
    assert np.allclose(action.data, np.tanh(dist.mean.data))


def test_actor_actions_strictly_inside_unit_box(actor, rng):
    h = dc.Tensor(rng.standard_normal((64, 32)))
    action, _ = actor.act(h, dc.Tensor(rng.standard_normal((64, 2)) * 3))
    assert np.abs(action.data).max() < 1.0


def test_actor_entropy_matches_quadrature_oracle(actor, rng):
    # one fixed hidden state; compare the Monte-Carlo mean of -logprob
    # against numerical integration of the squashed-Gaussian entropy
    h = dc.Tensor(rng.standard_normal((1, 32)))
    dist = actor.distribution(h)
    mu, sd = dist.mean.data[0], dist.std.data[0]

    n = 10_000
    hh = dc.Tensor(np.repeat(h.data, n, axis=0))
    _, logp = actor.act(hh, dc.Tensor(rng.standard_normal((n, 2))))
    mc_entropy = -logp.data.mean()
    mc_se = logp.data.std(ddof=1) / np.sqrt(n)

    # independent oracle: E[-log pi] via dense quadrature over x per dim
    total = 0.0
    for d in range(2):
        xs = np.linspace(mu[d] - 8 * sd[d], mu[d] + 8 * sd[d], 20001)
        pdf = np.exp(-0.5 * ((xs - mu[d]) / sd[d]) ** 2) / (sd[d] * np.sqrt(2 * np.pi))
        log_density = np.log(pdf) - np.log(1 - np.tanh(xs) ** 2 + 1e-6)
        total += np.trapz(-log_density * pdf, xs)
    assert abs(mc_entropy - total) <= 3 * mc_se + 1e-3


def test_critic_eval_deterministic(rng):
    critic = gm.Critic(np.random.default_rng(21))
    imgs, spds = obs_batch(rng)
    a = dc.Tensor(rng.uniform(-1, 1, (3, 2)))
    q1, h1 = critic.eval_step(imgs, spds, a, critic.zero_hidden(3))
    q2, h2 = critic.eval_step(imgs, spds, a, critic.zero_hidden(3))
    assert np.array_equal(q1.data, q2.data)
    assert np.array_equal(h1.data, h2.data)
    assert q1.data.shape == (3, 1)


def test_two_critic_seeds_disagree(rng):
    c1 = gm.Critic(np.random.default_rng(31))
    c2 = gm.Critic(np.random.default_rng(32))
    imgs, spds = obs_batch(rng)
    a = dc.Tensor(rng.uniform(-1, 1, (3, 2)))
    q1, _ = c1.eval_step(imgs, spds, a, c1.zero_hidden(3))
    q2, _ = c2.eval_step(imgs, spds, a, c2.zero_hidden(3))
    assert not np.allclose(q1.data, q2.data)


def test_target_equals_critic_after_copy(rng):
    critic = gm.Critic(np.random.default_rng(41))
    target = gm.make_target(critic, np.random.default_rng(0))
    imgs, spds = obs_batch(rng)
    a = dc.Tensor(rng.uniform(-1, 1, (3, 2)))
    q1, _ = critic.eval_step(imgs, spds, a, critic.zero_hidden(3))
    q2, _ = target.eval_step(imgs, spds, a, target.zero_hidden(3))
    assert np.array_equal(q1.data, q2.data)
    assert all(not t.requires_grad for t in target.params.tensors())


def test_polyak_tau_extremes(rng):
    critic = gm.Critic(np.random.default_rng(51))
    target = gm.make_target(critic, np.random.default_rng(0))
    for t in critic.params.tensors():
        t.data += 1.0
    before = target.params.state_dict()
    gm.polyak_update(target, critic, tau=0.0)
    for name, arr in target.params.items():
        assert np.array_equal(arr.data, before[name])
    gm.polyak_update(target, critic, tau=1.0)
    for name, arr in target.params.items():
        assert np.array_equal(arr.data, critic.params[name].data)
