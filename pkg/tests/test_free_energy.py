"""The forward model's training objective on teacher-forced batches."""

import numpy as np

from mazerl import diffcore as dc
from mazerl import genmodel as gm
from mazerl.replay import collate

from conftest import random_episode


def micro_batch():
    return collate([random_episode(2, seed=5), random_episode(3, seed=6)])


def test_free_energy_scalar_and_finite():
    fm = gm.ForwardModel(np.random.default_rng(1))
    f = gm.free_energy(fm, micro_batch(), beta=0.03, rng=np.random.default_rng(2))
    assert f.data.shape == ()
    assert np.isfinite(f.data)


def test_perfect_prediction_and_matched_distributions_floor_zero():
    fm = gm.ForwardModel(np.random.default_rng(1))
    batch = micro_batch()
    u = gm.unroll(fm, batch, np.random.default_rng(2))
    # force both loss pieces to their minima and recompose
    u.kl_cells.data[:] = 0.0
    u.nll_real.data[:] = 0.0
    f = gm.free_energy_from_unroll(u, beta=0.03)
    assert f.data == 0.0


def test_masked_steps_contribute_nothing_value_and_gradient():
    fm = gm.ForwardModel(np.random.default_rng(1))
    short = collate([random_episode(2, seed=5), random_episode(4, seed=6)])
    # same episodes padded further: append pure-padding steps
    padded = collate(
        [random_episode(2, seed=5), random_episode(4, seed=6), random_episode(7, seed=7)]
    )
    # drop the third episode but keep its longer horizon
    for arr in ("images", "speeds", "actions", "rewards", "dones", "masks", "lengths"):
        setattr(padded, arr, getattr(padded, arr)[:2])

    f1 = gm.free_energy(fm, short, 0.03, np.random.default_rng(3))
    dc.backward(f1)
    grads1 = {n: t.grad.copy() for n, t in fm.params.items()}
    fm.params.zero_grads()

    f2 = gm.free_energy(fm, padded, 0.03, np.random.default_rng(3))
    dc.backward(f2)
    grads2 = {n: t.grad.copy() for n, t in fm.params.items()}
    fm.params.zero_grads()

    assert np.isclose(f1.data, f2.data, atol=1e-12)
    for name in grads1:
        assert np.allclose(grads1[name], grads2[name], atol=1e-10), name


def test_beta_scales_only_complexity():
    fm = gm.ForwardModel(np.random.default_rng(1))
    batch = micro_batch()
    f1 = gm.free_energy(fm, batch, beta=0.03, rng=np.random.default_rng(4)).data
    f2 = gm.free_energy(fm, batch, beta=0.06, rng=np.random.default_rng(4)).data
    f0 = gm.free_energy(fm, batch, beta=0.0, rng=np.random.default_rng(4)).data
    complexity_1 = f1 - f0
    complexity_2 = f2 - f0
    assert np.isclose(complexity_2, 2 * complexity_1, rtol=1e-9)
    assert complexity_1 > 0


def test_gradient_matches_directional_finite_difference():
    fm = gm.ForwardModel(np.random.default_rng(1))
    batch = micro_batch()
    f = gm.free_energy(fm, batch, 0.03, np.random.default_rng(7))
    dc.backward(f)
    grads = {n: t.grad.copy() for n, t in fm.params.items()}
    fm.params.zero_grads()

    direction_rng = np.random.default_rng(42)
    vs = {n: direction_rng.standard_normal(t.data.shape) for n, t in fm.params.items()}
    analytic = sum(float((grads[n] * vs[n]).sum()) for n in grads)
    eps = 1e-6

    def value():
        with dc.no_grad():
            return float(gm.free_energy(fm, batch, 0.03, np.random.default_rng(7)).data)

    for n, t in fm.params.items():
        t.data += eps * vs[n]
    up = value()
    for n, t in fm.params.items():
        t.data -= 2 * eps * vs[n]
    down = value()
    for n, t in fm.params.items():
        t.data += eps * vs[n]
    numeric = (up - down) / (2 * eps)
    assert abs(analytic - numeric) <= 1e-3 * max(abs(analytic), abs(numeric))


def test_unroll_exposes_detached_pieces():
    fm = gm.ForwardModel(np.random.default_rng(1))
    batch = micro_batch()
    u = gm.unroll(fm, batch, np.random.default_rng(2))
    b, t1 = batch.rewards.shape
    assert u.h_detached.shape == (b, t1 + 1, 32)
    assert u.kl_values.shape == (b, t1 + 1)
    assert u.curiosity_hidden.shape == (b, t1)
    assert u.curiosity_prediction.shape == (b, t1)
    assert (u.curiosity_hidden >= 0).all() and (u.curiosity_hidden <= 1).all()
    assert (u.curiosity_prediction >= 0).all() and (u.curiosity_prediction <= 1).all()
