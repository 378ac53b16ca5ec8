import os

# keep BLAS deterministic and uncontended before numpy loads anywhere
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import numpy as np
import pytest

from mazerl import diffcore as dc


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def gradcheck(fn, tensors, rng, eps=1e-5, rtol=1e-3, atol=1e-8):
    """Compare tape gradients of sum(fn(*tensors) * R) against central
    finite differences, elementwise."""
    out = fn(*tensors)
    probe = rng.standard_normal(out.data.shape)
    dc.backward(dc.tsum(dc.mul(out, dc.Tensor(probe))))

    def loss():
        with dc.no_grad():
            return float((fn(*tensors).data * probe).sum())

    for t in tensors:
        if not t.requires_grad:
            continue
        flat = t.data.reshape(-1)
        numeric = np.zeros(flat.size)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            up = loss()
            flat[i] = orig - eps
            dn = loss()
            flat[i] = orig
            numeric[i] = (up - dn) / (2 * eps)
        analytic = t.grad.reshape(-1)
        err = np.abs(analytic - numeric)
        bound = rtol * np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1.0) + atol
        assert (err <= bound).all(), (
            f"gradient mismatch: worst {err.max():.3e} vs bound {bound[err.argmax()]:.3e} "
            f"for input shape {t.data.shape}"
        )
    for t in tensors:
        t.grad = None


@pytest.fixture
def param(rng):
    def make(*shape):
        return dc.Tensor(rng.standard_normal(shape), requires_grad=True)

    return make


def random_episode(steps, seed=0):
    """A synthetic, well-formed episode record."""
    from mazerl.replay import EpisodeRecord

    r = np.random.default_rng(seed)
    images = r.uniform(size=(steps + 1, 8, 8, 4))
    speeds = r.uniform(size=steps + 1)
    actions = r.uniform(-1, 1, size=(steps + 1, 2))
    actions[0] = 0.0
    rewards = r.normal(size=steps)
    dones = np.zeros(steps)
    dones[-1] = 1.0
    return EpisodeRecord(images, speeds, actions, rewards, dones)
