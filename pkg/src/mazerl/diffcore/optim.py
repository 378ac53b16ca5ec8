"""Named parameter sets with one shared Adam state per set."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, UsageError

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def fanin_uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class ParamSet:
    """name -> parameter mapping plus per-parameter Adam moment buffers and a
    step counter shared across the set."""

    def __init__(self):
        self._params: dict[str, Tensor] = {}
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}
        self.step_count = 0

    def add(self, name: str, data: np.ndarray, requires_grad: bool = True) -> Tensor:
        if name in self._params:
            raise UsageError(f"duplicate parameter name {name!r}")
        t = Tensor(np.asarray(data, dtype=np.float64), requires_grad=requires_grad)
        self._params[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def names(self):
        return list(self._params.keys())

    def items(self):
        return self._params.items()

    def tensors(self):
        return list(self._params.values())

    def num_values(self) -> int:
        return sum(t.data.size for t in self._params.values())

    def zero_grads(self) -> None:
        for t in self._params.values():
            t.grad = None

    def copy_values_from(self, other: "ParamSet") -> None:
        for name, t in self._params.items():
            np.copyto(t.data, other[name].data)

    def polyak_from(self, other: "ParamSet", tau: float) -> None:
        """values <- tau * other + (1 - tau) * values"""
        for name, t in self._params.items():
            t.data *= 1.0 - tau
            t.data += tau * other[name].data

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self._params.items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for name, t in self._params.items():
            if name not in state:
                raise UsageError(f"checkpoint is missing parameter {name!r}")
            arr = np.asarray(state[name], dtype=np.float64)
            if arr.shape != t.data.shape:
                raise UsageError(
                    f"checkpoint shape {arr.shape} != parameter shape {t.data.shape} for {name!r}"
                )
            np.copyto(t.data, arr)


def adam_step(params: ParamSet, lr: float) -> None:
    """Standard Adam update over every parameter in the set; clears grads.

    All parameters advance under one shared, bias-corrected step counter.
    """
    missing = [name for name, t in params.items() if t.grad is None]
    if missing:
        raise UsageError(f"adam_step: missing grads for {missing}")
    params.step_count += 1
    t = params.step_count
    c1 = 1.0 - ADAM_BETA1**t
    c2 = 1.0 - ADAM_BETA2**t
    for name, p in params.items():
        g = p.grad
        m = params._m.get(name)
        if m is None:
            m = np.zeros_like(p.data)
            v = np.zeros_like(p.data)
            params._m[name] = m
            params._v[name] = v
        else:
            v = params._v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * (g * g)
        p.data -= lr * (m / c1) / (np.sqrt(v / c2) + ADAM_EPS)
        p.grad = None
