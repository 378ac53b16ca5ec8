"""Thin layer wrappers binding parameters in a ParamSet to the primitives.

Weights are fan-in-scaled uniform, biases zero, PReLU leaks start at 0.25.
The recurring "linear + PReLU" and "conv + PReLU" table rows map to fused
primitives.
"""

from __future__ import annotations

import numpy as np

from ..diffcore import (
    ParamSet,
    Tensor,
    conv1x1,
    conv3x3_reflect,
    conv3x3_reflect_prelu,
    fanin_uniform,
    gru_step,
    linear,
    linear_prelu,
    prelu,
)


class Linear:
    def __init__(self, ps: ParamSet, name: str, rng: np.random.Generator, din: int, dout: int):
        self.w = ps.add(f"{name}.w", fanin_uniform(rng, (din, dout), din))
        self.b = ps.add(f"{name}.b", np.zeros(dout))

    def __call__(self, x: Tensor) -> Tensor:
        return linear(x, self.w, self.b)


class PReLU:
    def __init__(self, ps: ParamSet, name: str):
        self.a = ps.add(f"{name}.a", np.full(1, 0.25))

    def __call__(self, x: Tensor) -> Tensor:
        return prelu(x, self.a)


class LinearPReLU:
    def __init__(self, ps: ParamSet, name: str, rng: np.random.Generator, din: int, dout: int):
        self.w = ps.add(f"{name}.w", fanin_uniform(rng, (din, dout), din))
        self.b = ps.add(f"{name}.b", np.zeros(dout))
        self.a = ps.add(f"{name}.act.a", np.full(1, 0.25))

    def __call__(self, x: Tensor) -> Tensor:
        return linear_prelu(x, self.w, self.b, self.a)


class Conv3x3:
    def __init__(self, ps: ParamSet, name: str, rng: np.random.Generator, cin: int, cout: int):
        self.w = ps.add(f"{name}.w", fanin_uniform(rng, (cout, cin, 3, 3), cin * 9))
        self.b = ps.add(f"{name}.b", np.zeros(cout))

    def __call__(self, x: Tensor) -> Tensor:
        return conv3x3_reflect(x, self.w, self.b)


class Conv3x3PReLU:
    def __init__(self, ps: ParamSet, name: str, rng: np.random.Generator, cin: int, cout: int):
        self.w = ps.add(f"{name}.w", fanin_uniform(rng, (cout, cin, 3, 3), cin * 9))
        self.b = ps.add(f"{name}.b", np.zeros(cout))
        self.a = ps.add(f"{name}.act.a", np.full(1, 0.25))

    def __call__(self, x: Tensor) -> Tensor:
        return conv3x3_reflect_prelu(x, self.w, self.b, self.a)


class Conv1x1:
    def __init__(self, ps: ParamSet, name: str, rng: np.random.Generator, cin: int, cout: int):
        self.w = ps.add(f"{name}.w", fanin_uniform(rng, (cout, cin), cin))
        self.b = ps.add(f"{name}.b", np.zeros(cout))

    def __call__(self, x: Tensor) -> Tensor:
        return conv1x1(x, self.w, self.b)


class GRUCell:
    def __init__(self, ps: ParamSet, name: str, rng: np.random.Generator, din: int, dh: int):
        self.w_ih = ps.add(f"{name}.w_ih", fanin_uniform(rng, (3 * dh, din), din))
        self.w_hh = ps.add(f"{name}.w_hh", fanin_uniform(rng, (3 * dh, dh), dh))
        self.b_ih = ps.add(f"{name}.b_ih", np.zeros(3 * dh))
        self.b_hh = ps.add(f"{name}.b_hh", np.zeros(3 * dh))

    def __call__(self, x: Tensor, h: Tensor) -> Tensor:
        return gru_step(x, h, self.w_ih, self.w_hh, self.b_ih, self.b_hh)
