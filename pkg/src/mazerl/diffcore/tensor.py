"""Reverse-mode autodiff over float64 numpy arrays.

Covers exactly the layer primitives the fixed model architectures need
(linear, prelu, tanh, softplus, 3x3 reflect-padded convolution, 3x3/stride-2
average pooling, x2 bilinear upsampling, a fused GRU step) plus the
elementwise/reduction glue the losses are written in.

Every op records a one-shot backward closure; ``backward`` consumes the
record, so running a second backward through the same subgraph raises.
Non-finite values are rejected at op boundaries.
"""

from __future__ import annotations

import math

import numpy as np


class DiffcoreError(Exception):
    pass


class ConfigurationError(DiffcoreError):
    """Shape or wiring mismatch, named after the offending layer."""


class NumericError(DiffcoreError):
    """NaN or Inf escaped an operation."""


class UsageError(DiffcoreError):
    """API misuse: non-scalar backward, consumed record, missing grad."""


_GRAD_ENABLED = True


class no_grad:
    """Context manager suppressing tape recording (rollouts, targets)."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


def grad_enabled() -> bool:
    return _GRAD_ENABLED


def _check_finite(arr: np.ndarray, what: str) -> None:
    # sum() is one cheap pass; any NaN/Inf in the array makes it non-finite
    # (finite sums cannot overflow at the magnitudes this library handles).
    if not np.isfinite(arr.sum()):
        raise NumericError(f"non-finite values in {what}")


class Tensor:
    """n-d float64 array with an optional gradient record."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp", "_spent")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if not arr.flags["C_CONTIGUOUS"]:
            arr = np.ascontiguousarray(arr)
        _check_finite(arr, "tensor data")
        self.data = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._vjp = None
        self._spent = False

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        t = Tensor.__new__(Tensor)
        t.data = self.data
        t.grad = None
        t.requires_grad = False
        t._parents = ()
        t._vjp = None
        t._spent = False
        return t

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return mul(self, -1.0)


def _as_tensor(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=np.float64))


def _result(data: np.ndarray, parents, vjp, what: str) -> Tensor:
    _check_finite(data, what)
    t = Tensor.__new__(Tensor)
    t.data = data
    t.grad = None
    t._spent = False
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        t.requires_grad = True
        t._parents = parents
        t._vjp = vjp
    else:
        t.requires_grad = False
        t._parents = ()
        t._vjp = None
    return t


def backward(root: Tensor) -> None:
    """Accumulate d(root)/d(leaf) into every reachable leaf's ``grad``.

    The traversed records are consumed; a later backward touching them
    raises UsageError.
    """
    if not isinstance(root, Tensor):
        raise UsageError("backward expects a Tensor root")
    if root.data.size != 1:
        raise UsageError(f"backward root must be scalar, got shape {root.data.shape}")
    if root._spent:
        raise UsageError("backward through an already-consumed record")
    if root._vjp is None:
        if root.requires_grad:  # scalar leaf: d(root)/d(root) = 1
            if root.grad is None:
                root.grad = np.zeros_like(root.data)
            root.grad += 1.0
        return

    # iterative postorder (graphs are deep: time-unrolled chains)
    order: list[Tensor] = []
    visited = {id(root)}
    stack: list[tuple[Tensor, int]] = [(root, 0)]
    while stack:
        node, idx = stack[-1]
        if idx < len(node._parents):
            stack[-1] = (node, idx + 1)
            p = node._parents[idx]
            if p._spent:
                raise UsageError("graph reuses an already-consumed record")
            if id(p) not in visited and p._vjp is not None:
                visited.add(id(p))
                stack.append((p, 0))
        else:
            stack.pop()
            order.append(node)

    grads: dict[int, np.ndarray] = {id(root): np.ones_like(root.data)}
    owned = {id(root)}  # buffers we allocated and may mutate in place
    for node in reversed(order):
        g = grads.pop(id(node), None)
        node._spent = True
        if g is None:
            continue
        pieces = node._vjp(g)
        for parent, piece in zip(node._parents, pieces):
            if piece is None or not parent.requires_grad:
                continue
            if parent._vjp is None:
                # leaf: accumulate into .grad
                if parent.grad is None:
                    parent.grad = np.zeros_like(parent.data)
                if type(piece) is tuple:
                    parent.grad[piece[0]] += piece[1]
                else:
                    parent.grad += piece
            else:
                key = id(parent)
                if type(piece) is tuple:
                    buf = grads.get(key)
                    if buf is None:
                        buf = np.zeros_like(parent.data)
                        grads[key] = buf
                        owned.add(key)
                    elif key not in owned:
                        # vjps may hand back shared views; copy before mutating
                        buf = buf.copy()
                        grads[key] = buf
                        owned.add(key)
                    buf[piece[0]] += piece[1]
                else:
                    cur = grads.get(key)
                    if cur is None:
                        grads[key] = piece
                    else:
                        grads[key] = cur + piece
                        owned.add(key)
        node._vjp = None
        node._parents = ()


# ---------------------------------------------------------------------------
# elementwise / glue


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data + b.data

    def vjp(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return _result(out, (a, b), vjp, "add")


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data - b.data

    def vjp(g):
        return _unbroadcast(g, a.data.shape), -_unbroadcast(g, b.data.shape)

    return _result(out, (a, b), vjp, "sub")


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data * b.data

    def vjp(g):
        return (
            _unbroadcast(g * b.data, a.data.shape),
            _unbroadcast(g * a.data, b.data.shape),
        )

    return _result(out, (a, b), vjp, "mul")


def div(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data / b.data

    def vjp(g):
        return (
            _unbroadcast(g / b.data, a.data.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape),
        )

    return _result(out, (a, b), vjp, "div")


def square(x: Tensor) -> Tensor:
    out = x.data * x.data

    def vjp(g):
        return (2.0 * x.data * g,)

    return _result(out, (x,), vjp, "square")


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)

    def vjp(g):
        return (g * out,)

    return _result(out, (x,), vjp, "exp")


def log(x: Tensor) -> Tensor:
    out = np.log(x.data)

    def vjp(g):
        return (g / x.data,)

    return _result(out, (x,), vjp, "log")


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def vjp(g):
        return (g * (1.0 - out * out),)

    return _result(out, (x,), vjp, "tanh")


def sigmoid(x: Tensor) -> Tensor:
    out = _sigmoid_np(x.data)

    def vjp(g):
        return (g * out * (1.0 - out),)

    return _result(out, (x,), vjp, "sigmoid")


def _sigmoid_np(x: np.ndarray) -> np.ndarray:
    ex = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + ex), ex / (1.0 + ex))


_SOFTPLUS_THRESHOLD = 20.0


def softplus(x: Tensor) -> Tensor:
    out = _softplus_np(x.data)

    def vjp(g):
        d = np.where(x.data > _SOFTPLUS_THRESHOLD, 1.0, _sigmoid_np(x.data))
        return (g * d,)

    return _result(out, (x,), vjp, "softplus")


def _softplus_np(x: np.ndarray) -> np.ndarray:
    # beta=1; linear beyond the threshold to avoid overflow
    return np.where(x > _SOFTPLUS_THRESHOLD, x, np.log1p(np.exp(np.minimum(x, _SOFTPLUS_THRESHOLD))))


def _prelu_fwd(x: np.ndarray, leak: float):
    factor = np.where(x > 0, 1.0, leak)
    return x * factor, factor


def _prelu_bwd(g: np.ndarray, x: np.ndarray, factor: np.ndarray):
    return g * factor, np.vdot(np.minimum(x, 0.0), g)


def prelu(x: Tensor, a: Tensor) -> Tensor:
    """max(0,x) + a*min(0,x) with a single learnable leak (shape (1,))."""
    if a.data.size != 1:
        raise ConfigurationError("prelu leak must be a single parameter")
    leak = float(a.data.reshape(()))
    out, factor = _prelu_fwd(x.data, leak)

    def vjp(g):
        gx, ga = _prelu_bwd(g, x.data, factor)
        return gx, np.full(a.data.shape, ga)

    return _result(out, (x, a), vjp, "prelu")


def linear_prelu(x: Tensor, w: Tensor, b: Tensor, a: Tensor) -> Tensor:
    """Fused x @ w + b followed by a single-leak prelu."""
    if x.data.ndim != 2 or x.data.shape[1] != w.data.shape[0]:
        raise ConfigurationError(
            f"linear_prelu: input {x.data.shape} does not match weight {w.data.shape}"
        )
    leak = float(a.data.reshape(()))
    pre = x.data @ w.data + b.data
    out, factor = _prelu_fwd(pre, leak)

    def vjp(g):
        dpre, ga = _prelu_bwd(g, pre, factor)
        return (
            dpre @ w.data.T,
            x.data.T @ dpre,
            dpre.sum(axis=0),
            np.full(a.data.shape, ga),
        )

    return _result(out, (x, w, b, a), vjp, "linear_prelu")


def minimum(a: Tensor, b: Tensor) -> Tensor:
    out = np.minimum(a.data, b.data)

    def vjp(g):
        take_a = a.data <= b.data
        return (
            _unbroadcast(np.where(take_a, g, 0.0), a.data.shape),
            _unbroadcast(np.where(take_a, 0.0, g), b.data.shape),
        )

    return _result(out, (a, b), vjp, "minimum")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ConfigurationError(
            f"matmul expects 2-d operands, got {a.data.shape} @ {b.data.shape}"
        )
    out = a.data @ b.data

    def vjp(g):
        return g @ b.data.T, a.data.T @ g

    return _result(out, (a, b), vjp, "matmul")


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """x @ w + b with x (N, din), w (din, dout), b (dout,)."""
    if x.data.ndim != 2 or x.data.shape[1] != w.data.shape[0]:
        raise ConfigurationError(
            f"linear: input {x.data.shape} does not match weight {w.data.shape}"
        )
    out = x.data @ w.data + b.data

    def vjp(g):
        return g @ w.data.T, x.data.T @ g, g.sum(axis=0)

    return _result(out, (x, w, b), vjp, "linear")


def reshape(x: Tensor, shape) -> Tensor:
    out = x.data.reshape(shape)

    def vjp(g):
        return (g.reshape(x.data.shape),)

    return _result(out, (x,), vjp, "reshape")


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = tuple(tensors)
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        pieces = []
        for i in range(len(tensors)):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(offsets[i], offsets[i + 1])
            pieces.append(np.ascontiguousarray(g[tuple(sl)]))
        return tuple(pieces)

    return _result(out, tensors, vjp, "concat")


def narrow0(x: Tensor, start: int, stop: int) -> Tensor:
    """Contiguous row slice along axis 0; gradient scatters back sparsely."""
    out = x.data[start:stop].copy()
    sl = slice(start, stop)

    def vjp(g):
        return ((sl, g),)

    return _result(out, (x,), vjp, "narrow0")


def take_rows(x: Tensor, idx: np.ndarray) -> Tensor:
    """Gather rows along axis 0; ``idx`` must not repeat an index."""
    out = x.data[idx]

    def vjp(g):
        return ((idx, g),)

    return _result(out, (x,), vjp, "take_rows")


def scatter_rows(x: Tensor, idx: np.ndarray, total: int) -> Tensor:
    """Place rows at positions ``idx`` of a zero-filled (total, ...) array."""
    out = np.zeros((total,) + x.data.shape[1:])
    out[idx] = x.data

    def vjp(g):
        return (g[idx],)

    return _result(out, (x,), vjp, "scatter_rows")


def tsum(x: Tensor) -> Tensor:
    out = np.asarray(x.data.sum())

    def vjp(g):
        return (np.broadcast_to(g, x.data.shape).copy(),)

    return _result(out, (x,), vjp, "sum")


def sum_axis(x: Tensor, axis: int) -> Tensor:
    out = x.data.sum(axis=axis)

    def vjp(g):
        return (np.repeat(np.expand_dims(g, axis), x.data.shape[axis], axis=axis),)

    return _result(out, (x,), vjp, "sum_axis")


def mean_axis(x: Tensor, axis: int) -> Tensor:
    n = x.data.shape[axis]
    out = x.data.mean(axis=axis)

    def vjp(g):
        return (np.repeat(np.expand_dims(g / n, axis), n, axis=axis),)

    return _result(out, (x,), vjp, "mean_axis")


def tmean(x: Tensor) -> Tensor:
    n = x.data.size
    out = np.asarray(x.data.mean())

    def vjp(g):
        return (np.broadcast_to(g / n, x.data.shape).copy(),)

    return _result(out, (x,), vjp, "mean")


# ---------------------------------------------------------------------------
# spatial primitives, channels-last (N, H, W, C) -- the fixed 3x3 kernel
# configurations the architectures use


def _reflect_pad1(x: np.ndarray) -> np.ndarray:
    n, h, w, c = x.shape
    out = np.empty((n, h + 2, w + 2, c))
    out[:, 1:-1, 1:-1] = x
    out[:, 0, 1:-1] = x[:, 1, :]
    out[:, -1, 1:-1] = x[:, -2, :]
    out[:, :, 0] = out[:, :, 2]
    out[:, :, -1] = out[:, :, -3]
    return out


def _fold_reflect_pad1(gpad: np.ndarray) -> np.ndarray:
    """Adjoint of reflect padding: fold border gradients onto their sources."""
    g = gpad[:, 1:-1, 1:-1].copy()
    g[:, 1, :] += gpad[:, 0, 1:-1]
    g[:, -2, :] += gpad[:, -1, 1:-1]
    g[:, :, 1] += gpad[:, 1:-1, 0]
    g[:, :, -2] += gpad[:, 1:-1, -1]
    g[:, 1, 1] += gpad[:, 0, 0]
    g[:, 1, -2] += gpad[:, 0, -1]
    g[:, -2, 1] += gpad[:, -1, 0]
    g[:, -2, -2] += gpad[:, -1, -1]
    return g


_OFFSETS3 = [(di, dj) for di in range(3) for dj in range(3)]


def _im2col3(xpad: np.ndarray, h: int, w: int) -> np.ndarray:
    """(N, H+2, W+2, C) -> (N*H*W, 9*C) patch matrix, one bulk copy via a
    strided view; column order (di, dj, c)."""
    n, c = xpad.shape[0], xpad.shape[3]
    s = xpad.strides
    view = np.lib.stride_tricks.as_strided(
        xpad,
        shape=(n, h, w, 3, 3, c),
        strides=(s[0], s[1], s[2], s[1], s[2], s[3]),
        writeable=False,
    )
    return view.reshape(n * h * w, 9 * c)


def _conv3_forward(xdata: np.ndarray, wdata: np.ndarray, bdata: np.ndarray):
    """Per-offset accumulation; returns ((N*H*W, Cout) pre-activation, the 9
    patch views for the backward weight products, and the offset kernels)."""
    n, h, wd, cin = xdata.shape
    xpad = _reflect_pad1(xdata)
    wk = np.ascontiguousarray(wdata.transpose(2, 3, 1, 0))  # (3, 3, Cin, Cout)
    views = []
    pre = None
    for di, dj in _OFFSETS3:
        v = np.ascontiguousarray(xpad[:, di : di + h, dj : dj + wd, :]).reshape(-1, cin)
        views.append(v)
        p = v @ wk[di, dj]
        if pre is None:
            pre = p
        else:
            pre += p
    pre += bdata
    return pre, views, wk


def _conv3_backward(g2: np.ndarray, views, wk: np.ndarray, n, h, wd, cin, cout):
    gpad = np.zeros((n, h + 2, wd + 2, cin))
    gw = np.empty((cout, cin, 3, 3))
    for k, (di, dj) in enumerate(_OFFSETS3):
        gpad[:, di : di + h, dj : dj + wd] += (g2 @ wk[di, dj].T).reshape(n, h, wd, cin)
        gw[:, :, di, dj] = (views[k].T @ g2).T
    return _fold_reflect_pad1(gpad), gw, g2.sum(axis=0)


def _conv3_check(x: Tensor, w: Tensor) -> None:
    if x.data.ndim != 4 or w.data.ndim != 4 or w.data.shape[2:] != (3, 3):
        raise ConfigurationError("conv3x3: expects x (N,H,W,C), w (Co,Ci,3,3)")
    if x.data.shape[3] != w.data.shape[1]:
        raise ConfigurationError(
            f"conv3x3: input channels {x.data.shape[3]} != weight channels {w.data.shape[1]}"
        )


def conv3x3_reflect(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """3x3 convolution, stride 1, reflect padding 1 (spatial shape preserved)."""
    _conv3_check(x, w)
    n, h, wd, cin = x.data.shape
    cout = w.data.shape[0]
    pre, views, wk = _conv3_forward(x.data, w.data, b.data)
    out = pre.reshape(n, h, wd, cout)

    def vjp(g):
        g2 = g.reshape(n * h * wd, cout)
        return _conv3_backward(g2, views, wk, n, h, wd, cin, cout)

    return _result(out, (x, w, b), vjp, "conv3x3")


def conv3x3_reflect_prelu(x: Tensor, w: Tensor, b: Tensor, a: Tensor) -> Tensor:
    """Fused reflect-padded 3x3 convolution followed by a single-leak prelu."""
    _conv3_check(x, w)
    n, h, wd, cin = x.data.shape
    cout = w.data.shape[0]
    leak = float(a.data.reshape(()))
    pre, views, wk = _conv3_forward(x.data, w.data, b.data)
    out2, factor = _prelu_fwd(pre, leak)
    out = out2.reshape(n, h, wd, cout)

    def vjp(g):
        g2, ga = _prelu_bwd(g.reshape(n * h * wd, cout), pre, factor)
        gx, gw, gb = _conv3_backward(g2, views, wk, n, h, wd, cin, cout)
        return gx, gw, gb, np.full(a.data.shape, ga)

    return _result(out, (x, w, b, a), vjp, "conv3x3_prelu")


def conv1x1(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Pointwise convolution: channel mixing only."""
    if x.data.ndim != 4 or w.data.ndim != 2:
        raise ConfigurationError("conv1x1: expects x (N,H,W,C), w (Co,Ci)")
    if x.data.shape[3] != w.data.shape[1]:
        raise ConfigurationError(
            f"conv1x1: input channels {x.data.shape[3]} != weight channels {w.data.shape[1]}"
        )
    n, h, wd, cin = x.data.shape
    cout = w.data.shape[0]
    x2 = x.data.reshape(-1, cin)
    out = (x2 @ w.data.T + b.data).reshape(n, h, wd, cout)

    def vjp(g):
        g2 = g.reshape(-1, cout)
        gw = g2.T @ x2
        gx = (g2 @ w.data).reshape(n, h, wd, cin)
        gb = g2.sum(axis=0)
        return gx, gw, gb

    return _result(out, (x, w, b), vjp, "conv1x1")


def _pool_geometry(size: int):
    """Per-offset slice pairs and valid-cell counts for 3x3/stride-2/pad-1
    pooling along one axis."""
    out_size = (size + 2 - 3) // 2 + 1
    counts = np.zeros(out_size, dtype=np.int64)
    slices = []
    for d in range(3):
        # input index 2*o - 1 + d must land in [0, size)
        o_lo = 0 if d >= 1 else 1
        o_hi = min(out_size, (size - d) // 2 + 1 if size >= d else 0)
        if o_hi <= o_lo:
            slices.append(None)
            continue
        in_lo = 2 * o_lo - 1 + d
        slices.append((slice(o_lo, o_hi), slice(in_lo, in_lo + 2 * (o_hi - o_lo), 2)))
        counts[o_lo:o_hi] += 1
    return out_size, counts, slices


_POOL_CACHE: dict[int, tuple] = {}


def _pool_info(size: int):
    info = _POOL_CACHE.get(size)
    if info is None:
        info = _pool_geometry(size)
        _POOL_CACHE[size] = info
    return info


def avg_pool3x3_s2(x: Tensor) -> Tensor:
    """3x3 average pooling, stride 2, padding 1; padding cells are excluded
    from the divisor, so constant inputs pool to the same constant."""
    if x.data.ndim != 4:
        raise ConfigurationError("avg_pool: expects x (N,H,W,C)")
    n, h, w, c = x.data.shape
    oh, ch, row_slices = _pool_info(h)
    ow, cw, col_slices = _pool_info(w)
    div = (ch[:, None, None] * cw[None, :, None]).astype(np.float64)
    acc = np.zeros((n, oh, ow, c))
    for rs in row_slices:
        if rs is None:
            continue
        for cs in col_slices:
            if cs is None:
                continue
            acc[:, rs[0], cs[0]] += x.data[:, rs[1], cs[1]]
    out = acc / div

    def vjp(g):
        gd = g / div
        gx = np.zeros_like(x.data)
        for rs in row_slices:
            if rs is None:
                continue
            for cs in col_slices:
                if cs is None:
                    continue
                gx[:, rs[1], cs[1]] += gd[:, rs[0], cs[0]]
        return (gx,)

    return _result(out, (x,), vjp, "avg_pool3x3")


def _bilinear_matrix(n_in: int) -> np.ndarray:
    """Row-interpolation matrix for x2 bilinear upsampling (half-pixel
    centers, edges clamped)."""
    n_out = 2 * n_in
    m = np.zeros((n_out, n_in))
    for o in range(n_out):
        src = (o + 0.5) / 2.0 - 0.5
        i0 = math.floor(src)
        frac = src - i0
        i0c = min(max(i0, 0), n_in - 1)
        i1c = min(max(i0 + 1, 0), n_in - 1)
        m[o, i0c] += 1.0 - frac
        m[o, i1c] += frac
    return m


_BILINEAR_CACHE: dict[int, np.ndarray] = {}


def _bilinear(n_in: int) -> np.ndarray:
    m = _BILINEAR_CACHE.get(n_in)
    if m is None:
        m = _bilinear_matrix(n_in)
        _BILINEAR_CACHE[n_in] = m
    return m


def upsample_bilinear2x(x: Tensor) -> Tensor:
    if x.data.ndim != 4:
        raise ConfigurationError("upsample: expects x (N,H,W,C)")
    n, h, w, c = x.data.shape
    r = _bilinear(h)
    cm = _bilinear(w)
    # rows: (N, 2H, W*C) = R @ (N, H, W*C); cols: (N*2H, 2W, C) = Cm @ ...
    t = (r @ x.data.reshape(n, h, w * c)).reshape(n * 2 * h, w, c)
    out = (cm @ t).reshape(n, 2 * h, 2 * w, c)

    def vjp(g):
        gt = (cm.T @ g.reshape(n * 2 * h, 2 * w, c)).reshape(n, 2 * h, w * c)
        gx = (r.T @ gt).reshape(n, h, w, c)
        return (gx,)

    return _result(out, (x,), vjp, "upsample_bilinear2x")


def gru_step(x: Tensor, h: Tensor, w_ih: Tensor, w_hh: Tensor, b_ih: Tensor, b_hh: Tensor) -> Tensor:
    """One GRU cell advance (gate order r, z, n; weights (3H, din)/(3H, H))."""
    din = x.data.shape[1]
    hd = h.data.shape[1]
    if w_ih.data.shape != (3 * hd, din) or w_hh.data.shape != (3 * hd, hd):
        raise ConfigurationError(
            f"gru_step: weight shapes {w_ih.data.shape}/{w_hh.data.shape} do not match "
            f"input {din}, hidden {hd}"
        )
    gi = x.data @ w_ih.data.T + b_ih.data
    gh = h.data @ w_hh.data.T + b_hh.data
    r = _sigmoid_np(gi[:, :hd] + gh[:, :hd])
    z = _sigmoid_np(gi[:, hd : 2 * hd] + gh[:, hd : 2 * hd])
    hn_lin = gh[:, 2 * hd :]
    n_pre = gi[:, 2 * hd :] + r * hn_lin
    n = np.tanh(n_pre)
    out = (1.0 - z) * n + z * h.data

    def vjp(g):
        dn = g * (1.0 - z) * (1.0 - n * n)
        dz = g * (h.data - n) * z * (1.0 - z)
        dr = dn * hn_lin * r * (1.0 - r)
        dgi = np.concatenate([dr, dz, dn], axis=1)
        dgh = np.concatenate([dr, dz, dn * r], axis=1)
        gx = dgi @ w_ih.data
        ghp = dgh @ w_hh.data + g * z
        gw_ih = dgi.T @ x.data
        gw_hh = dgh.T @ h.data
        return gx, ghp, gw_ih, gw_hh, dgi.sum(axis=0), dgh.sum(axis=0)

    return _result(out, (x, h, w_ih, w_hh, b_ih, b_hh), vjp, "gru_step")
