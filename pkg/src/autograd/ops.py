"""
Differentiable primitives

Elementwise ops accept operands of identical shape or a scalar; any other
broadcast must be spelled out with expand().
"""
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ShapeMismatch
from .tensor import Tensor, make_result

Operand = Union[Tensor, float, int]
Axes = Optional[Union[int, Sequence[int]]]


def _lift(x: Operand, like: Optional[Tensor] = None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    dtype = like.data.dtype if like is not None else None
    return Tensor(np.asarray(x), dtype=dtype)


def _pair(a: Operand, b: Operand) -> Tuple[Tensor, Tensor]:
    like = a if isinstance(a, Tensor) else b if isinstance(b, Tensor) else None
    return _lift(a, like), _lift(b, like)


def _check_elementwise(a: Tensor, b: Tensor, op: str):
    if a.shape == b.shape or a.ndim == 0 or b.ndim == 0:
        return
    raise ShapeMismatch(f"{op}: shapes {a.shape} and {b.shape} differ (use expand to broadcast)")


def _fit(g: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    return np.asarray(g.sum()).reshape(shape)


def _norm_axes(axes: Axes, ndim: int) -> Tuple[int, ...]:
    if axes is None:
        return tuple(range(ndim))
    if isinstance(axes, int):
        axes = (axes,)
    return tuple(sorted(a % ndim for a in axes))


def add(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _check_elementwise(a, b, 'add')

    def add_backward(g):
        return _fit(g, a.shape), _fit(g, b.shape)
    return make_result(a.data + b.data, (a, b), add_backward)


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _check_elementwise(a, b, 'sub')

    def sub_backward(g):
        return _fit(g, a.shape), _fit(-g, b.shape)
    return make_result(a.data - b.data, (a, b), sub_backward)


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _check_elementwise(a, b, 'mul')

    def mul_backward(g):
        return _fit(g * b.data, a.shape), _fit(g * a.data, b.shape)
    return make_result(a.data * b.data, (a, b), mul_backward)


def div(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _check_elementwise(a, b, 'div')

    def div_backward(g):
        return _fit(g / b.data, a.shape), _fit(-g * a.data / (b.data * b.data), b.shape)
    return make_result(a.data / b.data, (a, b), div_backward)


def expand(x: Tensor, shape: Sequence[int]) -> Tensor:
    """Explicit numpy-style broadcast to a larger shape"""
    shape = tuple(shape)
    try:
        value = np.array(np.broadcast_to(x.data, shape))
    except ValueError:
        raise ShapeMismatch(f"expand: cannot broadcast {x.shape} to {shape}")
    lead = len(shape) - x.ndim

    def expand_backward(g):
        g = g.sum(axis=tuple(range(lead))) if lead else g
        axes = tuple(i for i, n in enumerate(x.shape) if n == 1 and g.shape[i] != 1)
        if axes:
            g = g.sum(axis=axes, keepdims=True)
        return (g,)
    return make_result(value, (x,), expand_backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """(m, k) @ (k, n)"""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul: shapes {a.shape} and {b.shape} are incompatible")

    def matmul_backward(g):
        return g @ b.data.T, a.data.T @ g
    return make_result(a.data @ b.data, (a, b), matmul_backward)


def batched_matmul(a: Tensor, b: Tensor) -> Tensor:
    """(..., m, k) @ (..., k, n) with identical leading dimensions"""
    if (a.ndim < 3 or a.ndim != b.ndim or a.shape[:-2] != b.shape[:-2]
            or a.shape[-1] != b.shape[-2]):
        raise ShapeMismatch(f"batched_matmul: shapes {a.shape} and {b.shape} are incompatible")

    def batched_matmul_backward(g):
        return np.matmul(g, np.swapaxes(b.data, -1, -2)), np.matmul(np.swapaxes(a.data, -1, -2), g)
    return make_result(np.matmul(a.data, b.data), (a, b), batched_matmul_backward)


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    if sorted(axes) != list(range(x.ndim)):
        raise ShapeMismatch(f"transpose: axes {axes} do not permute shape {x.shape}")
    inverse = tuple(np.argsort(axes))

    def transpose_backward(g):
        return (np.transpose(g, inverse),)
    return make_result(np.transpose(x.data, axes).copy(), (x,), transpose_backward)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        value = x.data.reshape(tuple(shape))
    except ValueError:
        raise ShapeMismatch(f"reshape: cannot reshape {x.shape} to {tuple(shape)}")

    def reshape_backward(g):
        return (g.reshape(x.shape),)
    return make_result(value.copy(), (x,), reshape_backward)


def concat(xs: Sequence[Tensor], axis: int = 0) -> Tensor:
    xs = list(xs)
    try:
        value = np.concatenate([x.data for x in xs], axis=axis)
    except ValueError:
        raise ShapeMismatch(f"concat: shapes {[x.shape for x in xs]} differ off axis {axis}")
    bounds = np.cumsum([x.shape[axis] for x in xs])[:-1]

    def concat_backward(g):
        return tuple(np.split(g, bounds, axis=axis))
    return make_result(value, tuple(xs), concat_backward)


def slice(x: Tensor, key) -> Tensor:
    """x[key] for basic slices or integer index arrays"""
    value = np.array(x.data[key], copy=True)

    def slice_backward(g):
        out = np.zeros_like(x.data)
        np.add.at(out, key, g)
        return (out,)
    return make_result(value, (x,), slice_backward)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0

    def relu_backward(g):
        return (g * mask,)
    return make_result(np.where(mask, x.data, 0.0), (x,), relu_backward)


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)

    def exp_backward(g):
        return (g * out,)
    return make_result(out, (x,), exp_backward)


def log(x: Tensor) -> Tensor:
    def log_backward(g):
        return (g / x.data,)
    return make_result(np.log(x.data), (x,), log_backward)


def sqrt(x: Tensor) -> Tensor:
    out = np.sqrt(x.data)

    def sqrt_backward(g):
        # sqrt'(0) is taken as 0 so dead units do not poison the gradient
        safe = np.where(out > 0, out, 1.0)
        return (np.where(out > 0, g * 0.5 / safe, 0.0),)
    return make_result(out, (x,), sqrt_backward)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def softmax_backward(g):
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)
    return make_result(out, (x,), softmax_backward)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    probs = np.exp(out)

    def log_softmax_backward(g):
        return (g - probs * g.sum(axis=axis, keepdims=True),)
    return make_result(out, (x,), log_softmax_backward)


def sum(x: Tensor, axes: Axes = None, keepdims: bool = False) -> Tensor:
    reduced = _norm_axes(axes, x.ndim)

    def sum_backward(g):
        if not keepdims:
            g = np.expand_dims(g, reduced)
        return (np.broadcast_to(g, x.shape).copy(),)
    return make_result(x.data.sum(axis=reduced, keepdims=keepdims), (x,), sum_backward)


def mean(x: Tensor, axes: Axes = None, keepdims: bool = False) -> Tensor:
    reduced = _norm_axes(axes, x.ndim)
    count = int(np.prod([x.shape[a] for a in reduced])) if reduced else 1

    def mean_backward(g):
        if not keepdims:
            g = np.expand_dims(g, reduced)
        return (np.broadcast_to(g / count, x.shape).copy(),)
    return make_result(x.data.sum(axis=reduced, keepdims=keepdims) / count, (x,), mean_backward)


def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    momentum: float = 0.1,
    eps: float = 1e-5,
) -> Tensor:
    """
    Batch normalization over every axis except axis 1 (channels)
    Training mode normalizes with batch statistics and updates the running
    statistics in place; eval mode is the affine map given by the running statistics.
    """
    if x.ndim < 2 or gamma.shape != (x.shape[1],) or beta.shape != (x.shape[1],):
        raise ShapeMismatch(f"batch_norm: input {x.shape} with affine {gamma.shape}/{beta.shape}")
    axes = (0,) + tuple(range(2, x.ndim))
    bshape = (1, x.shape[1]) + (1,) * (x.ndim - 2)
    g_b = gamma.data.reshape(bshape)

    if training:
        count = int(np.prod([x.shape[a] for a in axes]))
        mu = x.data.mean(axis=axes, keepdims=True)
        var = ((x.data - mu) ** 2).mean(axis=axes, keepdims=True)
        inv = 1.0 / np.sqrt(var + eps)
        xhat = (x.data - mu) * inv
        unbiased = var * (count / (count - 1)) if count > 1 else var
        running_mean *= (1.0 - momentum)
        running_mean += momentum * mu.reshape(-1)
        running_var *= (1.0 - momentum)
        running_var += momentum * unbiased.reshape(-1)

        def batch_norm_backward(g):
            gxhat = g * g_b
            gx = inv * (gxhat - gxhat.mean(axis=axes, keepdims=True)
                        - xhat * (gxhat * xhat).mean(axis=axes, keepdims=True))
            return gx, (g * xhat).sum(axis=axes), g.sum(axis=axes)
    else:
        inv = 1.0 / np.sqrt(np.array(running_var, copy=True).reshape(bshape) + eps)
        xhat = (x.data - np.array(running_mean, copy=True).reshape(bshape)) * inv

        def batch_norm_backward(g):
            return g * g_b * inv, (g * xhat).sum(axis=axes), g.sum(axis=axes)

    out = xhat * g_b + beta.data.reshape(bshape)
    return make_result(out, (x, gamma, beta), batch_norm_backward)


def conv_temporal(x: Tensor, weight: Tensor, stride: int = 1, pad: Optional[int] = None) -> Tensor:
    """
    Convolution along the frame axis of an N x C x T x V input
    Args:
        x: Input N x Cin x T x V
        weight: Kernel Cout x Cin x K
        stride: Frame stride
        pad: Zero padding on both ends of T (default (K - 1) // 2)
    Returns:
        N x Cout x T' x V with T' = (T + 2 pad - K) // stride + 1
    """
    if x.ndim != 4 or weight.ndim != 3 or weight.shape[1] != x.shape[1]:
        raise ShapeMismatch(f"conv_temporal: input {x.shape} with kernel {weight.shape}")
    n, cin, t, v = x.shape
    cout, _, k = weight.shape
    pad = (k - 1) // 2 if pad is None else pad
    t_out = (t + 2 * pad - k) // stride + 1
    if t_out < 1:
        raise ShapeMismatch(f"conv_temporal: kernel {k} does not fit {t} frames")
    xp = np.pad(x.data, ((0, 0), (0, 0), (pad, pad), (0, 0)))
    w = weight.data
    span = stride * (t_out - 1) + 1

    out = np.zeros((n, cout, t_out, v), dtype=x.data.dtype)
    for j in range(k):
        xj = xp[:, :, j:j + span:stride, :]
        out += np.tensordot(w[:, :, j], xj, axes=([1], [1])).transpose(1, 0, 2, 3)

    def conv_temporal_backward(g):
        gw = np.zeros_like(w)
        gxp = np.zeros_like(xp)
        for j in range(k):
            xj = xp[:, :, j:j + span:stride, :]
            gw[:, :, j] = np.tensordot(g, xj, axes=([0, 2, 3], [0, 2, 3]))
            gxp[:, :, j:j + span:stride, :] += np.tensordot(w[:, :, j], g, axes=([0], [1])).transpose(1, 0, 2, 3)
        return gxp[:, :, pad:pad + t, :], gw
    return make_result(out, (x, weight), conv_temporal_backward)


def graph_conv(x: Tensor, adjacency, weight: Tensor) -> Tensor:
    """
    Spatial graph convolution sum_k W_k (x A_k) over adjacency partitions
    Args:
        x: Input N x Cin x T x V
        adjacency: Constant V x V matrix or K x V x V partitions
        weight: Cout x Cin, or K x Cout x Cin for K partitions
    Returns:
        N x Cout x T x V
    """
    a = adjacency.data if isinstance(adjacency, Tensor) else np.asarray(adjacency)
    a = a.astype(x.data.dtype, copy=False)
    parts = a[None] if a.ndim == 2 else a
    w = weight.data[None] if weight.ndim == 2 else weight.data
    if (x.ndim != 4 or parts.shape[1:] != (x.shape[3], x.shape[3]) or w.shape[0] != parts.shape[0]
            or w.shape[2] != x.shape[1]):
        raise ShapeMismatch(
            f"graph_conv: input {x.shape}, adjacency {a.shape} and weight {weight.shape} are incompatible")

    mixed = [np.matmul(x.data, parts[p]) for p in range(parts.shape[0])]
    out = np.zeros((x.shape[0], w.shape[1]) + x.shape[2:], dtype=x.data.dtype)
    for p, xa in enumerate(mixed):
        out += np.tensordot(w[p], xa, axes=([1], [1])).transpose(1, 0, 2, 3)

    def graph_conv_backward(g):
        gw = np.zeros_like(w)
        gx = np.zeros_like(x.data)
        for p, xa in enumerate(mixed):
            gw[p] = np.tensordot(g, xa, axes=([0, 2, 3], [0, 2, 3]))
            gxa = np.tensordot(w[p], g, axes=([0], [1])).transpose(1, 0, 2, 3)
            gx += np.matmul(gxa, parts[p].T)
        return gx, gw.reshape(weight.shape)
    return make_result(out, (x, weight), graph_conv_backward)


# composites used throughout the models and losses

def square(x: Tensor) -> Tensor:
    return mul(x, x)


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """x @ W + b over the last axis of any-rank input"""
    lead = x.shape[:-1]
    flat = reshape(x, (int(np.prod(lead)) if lead else 1, x.shape[-1]))
    out = matmul(flat, weight)
    if bias is not None:
        out = add(out, expand(reshape(bias, (1, bias.shape[0])), out.shape))
    return reshape(out, lead + (weight.shape[1],))


def center(x: Tensor, axis: int = 0) -> Tensor:
    return sub(x, expand(mean(x, axis, keepdims=True), x.shape))


def l2_normalize(x: Tensor, axis: int = -1) -> Tensor:
    norm = sqrt(sum(square(x), axis, keepdims=True))
    return div(x, expand(norm, x.shape))
