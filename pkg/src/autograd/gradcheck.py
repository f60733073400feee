"""
Central finite-difference gradient checking
"""
from typing import Callable, Sequence

import numpy as np

from .tensor import Tape, Tensor, backward


def numerical_grad(fn: Callable[[], Tensor], leaf: Tensor, eps: float = 1e-4) -> np.ndarray:
    grad = np.zeros_like(leaf.data)
    flat = leaf.data.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        saved = flat[i]
        flat[i] = saved + eps
        plus = fn().item()
        flat[i] = saved - eps
        minus = fn().item()
        flat[i] = saved
        out[i] = (plus - minus) / (2 * eps)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / scale)


def gradcheck(fn: Callable[[], Tensor], leaves: Sequence[Tensor], eps: float = 1e-4) -> float:
    """
    Compare analytic and finite-difference gradients of a scalar function
    Args:
        fn: Builds the scalar loss from the current leaf values
        leaves: Tensors with requires_grad set
        eps: Finite-difference step
    Returns:
        Worst relative error over all leaves
    """
    for leaf in leaves:
        leaf.zero_grad()
    with Tape():
        loss = fn()
        backward(loss)
    worst = 0.0
    for leaf in leaves:
        analytic = np.zeros_like(leaf.data) if leaf.grad is None else leaf.grad.copy()
        worst = max(worst, relative_error(analytic, numerical_grad(fn, leaf, eps)))
    return worst
