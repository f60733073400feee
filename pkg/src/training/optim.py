"""
Adam optimizer and the warmup + cosine learning-rate schedule
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..autograd import Tensor

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


@dataclass
class AdamState:
    """First/second moment estimates keyed by parameter position"""

    m: Dict[int, np.ndarray] = field(default_factory=dict)
    v: Dict[int, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(params: Sequence[Tensor], grads: Sequence[Optional[np.ndarray]], state: AdamState,
              lr: float, weight_decay: float = 0.0):
    """
    One Adam update in place
    Weight decay is added to the gradient as weight_decay * w. Parameters whose
    gradient is None are left untouched.
    """
    state.t += 1
    correction1 = 1.0 - BETA1 ** state.t
    correction2 = 1.0 - BETA2 ** state.t
    for i, (p, g) in enumerate(zip(params, grads)):
        if g is None:
            continue
        if weight_decay:
            g = g + weight_decay * p.data
        if i not in state.m:
            state.m[i] = np.zeros_like(p.data)
            state.v[i] = np.zeros_like(p.data)
        m, v = state.m[i], state.v[i]
        m *= BETA1
        m += (1.0 - BETA1) * g
        v *= BETA2
        v += (1.0 - BETA2) * g * g
        step = lr * (m / correction1) / (np.sqrt(v / correction2) + EPS)
        p.data -= step.astype(p.data.dtype, copy=False)


class Adam:
    """Adam over a fixed parameter list"""

    def __init__(self, params: Sequence[Tensor], weight_decay: float = 0.0):
        self.params: List[Tensor] = list(params)
        self.weight_decay = weight_decay
        self.state = AdamState()

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self, lr: float):
        adam_step(self.params, [p.grad for p in self.params], self.state, lr, self.weight_decay)


def lr_at(epoch: float, lr: float, epochs: int, warmup_epochs: int = 0) -> float:
    """
    Learning rate at a (possibly fractional) epoch
    Linear warmup from 0 over warmup_epochs, then cosine annealing towards 0 at `epochs`.
    """
    if warmup_epochs > 0 and epoch < warmup_epochs:
        return lr * epoch / warmup_epochs
    span = epochs - warmup_epochs
    if span <= 0:
        return lr
    return lr * 0.5 * (1.0 + math.cos(math.pi * (epoch - warmup_epochs) / span))


def stage_lr(epoch: float, stage) -> float:
    return lr_at(epoch, stage.lr, stage.epochs, stage.warmup_epochs)
