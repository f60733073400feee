"""
Linear and batch-norm layers
"""
import numpy as np

from ..autograd import Tensor, ops
from .module import Module, uniform_init


class Linear(Module):
    """y = x W + b over the last axis; W is stored in_dim x out_dim"""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, bias: bool = True):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = self.add_param('weight', uniform_init(rng, (in_dim, out_dim), in_dim))
        self.bias = self.add_param('bias', np.zeros(out_dim)) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        return ops.linear(x, self.weight, self.bias)


class BatchNorm(Module):
    """Batch normalization over axis 1 with running statistics"""

    def __init__(self, channels: int, momentum: float = 0.1, eps: float = 1e-5):
        super().__init__()
        self.momentum = momentum
        self.eps = eps
        self.gamma = self.add_param('gamma', np.ones(channels))
        self.beta = self.add_param('beta', np.zeros(channels))
        self.running_mean = self.add_buffer('running_mean', np.zeros(channels))
        self.running_var = self.add_buffer('running_var', np.ones(channels))

    def forward(self, x: Tensor) -> Tensor:
        return ops.batch_norm(x, self.gamma, self.beta, self.running_mean, self.running_var,
                              self.training, self.momentum, self.eps)
