"""
Feature alignment
Bi-directional multi-head cross-attention between the frame tokens of the two
encoders, summed, mean-pooled over frames and classified by a linear head.
"""
import math
from dataclasses import asdict, dataclass
from typing import Tuple

import numpy as np

from ..autograd import Tensor, ops
from ..errors import ConfigError, ShapeMismatch
from .layers import Linear
from .module import Module


@dataclass(frozen=True)
class AlignConfig:
    """
    Attributes:
        model_dim: Token width D
        num_classes: Classifier outputs
        num_heads: Attention heads (D must divide evenly)
        attention_bias: Give the Q/K/V/O projections a bias
        align_norm: Normalize fused tokens over D before pooling
    """

    model_dim: int
    num_classes: int
    num_heads: int = 4
    attention_bias: bool = False
    align_norm: bool = False

    def __post_init__(self):
        if self.num_heads < 1 or self.model_dim % self.num_heads != 0:
            raise ConfigError(f"model_dim {self.model_dim} is not divisible by {self.num_heads} heads")
        if self.num_classes < 2:
            raise ConfigError(f"num_classes must be at least 2, got {self.num_classes}")

    def to_dict(self) -> dict:
        return asdict(self)


def scaled_dot_attention(q: Tensor, k: Tensor, v: Tensor) -> Tuple[Tensor, Tensor]:
    """
    softmax(Q K^T / sqrt(d_k)) V with the softmax over keys
    Args:
        q: ... x L x d_k
        k: ... x S x d_k
        v: ... x S x d_v
    Returns:
        (output ... x L x d_v, weights ... x L x S)
    """
    if q.ndim < 3 or q.shape[-1] != k.shape[-1] or k.shape[:-1] != v.shape[:-1] or q.shape[:-2] != k.shape[:-2]:
        raise ShapeMismatch(f"attention: query {q.shape}, key {k.shape}, value {v.shape} are incompatible")
    axes = tuple(range(k.ndim - 2)) + (k.ndim - 1, k.ndim - 2)
    scores = ops.mul(ops.batched_matmul(q, ops.transpose(k, axes)), 1.0 / math.sqrt(q.shape[-1]))
    weights = ops.softmax(scores, axis=-1)
    return ops.batched_matmul(weights, v), weights


class MultiHeadCrossAttention(Module):
    """Queries from one token sequence attend over another"""

    def __init__(self, dim: int, num_heads: int, rng: np.random.Generator, bias: bool = False):
        super().__init__()
        self.dim = dim
        self.num_heads = num_heads
        self.query = self.add_child('query', Linear(dim, dim, rng, bias=bias))
        self.key = self.add_child('key', Linear(dim, dim, rng, bias=bias))
        self.value = self.add_child('value', Linear(dim, dim, rng, bias=bias))
        self.out = self.add_child('out', Linear(dim, dim, rng, bias=bias))

    def _heads(self, x: Tensor) -> Tensor:
        n, length, _ = x.shape
        split = ops.reshape(x, (n, length, self.num_heads, self.dim // self.num_heads))
        return ops.transpose(split, (0, 2, 1, 3))

    def forward(self, query: Tensor, context: Tensor) -> Tensor:
        if query.ndim != 3 or context.ndim != 3 or query.shape[-1] != self.dim or context.shape[-1] != self.dim:
            raise ShapeMismatch(f"cross-attention expects N x L x {self.dim}, got {query.shape} and {context.shape}")
        n, length, _ = query.shape
        attended, _ = scaled_dot_attention(
            self._heads(self.query(query)), self._heads(self.key(context)), self._heads(self.value(context)))
        merged = ops.reshape(ops.transpose(attended, (0, 2, 1, 3)), (n, length, self.dim))
        return self.out(merged)


def layer_norm(x: Tensor, eps: float = 1e-5) -> Tensor:
    """Parameter-free normalization over the last axis"""
    centered = ops.sub(x, ops.expand(ops.mean(x, -1, keepdims=True), x.shape))
    var = ops.mean(ops.square(centered), -1, keepdims=True)
    return ops.div(centered, ops.expand(ops.sqrt(ops.add(var, eps)), x.shape))


class AlignmentModule(Module):
    """Cross-attention in both directions, fused by summation, plus the classifier"""

    def __init__(self, config: AlignConfig, rng: np.random.Generator):
        super().__init__()
        self.config = config
        d, heads, bias = config.model_dim, config.num_heads, config.attention_bias
        self.theta_to_phi = self.add_child('theta_to_phi', MultiHeadCrossAttention(d, heads, rng, bias))
        self.phi_to_theta = self.add_child('phi_to_theta', MultiHeadCrossAttention(d, heads, rng, bias))
        self.classifier = self.add_child('classifier', Linear(d, config.num_classes, rng))

    def align(self, h_theta: Tensor, h_phi: Tensor) -> Tensor:
        """
        Fuse two N x L x D token sequences into one N x D vector per sample
        """
        if h_theta.shape != h_phi.shape:
            raise ShapeMismatch(f"alignment inputs differ: {h_theta.shape} and {h_phi.shape}")
        fused = ops.add(self.theta_to_phi(h_theta, h_phi), self.phi_to_theta(h_phi, h_theta))
        if self.config.align_norm:
            fused = layer_norm(fused)
        return ops.mean(fused, 1)

    def classify(self, h_aligned: Tensor) -> Tensor:
        return self.classifier(h_aligned)

    def forward(self, h_theta: Tensor, h_phi: Tensor) -> Tensor:
        return self.classify(self.align(h_theta, h_phi))
