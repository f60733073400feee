"""
Barlow Twins projector head
"""
from dataclasses import asdict, dataclass
from typing import List

import numpy as np

from ..autograd import Tensor, ops
from ..errors import BatchTooSmall, ConfigError
from .layers import BatchNorm, Linear
from .module import Module


@dataclass(frozen=True)
class ProjectorConfig:
    in_dim: int = 256
    hidden_dim: int = 6144
    out_dim: int = 6144
    depth: int = 3

    def __post_init__(self):
        if self.out_dim < 2:
            raise ConfigError(f"projector out_dim must be at least 2, got {self.out_dim}")
        if self.depth < 1 or self.in_dim < 1 or self.hidden_dim < 1:
            raise ConfigError("projector depth and widths must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


class ProjectorHead(Module):
    """(linear -> batch norm -> relu) x (depth - 1) -> linear"""

    def __init__(self, config: ProjectorConfig, rng: np.random.Generator):
        super().__init__()
        self.config = config
        self.hidden: List[tuple] = []
        width = config.in_dim
        for i in range(config.depth - 1):
            linear = self.add_child(f'linear{i}', Linear(width, config.hidden_dim, rng, bias=False))
            norm = self.add_child(f'bn{i}', BatchNorm(config.hidden_dim))
            self.hidden.append((linear, norm))
            width = config.hidden_dim
        self.out = self.add_child('out', Linear(width, config.out_dim, rng, bias=False))

    def forward(self, h: Tensor) -> Tensor:
        if h.shape[0] < 2:
            raise BatchTooSmall(f"projector needs a batch of at least 2, got {h.shape[0]}")
        for linear, norm in self.hidden:
            h = ops.relu(norm(linear(h)))
        return self.out(h)
