"""
ST-GCN encoder
Stacked spatial graph convolution + temporal convolution blocks followed by a
projection of per-frame features to the embedding width.
"""
import logging
from dataclasses import asdict, dataclass
from typing import List, Tuple

import numpy as np

from ..autograd import Tensor, ops
from ..errors import ConfigError, ShapeMismatch
from ..skeleton.graph import SkeletonGraph
from .adjacency import PARTITION_COUNTS, partition_adjacency
from .layers import BatchNorm, Linear
from .module import Module, uniform_init

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EncoderConfig:
    """
    Shape of one encoder
    Attributes:
        num_layers: ST-GCN blocks
        hidden_channels: Width of the first block; doubled at each down-sampling block
        spatial_kernel: Adjacency partitions (1 uniform, 3 spatial)
        temporal_kernel: Odd temporal kernel size
        in_channels: Coordinate channels of the input
        embed_dim: Width of the output embedding
    """

    num_layers: int = 9
    hidden_channels: int = 16
    spatial_kernel: int = 1
    temporal_kernel: int = 9
    in_channels: int = 3
    embed_dim: int = 256

    def __post_init__(self):
        if self.num_layers < 1 or self.hidden_channels < 1 or self.in_channels < 1:
            raise ConfigError("encoder layer and channel counts must be positive")
        if self.temporal_kernel < 1 or self.temporal_kernel % 2 == 0:
            raise ConfigError(f"temporal_kernel must be odd, got {self.temporal_kernel}")
        if self.spatial_kernel not in PARTITION_COUNTS:
            raise ConfigError(f"spatial_kernel must be one of {PARTITION_COUNTS}, got {self.spatial_kernel}")
        if self.embed_dim < 1:
            raise ConfigError("embed_dim must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)


def layer_plan(config: EncoderConfig) -> List[Tuple[int, int, int]]:
    """
    (in_channels, out_channels, stride) per block
    Width doubles with stride 2 at blocks L*4//9 and L*7//9 (blocks 4 and 7 of 9).
    """
    downsample = {i for i in (config.num_layers * 4 // 9, config.num_layers * 7 // 9) if i > 0}
    plan = []
    cin, width = config.in_channels, config.hidden_channels
    for i in range(config.num_layers):
        stride = 1
        if i in downsample:
            width *= 2
            stride = 2
        plan.append((cin, width, stride))
        cin = width
    return plan


def _frames_after(frames: int, kernel: int, stride: int) -> int:
    pad = (kernel - 1) // 2
    return (frames + 2 * pad - kernel) // stride + 1


class StgcnBlock(Module):
    """graph_conv -> temporal conv -> batch norm -> (+ residual) -> relu"""

    def __init__(self, cin: int, cout: int, stride: int, adjacency: np.ndarray,
                 temporal_kernel: int, rng: np.random.Generator):
        super().__init__()
        self.adjacency = adjacency
        self.stride = stride
        self.residual = cin == cout and stride == 1
        k = adjacency.shape[0]
        self.gcn_weight = self.add_param('gcn_weight', uniform_init(rng, (k, cout, cin), k * cin))
        self.tcn_weight = self.add_param(
            'tcn_weight', uniform_init(rng, (cout, cout, temporal_kernel), cout * temporal_kernel))
        self.bn = self.add_child('bn', BatchNorm(cout))

    def forward(self, x: Tensor) -> Tensor:
        y = ops.graph_conv(x, self.adjacency, self.gcn_weight)
        y = ops.conv_temporal(y, self.tcn_weight, stride=self.stride)
        y = self.bn(y)
        if self.residual:
            y = ops.add(y, x)
        return ops.relu(y)


class StgcnEncoder(Module):
    """
    Encoder mapping N x C x T x V batches to frame tokens and a pooled embedding
    The adjacency is K x V x V (or V x V for one partition) and is not learned.
    """

    def __init__(self, config: EncoderConfig, adjacency: np.ndarray, rng: np.random.Generator):
        super().__init__()
        adjacency = np.asarray(adjacency, dtype=np.float64)
        if adjacency.ndim == 2:
            adjacency = adjacency[None]
        if adjacency.shape[0] != config.spatial_kernel:
            raise ConfigError(
                f"adjacency has {adjacency.shape[0]} partitions, config asks for {config.spatial_kernel}")
        self.config = config
        self.adjacency = adjacency
        self.num_joints = adjacency.shape[1]
        self.blocks: List[StgcnBlock] = []
        for i, (cin, cout, stride) in enumerate(layer_plan(config)):
            block = StgcnBlock(cin, cout, stride, adjacency, config.temporal_kernel, rng)
            self.blocks.append(self.add_child(f'block{i}', block))
        self.embed = self.add_child('embed', Linear(layer_plan(config)[-1][1], config.embed_dim, rng))

    def forward(self, x: Tensor) -> Tuple[Tensor, Tensor]:
        """
        Args:
            x: Batch N x C x T x V
        Returns:
            (tokens N x T' x embed_dim, pooled N x embed_dim)
        """
        if x.ndim != 4 or x.shape[1] != self.config.in_channels or x.shape[3] != self.num_joints:
            raise ShapeMismatch(
                f"encoder expects N x {self.config.in_channels} x T x {self.num_joints}, got {x.shape}")
        y = x
        for block in self.blocks:
            y = block(y)
        per_frame = ops.transpose(ops.mean(y, 3), (0, 2, 1))
        tokens = self.embed(per_frame)
        return tokens, ops.mean(tokens, 1)

    def count_flops(self, frames: int) -> dict:
        return count_flops(self.config, frames, self.num_joints)


def count_flops(config: EncoderConfig, frames: int, joints: int) -> dict:
    """
    Forward FLOPs per sample (multiply-accumulates x 2), split by component
    Returns:
        Dict with 'graph_conv', 'conv_temporal', 'embed' and 'total'
    """
    k, kt = config.spatial_kernel, config.temporal_kernel
    counts = {'graph_conv': 0, 'conv_temporal': 0, 'embed': 0}
    t = frames
    cout = config.in_channels
    for cin, cout, stride in layer_plan(config):
        counts['graph_conv'] += 2 * (k * cin * t * joints * joints + k * cin * cout * t * joints)
        t = _frames_after(t, kt, stride)
        counts['conv_temporal'] += 2 * cout * cout * kt * t * joints
    counts['embed'] = 2 * t * cout * config.embed_dim
    counts['total'] = sum(counts.values())
    return counts


def build_encoder(config: EncoderConfig, graph: SkeletonGraph, rng: np.random.Generator) -> StgcnEncoder:
    encoder = StgcnEncoder(config, partition_adjacency(graph, config.spatial_kernel), rng)
    logger.debug("built encoder with %d layers, %d parameters", config.num_layers, encoder.count_params())
    return encoder
