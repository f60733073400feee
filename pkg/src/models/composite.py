"""
Whole networks assembled from encoders and heads
"""
from typing import Tuple

import numpy as np

from ..autograd import Tensor
from .align import AlignConfig, AlignmentModule
from .layers import Linear
from .module import Module
from .stgcn import EncoderConfig, StgcnEncoder


class TeacherModel(Module):
    """Two encoders, the alignment module and its classifier, used as one predictor"""

    def __init__(self, encoder_theta: StgcnEncoder, encoder_phi: StgcnEncoder, align: AlignmentModule):
        super().__init__()
        self.encoder_theta = self.add_child('encoder_theta', encoder_theta)
        self.encoder_phi = self.add_child('encoder_phi', encoder_phi)
        self.align = self.add_child('align', align)

    def features(self, x: Tensor) -> Tensor:
        """Aligned N x D representation before the classifier"""
        tokens_theta, _ = self.encoder_theta(x)
        tokens_phi, _ = self.encoder_phi(x)
        return self.align.align(tokens_theta, tokens_phi)

    def forward(self, x: Tensor) -> Tensor:
        return self.align.classify(self.features(x))


class EncoderClassifier(Module):
    """One encoder with a linear head on its pooled embedding (students, single-encoder runs)"""

    def __init__(self, encoder: StgcnEncoder, num_classes: int, rng: np.random.Generator):
        super().__init__()
        self.encoder = self.add_child('encoder', encoder)
        self.head = self.add_child('head', Linear(encoder.config.embed_dim, num_classes, rng))

    def features(self, x: Tensor) -> Tensor:
        return self.encoder(x)[1]

    def forward(self, x: Tensor) -> Tensor:
        return self.head(self.features(x))

    def forward_with_features(self, x: Tensor) -> Tuple[Tensor, Tensor]:
        pooled = self.features(x)
        return self.head(pooled), pooled


def build_teacher(config: EncoderConfig, adjacency: np.ndarray, align_config: AlignConfig,
                  rng: np.random.Generator) -> TeacherModel:
    return TeacherModel(StgcnEncoder(config, adjacency, rng), StgcnEncoder(config, adjacency, rng),
                        AlignmentModule(align_config, rng))
