from .module import Module, uniform_init, parameter_fingerprint
from .layers import Linear, BatchNorm
from .adjacency import normalize_adjacency, partition_adjacency
from .stgcn import EncoderConfig, StgcnEncoder, StgcnBlock, build_encoder, count_flops, layer_plan
from .projector import ProjectorConfig, ProjectorHead
from .align import AlignConfig, AlignmentModule, MultiHeadCrossAttention, scaled_dot_attention, layer_norm
from .composite import TeacherModel, EncoderClassifier, build_teacher
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint, encode_checkpoint, decode_checkpoint

__all__ = [
    'Module', 'uniform_init', 'parameter_fingerprint',
    'Linear', 'BatchNorm',
    'normalize_adjacency', 'partition_adjacency',
    'EncoderConfig', 'StgcnEncoder', 'StgcnBlock', 'build_encoder', 'count_flops', 'layer_plan',
    'ProjectorConfig', 'ProjectorHead',
    'AlignConfig', 'AlignmentModule', 'MultiHeadCrossAttention', 'scaled_dot_attention', 'layer_norm',
    'TeacherModel', 'EncoderClassifier', 'build_teacher',
    'Checkpoint', 'save_checkpoint', 'load_checkpoint', 'encode_checkpoint', 'decode_checkpoint',
]
