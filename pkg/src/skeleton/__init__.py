from .graph import SkeletonGraph, build_ntu_graph, build_chain_graph, parents_from_root
from .sequence import SkeletonSequence, derive_stream, resize_frames, stack_batch, labels_of, num_classes
from .ntu_reader import parse_ntu_skeleton, format_ntu_skeleton, read_skeleton_file
from .synthetic import generate_synthetic
from .augment import AugmentationSpec, augment, rotate, mirror, temporal_crop_resize
from .cache import write_cache, read_cache, encode_cache, decode_cache
from .dataset import load_dataset, holdout_split
from .stats import joint_motion_stats, stats_csv

__all__ = [
    'SkeletonGraph', 'build_ntu_graph', 'build_chain_graph', 'parents_from_root',
    'SkeletonSequence', 'derive_stream', 'resize_frames', 'stack_batch', 'labels_of', 'num_classes',
    'parse_ntu_skeleton', 'format_ntu_skeleton', 'read_skeleton_file',
    'generate_synthetic',
    'AugmentationSpec', 'augment', 'rotate', 'mirror', 'temporal_crop_resize',
    'write_cache', 'read_cache', 'encode_cache', 'decode_cache',
    'load_dataset', 'holdout_split',
    'joint_motion_stats', 'stats_csv',
]
