"""
Skeleton sequences and derived input streams
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..errors import DataError, MissingParents
from .graph import SkeletonGraph

STREAMS = ('joint', 'bone', 'motion')


@dataclass(frozen=True)
class SkeletonSequence:
    """
    One person's joint coordinates over time
    Attributes:
        data: Array of shape C x T x V
        graph: Topology the joints follow
        label: Action class index, None when unlabeled
    """

    data: np.ndarray
    graph: SkeletonGraph
    label: Optional[int] = None

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim != 3:
            raise DataError(f"sequence must be C x T x V, got shape {data.shape}")
        c, t, v = data.shape
        if c < 1 or t < 2:
            raise DataError(f"sequence needs C >= 1 and T >= 2, got shape {data.shape}")
        if v != self.graph.num_joints:
            raise DataError(f"sequence has {v} joints, graph has {self.graph.num_joints}")
        if not np.all(np.isfinite(data)):
            raise DataError("sequence contains non-finite coordinates")
        data.setflags(write=False)
        object.__setattr__(self, 'data', data)

    @property
    def shape(self):
        return self.data.shape

    def with_data(self, data: np.ndarray) -> 'SkeletonSequence':
        return SkeletonSequence(data=data, graph=self.graph, label=self.label)


def derive_stream(x: SkeletonSequence, stream: str) -> SkeletonSequence:
    """
    Derive the joint, bone or motion representation of a sequence
    Args:
        x: Source sequence
        stream: 'joint', 'bone' or 'motion'
    Returns:
        Sequence of the same shape
    """
    data = x.data
    if stream == 'joint':
        return x.with_data(data)
    if stream == 'bone':
        if x.graph.parents is None:
            raise MissingParents("bone stream requires a parent map")
        out = np.zeros_like(data)
        for v, p in enumerate(x.graph.parents):
            if p is not None:
                out[:, :, v] = data[:, :, v] - data[:, :, p]
        return x.with_data(out)
    if stream == 'motion':
        out = np.zeros_like(data)
        out[:, :-1, :] = data[:, 1:, :] - data[:, :-1, :]
        return x.with_data(out)
    raise ValueError(f"unknown stream '{stream}'")


def resize_frames(data: np.ndarray, frames: int) -> np.ndarray:
    """
    Resample a C x T x V array to a new frame count by linear interpolation
    """
    c, t, v = data.shape
    if t == frames:
        return np.array(data, copy=True)
    src = np.linspace(0.0, t - 1, frames)
    lo = np.floor(src).astype(int)
    hi = np.minimum(lo + 1, t - 1)
    w = (src - lo)[None, :, None]
    return data[:, lo, :] * (1.0 - w) + data[:, hi, :] * w


def stack_batch(sequences: Sequence[SkeletonSequence]) -> np.ndarray:
    """Stack sequences into an N x C x T x V array"""
    return np.stack([s.data for s in sequences], axis=0)


def labels_of(sequences: Sequence[SkeletonSequence]) -> np.ndarray:
    return np.array([-1 if s.label is None else s.label for s in sequences], dtype=np.int64)


def num_classes(sequences: Sequence[SkeletonSequence]) -> int:
    labels = [s.label for s in sequences if s.label is not None]
    return (max(labels) + 1) if labels else 0


def derive_all(sequences: Sequence[SkeletonSequence], stream: str) -> List[SkeletonSequence]:
    return [derive_stream(s, stream) for s in sequences]
