"""
Stochastic view augmentations: temporal crop-resize, 3D rotation, mirror flip
"""
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from ..errors import ConfigError
from .sequence import SkeletonSequence, resize_frames


@dataclass(frozen=True)
class AugmentationSpec:
    """
    Parameters of the random view transform
    Attributes:
        crop_ratio_range: (lo, hi) fraction of frames kept by the temporal crop
        rotation_max_deg: Per-axis rotation bound in degrees
        flip_probability: Probability of a left-right mirror
        seed: Seed used when no generator is supplied
    """

    crop_ratio_range: Tuple[float, float] = (0.6, 1.0)
    rotation_max_deg: float = 17.0
    flip_probability: float = 0.5
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.crop_ratio_range
        if not (0.0 < lo <= hi <= 1.0):
            raise ConfigError(f"crop_ratio_range must satisfy 0 < lo <= hi <= 1, got {self.crop_ratio_range}")
        if self.rotation_max_deg < 0:
            raise ConfigError("rotation_max_deg must be >= 0")
        if not (0.0 <= self.flip_probability <= 1.0):
            raise ConfigError("flip_probability must be in [0, 1]")
        object.__setattr__(self, 'crop_ratio_range', (float(lo), float(hi)))

    @classmethod
    def identity(cls) -> 'AugmentationSpec':
        return cls(crop_ratio_range=(1.0, 1.0), rotation_max_deg=0.0, flip_probability=0.0)


def temporal_crop_resize(data: np.ndarray, ratio: float, start_fraction: float) -> np.ndarray:
    """
    Keep ceil(ratio * T) contiguous frames and stretch them back to T frames
    Args:
        data: C x T x V array
        ratio: Fraction of frames kept
        start_fraction: Position of the crop window in [0, 1)
    """
    t = data.shape[1]
    length = min(t, max(2, math.ceil(ratio * t)))
    start = min(int(start_fraction * (t - length + 1)), t - length)
    return resize_frames(data[:, start:start + length, :], t)


def rotate(data: np.ndarray, angles_deg: Sequence[float]) -> np.ndarray:
    """Rotate xyz coordinates by Euler angles (degrees, x-y-z order)"""
    if data.shape[0] != 3:
        return np.array(data, copy=True)
    matrix = Rotation.from_euler('xyz', list(angles_deg), degrees=True).as_matrix()
    return np.einsum('ij,jtv->itv', matrix, data)


def mirror(data: np.ndarray, pairs: Sequence[Tuple[int, int]]) -> np.ndarray:
    """Negate the x channel and swap symmetric joints"""
    out = np.array(data, copy=True)
    out[0] = -out[0]
    for a, b in pairs:
        out[:, :, [a, b]] = out[:, :, [b, a]]
    return out


def augment(x: SkeletonSequence, spec: AugmentationSpec, rng: np.random.Generator) -> SkeletonSequence:
    """
    Apply crop-resize, rotation and flip in that order
    Args:
        x: Input sequence
        spec: Augmentation parameters
        rng: Generator owning this call's randomness
    Returns:
        Augmented sequence with the input's shape
    """
    lo, hi = spec.crop_ratio_range
    # draws are taken unconditionally so later draws do not shift with the spec
    ratio = rng.uniform(lo, hi)
    start_fraction = rng.random()
    angles = rng.uniform(-spec.rotation_max_deg, spec.rotation_max_deg, size=3)
    flip = rng.random() < spec.flip_probability

    data = x.data
    if ratio < 1.0:
        data = temporal_crop_resize(data, ratio, start_fraction)
    if spec.rotation_max_deg > 0:
        data = rotate(data, angles)
    if flip:
        data = mirror(data, x.graph.mirror_pairs)
    return x.with_data(data)
