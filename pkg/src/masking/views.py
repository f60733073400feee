"""
Masked view construction
The theta encoder sees high-degree joint masks and low-motion frame masks, the phi
encoder the complementary pair. Both spatial views mask the same augmented copy x',
both temporal views mask a second, independently augmented copy x^.
"""
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List

import numpy as np

from ..errors import ConfigError
from ..skeleton.augment import AugmentationSpec, augment
from ..skeleton.sequence import SkeletonSequence
from .spatial import SPATIAL_MODES, joint_mask_distribution, sample_masked_joints
from .temporal import TEMPORAL_MODES, motion_scores, random_frames, select_frames


@dataclass(frozen=True)
class MaskSpec:
    """
    How many joints and frames one encoder's views lose, and how they are picked
    Attributes:
        n_joints: Joints zeroed in the spatial view
        k_frames: Frames zeroed in the temporal view
        spatial_mode: 'HDSM', 'LDSM' or 'random'
        temporal_mode: 'HMTM', 'LMTM' or 'random'
        seed: Seed used when no generator is supplied
    """

    n_joints: int = 9
    k_frames: int = 10
    spatial_mode: str = 'HDSM'
    temporal_mode: str = 'LMTM'
    seed: int = 0

    def __post_init__(self):
        if self.spatial_mode not in SPATIAL_MODES:
            raise ConfigError(f"spatial_mode must be one of {sorted(SPATIAL_MODES)}, got '{self.spatial_mode}'")
        if self.temporal_mode not in TEMPORAL_MODES:
            raise ConfigError(f"temporal_mode must be one of {sorted(TEMPORAL_MODES)}, got '{self.temporal_mode}'")
        if self.n_joints < 0 or self.k_frames < 0:
            raise ConfigError("mask counts must be non-negative")

    def check_against(self, frames: int, joints: int):
        if not (self.n_joints < joints and self.k_frames < frames):
            raise ConfigError(
                f"mask of {self.n_joints} joints / {self.k_frames} frames does not fit {joints} joints x {frames} frames")


THETA_CANONICAL = MaskSpec(spatial_mode='HDSM', temporal_mode='LMTM')
PHI_CANONICAL = MaskSpec(spatial_mode='LDSM', temporal_mode='HMTM')


def apply_masks(x: SkeletonSequence, joints: Iterable[int], frames: Iterable[int]) -> SkeletonSequence:
    """Zero whole joint columns and whole frames; the input is left untouched"""
    data = np.array(x.data, copy=True)
    joints = sorted(joints)
    frames = sorted(frames)
    if joints:
        data[:, :, joints] = 0.0
    if frames:
        data[:, frames, :] = 0.0
    return x.with_data(data)


def choose_joints(x: SkeletonSequence, spec: MaskSpec, rng: np.random.Generator) -> FrozenSet[int]:
    dist = joint_mask_distribution(x.graph, SPATIAL_MODES[spec.spatial_mode])
    return sample_masked_joints(dist, spec.n_joints, rng)


def choose_frames(x: SkeletonSequence, spec: MaskSpec, rng: np.random.Generator) -> List[int]:
    selection = TEMPORAL_MODES[spec.temporal_mode]
    if selection == 'random':
        return random_frames(x.shape[1], spec.k_frames, rng)
    return select_frames(motion_scores(x), spec.k_frames, selection)


def make_asymmetric_views(
    x: SkeletonSequence,
    spec_theta: MaskSpec,
    spec_phi: MaskSpec,
    aug: AugmentationSpec,
    rng: np.random.Generator,
) -> Dict[str, SkeletonSequence]:
    """
    Build the anchor and the four masked views of one sample
    Returns:
        Dict with keys 'anchor', 'theta_joint', 'theta_motion', 'phi_joint', 'phi_motion'
    """
    for spec in (spec_theta, spec_phi):
        spec.check_against(x.shape[1], x.shape[2])
    x_prime = augment(x, aug, rng)
    x_hat = augment(x, aug, rng)
    views = {'anchor': x}
    for name, spec in (('theta', spec_theta), ('phi', spec_phi)):
        views[f'{name}_joint'] = apply_masks(x_prime, choose_joints(x_prime, spec, rng), ())
        views[f'{name}_motion'] = apply_masks(x_hat, (), choose_frames(x_hat, spec, rng))
    return views


VIEW_KEYS = ('anchor', 'theta_joint', 'theta_motion', 'phi_joint', 'phi_motion')
