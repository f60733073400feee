from .spatial import (JointMaskDistribution, joint_mask_distribution, sample_masked_joints,
                      SPATIAL_MODES, HIGH_DEGREE, LOW_DEGREE, UNIFORM)
from .temporal import MotionScores, motion_scores, select_frames, random_frames, TEMPORAL_MODES
from .views import (MaskSpec, apply_masks, make_asymmetric_views, choose_joints, choose_frames,
                    THETA_CANONICAL, PHI_CANONICAL, VIEW_KEYS)

__all__ = [
    'JointMaskDistribution', 'joint_mask_distribution', 'sample_masked_joints',
    'SPATIAL_MODES', 'HIGH_DEGREE', 'LOW_DEGREE', 'UNIFORM',
    'MotionScores', 'motion_scores', 'select_frames', 'random_frames', 'TEMPORAL_MODES',
    'MaskSpec', 'apply_masks', 'make_asymmetric_views', 'choose_joints', 'choose_frames',
    'THETA_CANONICAL', 'PHI_CANONICAL', 'VIEW_KEYS',
]
