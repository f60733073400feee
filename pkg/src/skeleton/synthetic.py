"""
Synthetic skeleton actions
Each class swings one limb about its root joint at a class-specific frequency and
amplitude; the rest of the body holds a rest pose. Peripheral joints therefore move
a lot while spine joints stay almost still.
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import UsageError
from .graph import SkeletonGraph
from .sequence import SkeletonSequence

logger = logging.getLogger(__name__)

# Rest pose for the 25 NTU joints (x right, y up, z forward)
NTU_REST_POSE = np.array([
    [0.00, 0.00, 0.00],    # 0 spine base
    [0.00, 0.30, 0.00],    # 1 spine mid
    [0.00, 0.60, 0.00],    # 2 neck
    [0.00, 0.75, 0.00],    # 3 head
    [-0.18, 0.52, 0.00],   # 4 left shoulder
    [-0.20, 0.28, 0.00],   # 5 left elbow
    [-0.22, 0.06, 0.00],   # 6 left wrist
    [-0.22, 0.00, 0.00],   # 7 left hand
    [0.18, 0.52, 0.00],    # 8 right shoulder
    [0.20, 0.28, 0.00],    # 9 right elbow
    [0.22, 0.06, 0.00],    # 10 right wrist
    [0.22, 0.00, 0.00],    # 11 right hand
    [-0.10, -0.05, 0.00],  # 12 left hip
    [-0.10, -0.45, 0.00],  # 13 left knee
    [-0.10, -0.85, 0.00],  # 14 left ankle
    [-0.10, -0.90, 0.10],  # 15 left foot
    [0.10, -0.05, 0.00],   # 16 right hip
    [0.10, -0.45, 0.00],   # 17 right knee
    [0.10, -0.85, 0.00],   # 18 right ankle
    [0.10, -0.90, 0.10],   # 19 right foot
    [0.00, 0.50, 0.00],    # 20 spine shoulder
    [-0.22, -0.07, 0.00],  # 21 left hand tip
    [-0.19, -0.02, 0.03],  # 22 left thumb
    [0.22, -0.07, 0.00],   # 23 right hand tip
    [0.19, -0.02, 0.03],   # 24 right thumb
]).T

# (pivot joint, swinging joints) for right arm, left arm, right leg, left leg
NTU_LIMBS: Tuple[Tuple[int, Tuple[int, ...]], ...] = (
    (8, (9, 10, 11, 23, 24)),
    (4, (5, 6, 7, 21, 22)),
    (16, (17, 18, 19)),
    (12, (13, 14, 15)),
)

JITTER_STD = 0.01


def _rest_pose(graph: SkeletonGraph) -> np.ndarray:
    if graph.num_joints == NTU_REST_POSE.shape[1]:
        return NTU_REST_POSE.copy()
    # generic graphs: joints spread along a line, limbs are leaf subtrees
    pose = np.zeros((3, graph.num_joints))
    pose[1] = -np.arange(graph.num_joints) * 0.1
    return pose


def _limbs(graph: SkeletonGraph) -> Tuple[Tuple[int, Tuple[int, ...]], ...]:
    if graph.num_joints == NTU_REST_POSE.shape[1]:
        return NTU_LIMBS
    # every non-root joint with a parent swings itself and its descendants
    parents = graph.parents or tuple([None] * graph.num_joints)
    limbs = []
    for v, p in enumerate(parents):
        if p is None:
            continue
        subtree = [u for u in range(graph.num_joints) if _is_descendant(u, v, parents)]
        limbs.append((p, tuple(subtree)))
    return tuple(limbs) or ((0, tuple(range(1, graph.num_joints))),)


def _is_descendant(u, v, parents) -> bool:
    while u is not None:
        if u == v:
            return True
        u = parents[u]
    return False


def _swing(pose: np.ndarray, pivot: int, joints: Sequence[int], angle: float) -> np.ndarray:
    """Rotate joints about the pivot in the x-y plane"""
    c, s = np.cos(angle), np.sin(angle)
    out = pose.copy()
    rel = pose[:2, list(joints)] - pose[:2, [pivot]]
    out[0, list(joints)] = pose[0, pivot] + c * rel[0] - s * rel[1]
    out[1, list(joints)] = pose[1, pivot] + s * rel[0] + c * rel[1]
    return out


def class_template(label: int, frames: int, graph: SkeletonGraph, phase: float = 0.0,
                   gain: float = 1.0) -> np.ndarray:
    """
    Noise-free motion for one class
    Args:
        label: Class index
        frames: Number of frames
        graph: Skeleton topology
        phase: Oscillation phase in radians
        gain: Amplitude multiplier
    Returns:
        Array of shape 3 x frames x V
    """
    rest = _rest_pose(graph)
    limbs = _limbs(graph)
    pivot, joints = limbs[label % len(limbs)]
    tier = label // len(limbs)
    cycles = 1.0 + tier
    amplitude = gain * (0.8 + 0.5 * tier)
    t = np.arange(frames) / frames
    angles = amplitude * 0.5 * (1.0 + np.sin(2.0 * np.pi * cycles * t + phase))
    out = np.empty((3, frames, graph.num_joints))
    for i, angle in enumerate(angles):
        out[:, i, :] = _swing(rest, pivot, joints, angle)
    return out


def generate_synthetic(classes: int, per_class: int, frames: int, graph: SkeletonGraph,
                       seed: int) -> List[SkeletonSequence]:
    """
    Generate a labeled synthetic dataset
    Args:
        classes: Number of action classes (>= 2)
        per_class: Sequences per class (>= 1)
        frames: Frames per sequence (>= 8)
        graph: Skeleton topology
        seed: Random seed; identical seeds give identical datasets
    Returns:
        Sequences ordered class by class
    """
    if classes < 2 or per_class < 1 or frames < 8:
        raise UsageError("synthetic data needs classes >= 2, per_class >= 1 and frames >= 8")
    rng = np.random.default_rng(seed)
    sequences = []
    for label in range(classes):
        for _ in range(per_class):
            phase = rng.uniform(-0.5, 0.5)
            gain = rng.uniform(0.9, 1.1)
            data = class_template(label, frames, graph, phase=phase, gain=gain)
            data = data + rng.normal(0.0, JITTER_STD, size=data.shape)
            sequences.append(SkeletonSequence(data=data, graph=graph, label=label))
    logger.debug("generated %d synthetic sequences (%d classes)", len(sequences), classes)
    return sequences
