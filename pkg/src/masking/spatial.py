"""
Degree-driven spatial masking
High-degree masking samples joints in proportion to their degree; low-degree masking
uses the complementary weights 1 - p_v, renormalized.
"""
from dataclasses import dataclass
from typing import FrozenSet

import numpy as np

from ..errors import DegenerateGraph, UsageError
from ..skeleton.graph import SkeletonGraph

HIGH_DEGREE = 'high_degree'
LOW_DEGREE = 'low_degree'
UNIFORM = 'uniform'

# spatial masking strategy -> joint distribution mode
SPATIAL_MODES = {'HDSM': HIGH_DEGREE, 'LDSM': LOW_DEGREE, 'random': UNIFORM}


@dataclass(frozen=True)
class JointMaskDistribution:
    probs: np.ndarray
    mode: str

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64, copy=True)
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("joint mask probabilities must be non-negative and sum to 1")
        probs.setflags(write=False)
        object.__setattr__(self, 'probs', probs)


def joint_mask_distribution(graph: SkeletonGraph, mode: str) -> JointMaskDistribution:
    """
    Joint masking probabilities from degree centrality
    Args:
        graph: Skeleton with degrees
        mode: 'high_degree', 'low_degree' or 'uniform'
    """
    degrees = np.asarray(graph.degrees, dtype=np.float64)
    total = degrees.sum()
    if mode == UNIFORM:
        return JointMaskDistribution(np.full(graph.num_joints, 1.0 / graph.num_joints), mode)
    if total <= 0:
        raise DegenerateGraph("all joint degrees are zero")
    high = degrees / total
    if mode == HIGH_DEGREE:
        return JointMaskDistribution(high, mode)
    if mode == LOW_DEGREE:
        low = 1.0 - high
        return JointMaskDistribution(low / low.sum(), mode)
    raise UsageError(f"unknown joint mask mode '{mode}'")


def sample_masked_joints(dist: JointMaskDistribution, n: int, rng: np.random.Generator) -> FrozenSet[int]:
    """
    Draw n distinct joints by sequential weighted sampling without replacement
    Each draw is proportional to the remaining probabilities, which are then renormalized.
    """
    probs = dist.probs.copy()
    if not (0 <= n < len(probs)):
        raise UsageError(f"cannot mask {n} of {len(probs)} joints")
    chosen = []
    for _ in range(n):
        weights = probs / probs.sum()
        u = rng.random()
        idx = int(np.searchsorted(np.cumsum(weights), u, side='right'))
        idx = min(idx, len(weights) - 1)
        # guard against landing on an exhausted joint through rounding at the tail
        while weights[idx] == 0.0:
            idx -= 1
        chosen.append(idx)
        probs[idx] = 0.0
    return frozenset(chosen)
