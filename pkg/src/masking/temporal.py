"""
Motion-driven temporal masking
"""
from dataclasses import dataclass
from typing import List

import numpy as np

from ..errors import UsageError
from ..skeleton.sequence import SkeletonSequence

TOP = 'top'
BOTTOM = 'bottom'

# temporal masking strategy -> frame selection
TEMPORAL_MODES = {'HMTM': TOP, 'LMTM': BOTTOM, 'random': 'random'}


@dataclass(frozen=True)
class MotionScores:
    scores: np.ndarray

    def __post_init__(self):
        scores = np.array(self.scores, dtype=np.float64, copy=True)
        if np.any(scores < 0) or not np.all(np.isfinite(scores)):
            raise ValueError("motion scores must be finite and non-negative")
        scores.setflags(write=False)
        object.__setattr__(self, 'scores', scores)

    def __len__(self):
        return len(self.scores)


def motion_scores(x: SkeletonSequence) -> MotionScores:
    """
    Per-frame motion: mean absolute displacement over channels and joints
    The last frame repeats the score of the final transition.
    """
    data = x.data
    c, t, v = data.shape
    a = np.abs(data[:, 1:, :] - data[:, :-1, :]).sum(axis=(0, 2)) / (c * v)
    return MotionScores(np.append(a, a[-1]))


def select_frames(scores: MotionScores, k: int, mode: str) -> List[int]:
    """
    Indices of the k largest ('top') or smallest ('bottom') scores
    Ties go to the lower frame index; the result is sorted ascending.
    """
    values = scores.scores
    if not (0 <= k < len(values)):
        raise UsageError(f"cannot mask {k} of {len(values)} frames")
    keys = -values if mode == TOP else values
    if mode not in (TOP, BOTTOM):
        raise UsageError(f"unknown frame selection mode '{mode}'")
    order = np.lexsort((np.arange(len(values)), keys))
    return sorted(int(i) for i in order[:k])


def random_frames(t: int, k: int, rng: np.random.Generator) -> List[int]:
    if not (0 <= k < t):
        raise UsageError(f"cannot mask {k} of {t} frames")
    return sorted(int(i) for i in rng.choice(t, size=k, replace=False))
