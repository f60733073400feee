"""
Joint degree versus motion statistics
"""
from typing import List, Sequence, Tuple

import numpy as np

from ..utils.tables import table_csv
from .graph import SkeletonGraph
from .sequence import SkeletonSequence

STATS_COLUMNS = ('joint_index', 'degree', 'mean_motion')


def joint_motion_stats(sequences: Sequence[SkeletonSequence], graph: SkeletonGraph) -> List[Tuple[int, int, float]]:
    """
    Per-joint degree and mean motion intensity
    Motion intensity of joint v is the mean over sequences, channels and frame
    transitions of |x[c, t+1, v] - x[c, t, v]|.
    Returns:
        Rows of (joint_index, degree, mean_motion)
    """
    totals = np.zeros(graph.num_joints)
    for seq in sequences:
        diff = np.abs(np.diff(seq.data, axis=1))
        totals += diff.mean(axis=(0, 1))
    means = totals / max(len(sequences), 1)
    return [(v, int(graph.degrees[v]), float(means[v])) for v in range(graph.num_joints)]


def stats_csv(rows: Sequence[Tuple[int, int, float]]) -> str:
    return table_csv([{'joint_index': v, 'degree': d, 'mean_motion': m} for v, d, m in rows], STATS_COLUMNS)
