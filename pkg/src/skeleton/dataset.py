"""
Dataset loading and splitting
"""
import hashlib
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DatasetEmpty, DataError
from ..utils.workers import ordered_map
from .cache import MAGIC, read_cache
from .graph import SkeletonGraph, build_ntu_graph
from .ntu_reader import iter_skeleton_paths, read_skeleton_file
from .sequence import SkeletonSequence, resize_frames
from .synthetic import generate_synthetic

logger = logging.getLogger(__name__)

SYNTHETIC = 'synthetic'


def _is_cache(path: Path) -> bool:
    if not path.is_file():
        return False
    with open(path, 'rb') as f:
        return f.read(4) == MAGIC


def load_dataset(
    path: str,
    frames: int,
    body: str = 'first',
    graph: Optional[SkeletonGraph] = None,
    synthetic: Optional[dict] = None,
    seed: int = 0,
) -> List[SkeletonSequence]:
    """
    Load sequences from a cache file, .skeleton files or the synthetic generator
    Args:
        path: Cache file, .skeleton file, directory of .skeleton files, or "synthetic"
        frames: Frame count every sequence is resampled to
        body: 'first' keeps the first tracked body per file, 'all' keeps every body
        graph: Skeleton topology (NTU by default)
        synthetic: Generator parameters (classes, per_class) for "synthetic"
        seed: Generator seed for "synthetic"
    Returns:
        List of sequences with T == frames
    """
    graph = graph or build_ntu_graph()
    if path == SYNTHETIC:
        params = dict(synthetic or {})
        sequences = generate_synthetic(
            classes=int(params.get('classes', 4)),
            per_class=int(params.get('per_class', 50)),
            frames=frames,
            graph=graph,
            seed=int(params.get('seed', seed)),
        )
    else:
        p = Path(path)
        if not p.exists():
            raise DataError(f"dataset path {p} does not exist")
        if _is_cache(p):
            sequences = read_cache(p, graph=graph)
        else:
            files = list(iter_skeleton_paths(p))
            if not files:
                raise DatasetEmpty(f"no .skeleton files under {p}")
            logger.info("parsing %d skeleton files from %s", len(files), p)
            per_file = ordered_map(lambda f: read_skeleton_file(f, graph=graph), files)
            sequences = []
            for bodies in per_file:
                sequences.extend(bodies[:1] if body == 'first' else bodies)

    if not sequences:
        raise DatasetEmpty(f"dataset {path} holds no sequences")
    return [s if s.shape[1] == frames else s.with_data(resize_frames(s.data, frames))
            for s in sequences]


def is_holdout(index: int, ratio: float) -> bool:
    """Deterministic membership of a sample index in the held-out split"""
    h = int.from_bytes(hashlib.sha256(str(index).encode('ascii')).digest()[:8], 'little')
    return (h % 10_000) < int(round(ratio * 10_000))


def holdout_split(n: int, ratio: float = 0.2) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split sample indices into train and held-out sets by index hash
    Returns:
        (train indices, held-out indices), both ascending
    """
    held = np.array([i for i in range(n) if is_holdout(i, ratio)], dtype=np.int64)
    train = np.array([i for i in range(n) if not is_holdout(i, ratio)], dtype=np.int64)
    if len(train) < 2:
        raise DatasetEmpty(f"only {len(train)} training samples after the split")
    return train, held
