"""
Seed derivation
Every random stream is keyed by (seed, purpose, indices...) so that results do not
depend on call order or worker count
"""
import zlib
from typing import Union

import numpy as np

Key = Union[int, str]


def _as_int(key: Key) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode('utf-8'))
    return int(key)


def rng_for(seed: int, *keys: Key) -> np.random.Generator:
    """
    Build an independent generator for a keyed purpose
    Args:
        seed: Experiment seed
        keys: Purpose tags and indices (e.g. "views", epoch, sample)
    """
    entropy = [_as_int(seed)] + [_as_int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))
