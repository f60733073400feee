"""
Binary dataset cache

Little-endian layout:
    magic   4 bytes  b"ASMA"
    version u16
    C T V N u32 each
    N records: label i32 (-1 when unlabeled), then C*T*V float32 values
               ordered channel-major, then frame, joints fastest
"""
import struct
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from ..errors import CacheFormatError, DatasetEmpty
from ..utils.io import atomic_write_bytes
from .graph import SkeletonGraph, build_ntu_graph, build_chain_graph
from .sequence import SkeletonSequence

MAGIC = b'ASMA'
VERSION = 1
HEADER = struct.Struct('<4sHIIII')


def encode_cache(sequences: Sequence[SkeletonSequence]) -> bytes:
    if not sequences:
        raise DatasetEmpty("cannot cache an empty dataset")
    c, t, v = sequences[0].shape
    parts = [HEADER.pack(MAGIC, VERSION, c, t, v, len(sequences))]
    for seq in sequences:
        if seq.shape != (c, t, v):
            raise CacheFormatError(f"all cached sequences must share one shape, got {seq.shape} and {(c, t, v)}")
        label = -1 if seq.label is None else int(seq.label)
        parts.append(struct.pack('<i', label))
        parts.append(np.ascontiguousarray(seq.data, dtype='<f4').tobytes())
    return b''.join(parts)


def decode_cache(payload: bytes, graph: Optional[SkeletonGraph] = None) -> List[SkeletonSequence]:
    if len(payload) < HEADER.size:
        raise CacheFormatError("cache file is shorter than its header")
    magic, version, c, t, v, n = HEADER.unpack_from(payload, 0)
    if magic != MAGIC:
        raise CacheFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CacheFormatError(f"unsupported cache version {version}")
    if graph is None:
        graph = build_ntu_graph() if v == 25 else build_chain_graph(v)
    record = 4 + 4 * c * t * v
    if len(payload) != HEADER.size + n * record:
        raise CacheFormatError(f"cache holds {len(payload) - HEADER.size} payload bytes, expected {n * record}")
    sequences = []
    offset = HEADER.size
    for _ in range(n):
        (label,) = struct.unpack_from('<i', payload, offset)
        values = np.frombuffer(payload, dtype='<f4', count=c * t * v, offset=offset + 4)
        sequences.append(SkeletonSequence(
            data=values.reshape(c, t, v).astype(np.float64),
            graph=graph,
            label=None if label < 0 else label,
        ))
        offset += record
    return sequences


def write_cache(path: Union[str, Path], sequences: Sequence[SkeletonSequence]) -> Path:
    return atomic_write_bytes(path, encode_cache(sequences))


def read_cache(path: Union[str, Path], graph: Optional[SkeletonGraph] = None) -> List[SkeletonSequence]:
    return decode_cache(Path(path).read_bytes(), graph=graph)
