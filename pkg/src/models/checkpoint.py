"""
Checkpoint files

Little-endian layout:
    magic b'ASMC', version u16, 32-byte SHA-256 config digest,
    u32 config JSON length + UTF-8 JSON, u32 entry count, then per entry
    u16 name length, name, u8 rank, rank x u32 dims, float32 payload (row-major).

float64 state is rounded to float32 on save. Loading yields float32 arrays, which
Module.load_state_dict copies into the module's own precision, so a float64 model
restores to its float32-rounded parameters and saving it again gives the same bytes.
"""
import json
import logging
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Dict, NamedTuple, Optional, Union

import numpy as np

from ..errors import CheckpointFormatError, CheckpointMismatch
from ..utils import atomic_write_bytes, canonical_json, config_digest

logger = logging.getLogger(__name__)

MAGIC = b'ASMC'
VERSION = 1


class Checkpoint(NamedTuple):
    state: Dict[str, np.ndarray]
    config: dict
    digest: bytes


def encode_checkpoint(state: Dict[str, np.ndarray], config: dict) -> bytes:
    config_json = canonical_json(config).encode('utf-8')
    parts = [MAGIC, struct.pack('<H', VERSION), config_digest(config),
             struct.pack('<I', len(config_json)), config_json, struct.pack('<I', len(state))]
    for name, array in state.items():
        raw_name = name.encode('utf-8')
        array = np.asarray(array)
        parts.append(struct.pack('<H', len(raw_name)))
        parts.append(raw_name)
        parts.append(struct.pack('<B', array.ndim))
        parts.append(struct.pack(f'<{array.ndim}I', *array.shape))
        parts.append(np.ascontiguousarray(array, dtype='<f4').tobytes())
    return b''.join(parts)


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.payload):
            raise CheckpointFormatError("checkpoint is truncated")
        chunk = self.payload[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def decode_checkpoint(payload: bytes) -> Checkpoint:
    reader = _Reader(payload)
    if reader.take(4) != MAGIC:
        raise CheckpointFormatError("not a checkpoint file (bad magic)")
    (version,) = reader.unpack('<H')
    if version != VERSION:
        raise CheckpointFormatError(f"unsupported checkpoint version {version}")
    digest = reader.take(32)
    (config_len,) = reader.unpack('<I')
    try:
        config = json.loads(reader.take(config_len).decode('utf-8'))
    except ValueError:
        raise CheckpointFormatError("checkpoint config block is not valid JSON")
    (count,) = reader.unpack('<I')
    state = OrderedDict()
    for _ in range(count):
        (name_len,) = reader.unpack('<H')
        name = reader.take(name_len).decode('utf-8')
        (rank,) = reader.unpack('<B')
        shape = reader.unpack(f'<{rank}I') if rank else ()
        size = int(np.prod(shape)) if shape else 1
        state[name] = np.frombuffer(reader.take(4 * size), dtype='<f4').reshape(shape).astype(np.float32)
    if reader.offset != len(payload):
        raise CheckpointFormatError("trailing bytes after checkpoint entries")
    return Checkpoint(state, config, digest)


def save_checkpoint(path: Union[str, Path], state: Dict[str, np.ndarray], config: dict) -> Path:
    """
    Write a state dict with the config it was built from
    Args:
        path: Destination file
        state: Parameter and buffer arrays
        config: JSON-serializable record; its digest is stored in the header
    """
    path = atomic_write_bytes(path, encode_checkpoint(state, config))
    logger.debug("saved %d arrays to %s", len(state), path)
    return path


def load_checkpoint(path: Union[str, Path], expected_config: Optional[dict] = None) -> Checkpoint:
    """
    Read a checkpoint, optionally insisting that it was built from a given config
    Raises:
        CheckpointMismatch: The stored digest differs from the expected config's digest
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointFormatError(f"checkpoint {path} does not exist")
    ckpt = decode_checkpoint(path.read_bytes())
    if expected_config is not None and config_digest(expected_config) != ckpt.digest:
        raise CheckpointMismatch(f"{path} was saved with a different configuration")
    return ckpt
