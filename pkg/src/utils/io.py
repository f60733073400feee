"""
File output helpers
All files are written to a temporary sibling and renamed into place
"""
import os
import tempfile
from pathlib import Path
from typing import Union

from ..errors import RunDirectoryExists

PathLike = Union[str, os.PathLike]


def atomic_write_bytes(path: PathLike, payload: bytes) -> Path:
    """
    Write bytes atomically
    Args:
        path: Destination file
        payload: Bytes to write
    Returns:
        The destination path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(payload)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode('utf-8'))


def ensure_run_dir(path: PathLike, force: bool = False) -> Path:
    """
    Create a run directory, refusing to reuse one that already holds a run
    Args:
        path: Run directory
        force: Allow overwriting an existing run
    """
    path = Path(path)
    if (path / 'run.json').exists() and not force:
        raise RunDirectoryExists(f"{path} already contains a run (use --force to overwrite)")
    path.mkdir(parents=True, exist_ok=True)
    return path
