"""
Run directories and their records

A run directory holds run.json (config, digest, seed, versions, results),
metrics.jsonl (one object per epoch), steps.jsonl (per-step loss breakdown),
timing.jsonl (wall-clock per epoch) and the stage's checkpoints. Everything except
run.json and timing.jsonl is byte-reproducible for a given (config, seed).
"""
import json
import logging
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import scipy

from .. import __version__
from ..errors import DataError
from ..utils import atomic_write_text, ensure_run_dir
from .config import TrainConfig, config_from_dict

logger = logging.getLogger(__name__)

RUN_FILE = 'run.json'
METRICS_FILE = 'metrics.jsonl'
STEPS_FILE = 'steps.jsonl'
TIMING_FILE = 'timing.jsonl'


def versions() -> Dict[str, str]:
    return {
        'asma': __version__,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
    }


def _jsonl(rows: List[dict]) -> str:
    return ''.join(json.dumps(row, sort_keys=True) + '\n' for row in rows)


@dataclass
class RunRecord:
    """
    Everything a finished stage reports
    Attributes:
        stage: Stage name
        digest: Config digest
        seed: Experiment seed
        metrics: Per-epoch metric objects in epoch order
        checkpoints: Checkpoint file names inside the run directory
        results: Final numbers (accuracies, losses, parameter counts)
        wall_time: Seconds spent in the stage
    """

    stage: str
    digest: str
    seed: int
    metrics: List[dict] = field(default_factory=list)
    checkpoints: Dict[str, str] = field(default_factory=dict)
    results: Dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0


class RunWriter:
    """Collects metrics for one stage and keeps the run directory files current"""

    def __init__(self, run_dir: Union[str, Path], stage: str, config: TrainConfig, force: bool = False):
        self.run_dir = ensure_run_dir(run_dir, force)
        self.config = config
        self.record = RunRecord(stage=stage, digest=config.digest(), seed=config.seed)
        self.steps: List[dict] = []
        self.timing: List[dict] = []
        self.started = time.perf_counter()
        self.extra: Dict[str, Any] = {}

    def path(self, name: str) -> Path:
        return self.run_dir / name

    def log_epoch(self, stage: str, epoch: int, lr: float, losses: Dict[str, float],
                  acc: Optional[float], wall_ms: float):
        # metrics must be monotone in epoch within a stage
        self.record.metrics.append({'stage': stage, 'epoch': epoch, 'lr': lr, 'losses': losses, 'acc': acc})
        self.timing.append({'stage': stage, 'epoch': epoch, 'wall_ms': round(wall_ms, 3)})
        atomic_write_text(self.path(METRICS_FILE), _jsonl(self.record.metrics))
        atomic_write_text(self.path(TIMING_FILE), _jsonl(self.timing))

    def log_step(self, row: dict):
        self.steps.append(row)

    def flush_steps(self):
        if self.steps:
            atomic_write_text(self.path(STEPS_FILE), _jsonl(self.steps))

    def add_checkpoint(self, role: str, filename: str):
        self.record.checkpoints[role] = filename

    def finish(self, **results) -> RunRecord:
        self.record.results.update(results)
        self.record.wall_time = time.perf_counter() - self.started
        self.flush_steps()
        payload = {
            'stage': self.record.stage,
            'digest': self.record.digest,
            'seed': self.record.seed,
            'config': self.config.to_dict(),
            'versions': versions(),
            'checkpoints': self.record.checkpoints,
            'results': self.record.results,
            'wall_time_s': round(self.record.wall_time, 3),
        }
        payload.update(self.extra)
        atomic_write_text(self.path(RUN_FILE), json.dumps(payload, indent=2, sort_keys=True) + '\n')
        logger.info("%s run written to %s", self.record.stage, self.run_dir)
        return self.record


def read_run(run_dir: Union[str, Path]) -> dict:
    """Load run.json of a finished run"""
    path = Path(run_dir) / RUN_FILE
    if not path.is_file():
        raise DataError(f"{run_dir} is not a run directory (no {RUN_FILE})")
    try:
        return json.loads(path.read_text())
    except ValueError as e:
        raise DataError(f"{path} is not valid JSON: {e}")


def run_config(run_dir: Union[str, Path]) -> TrainConfig:
    return config_from_dict(read_run(run_dir)['config'])


def read_metrics(run_dir: Union[str, Path]) -> List[dict]:
    path = Path(run_dir) / METRICS_FILE
    if not path.is_file():
        return []
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]
