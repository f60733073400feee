"""
Epoch loop shared by every stage
"""
import logging
import math
import sys
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from ..autograd import Tape, Tensor, backward
from ..errors import NonFiniteLoss
from .config import StageConfig
from .data import epoch_batches
from .optim import Adam, stage_lr
from .runs import RunWriter

logger = logging.getLogger(__name__)

StepFn = Callable[[np.ndarray, int], Tuple[Tensor, Optional[Dict[str, float]]]]
EvalFn = Callable[[], float]


class StageLoop:
    """Mini-batch Adam updates over a fixed parameter list, one stage at a time"""

    def __init__(
        self,
        name: str,
        stage: StageConfig,
        params: Sequence[Tensor],
        seed: int,
        writer: Optional[RunWriter] = None,
        log_steps: bool = False,
    ):
        """
        Args:
            name: Stage label written to metrics
            stage: Epochs, batch size and schedule
            params: Parameters the optimizer updates; everything else stays frozen
            seed: Experiment seed (drives batch shuffling)
            writer: Destination for metrics, None to keep them in memory only
            log_steps: Also record the per-step loss breakdown
        """
        self.name = name
        self.stage = stage
        self.seed = seed
        self.writer = writer
        self.log_steps = log_steps
        self.optimizer = Adam(params, stage.weight_decay)
        self.history: List[dict] = []
        self.global_step = 0

    def run(self, indices: np.ndarray, step_fn: StepFn, eval_fn: Optional[EvalFn] = None,
            prepare_epoch: Optional[Callable[[int], None]] = None) -> List[dict]:
        """
        Train for the configured number of epochs
        Args:
            indices: Training sample indices
            step_fn: Builds the loss of one batch (called under an active tape)
            eval_fn: Held-out accuracy after each epoch
            prepare_epoch: Hook run before each epoch (e.g. redraw masked views)
        """
        epochs = self.stage.epochs
        show = sys.stderr.isatty()
        bar = tqdm(range(epochs), desc=self.name, disable=not show, leave=False)
        for epoch in bar:
            started = time.perf_counter()
            if prepare_epoch is not None:
                prepare_epoch(epoch)
            batches = epoch_batches(indices, self.stage.batch_size, self.seed, epoch, self.name)
            sums: Dict[str, float] = {}
            lr = self.stage.lr
            for i, batch in enumerate(batches):
                lr = stage_lr(epoch + i / len(batches), self.stage)
                loss_value, parts = self._step(batch, epoch, step_fn, lr)
                parts = dict(parts or {})
                parts.setdefault('total', loss_value)
                for key, value in parts.items():
                    sums[key] = sums.get(key, 0.0) + value
                if self.log_steps and self.writer is not None:
                    self.writer.log_step({'stage': self.name, 'step': self.global_step, **parts})
                self.global_step += 1
            losses = {key: value / max(len(batches), 1) for key, value in sums.items()}
            acc = eval_fn() if eval_fn is not None else None
            row = {'stage': self.name, 'epoch': epoch, 'lr': lr, 'losses': losses, 'acc': acc}
            self.history.append(row)
            if self.writer is not None:
                self.writer.log_epoch(self.name, epoch, lr, losses, acc, (time.perf_counter() - started) * 1000)
            bar.set_postfix(loss=f"{losses.get('total', float('nan')):.4f}")
            logger.debug("%s epoch %d: loss %.5f acc %s", self.name, epoch, losses.get('total', float('nan')), acc)
        bar.close()
        if self.writer is not None:
            self.writer.flush_steps()
        return self.history

    def _step(self, batch: np.ndarray, epoch: int, step_fn: StepFn, lr: float) -> Tuple[float, Optional[dict]]:
        self.optimizer.zero_grad()
        with Tape():
            loss, parts = step_fn(batch, epoch)
            value = loss.item()
            if not math.isfinite(value):
                raise NonFiniteLoss(f"{self.name}: loss became {value} at epoch {epoch}, step {self.global_step}")
            backward(loss)
        self.optimizer.step(lr)
        return value, parts
