"""
Dataset preparation, batching and view generation for the training stages
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from ..errors import ConfigError, DataError
from ..masking.views import VIEW_KEYS, make_asymmetric_views
from ..skeleton.dataset import holdout_split, load_dataset
from ..skeleton.graph import SkeletonGraph, build_ntu_graph
from ..skeleton.sequence import SkeletonSequence, derive_all, labels_of, num_classes, stack_batch
from ..utils import ordered_map, rng_for
from .config import TrainConfig

logger = logging.getLogger(__name__)


@dataclass
class DataBundle:
    """
    One stream of a dataset with its fixed train/held-out split
    Attributes:
        sequences: Every sample, already converted to the stream
        graph: Skeleton topology
        stream: 'joint', 'bone' or 'motion'
        train_idx: Ascending indices of training samples
        held_idx: Ascending indices of held-out samples
    """

    sequences: List[SkeletonSequence]
    graph: SkeletonGraph
    stream: str
    train_idx: np.ndarray
    held_idx: np.ndarray

    @property
    def num_classes(self) -> int:
        return num_classes(self.sequences)

    def arrays(self, indices: np.ndarray) -> np.ndarray:
        return stack_batch([self.sequences[i] for i in indices])

    def labels(self, indices: np.ndarray) -> np.ndarray:
        return labels_of([self.sequences[i] for i in indices])

    def require_labels(self):
        if np.any(labels_of(self.sequences) < 0):
            raise DataError("supervised stages need an action label for every sample")
        if self.num_classes < 2:
            raise DataError(f"need at least 2 classes, found {self.num_classes}")


def prepare_data(config: TrainConfig, stream: Optional[str] = None) -> DataBundle:
    """Load the configured dataset, derive the stream and split it"""
    stream = stream or config.data.stream
    if stream == '3s':
        raise ConfigError("stream '3s' is only valid for eval-3s; train one run per stream")
    graph = build_ntu_graph()
    raw = load_dataset(
        config.data.path,
        frames=config.data.frames,
        body=config.data.body,
        graph=graph,
        synthetic={'classes': config.data.synthetic.classes, 'per_class': config.data.synthetic.per_class},
        seed=config.seed,
    )
    sequences = derive_all(raw, stream)
    train_idx, held_idx = holdout_split(len(sequences), config.data.holdout_ratio)
    logger.info("dataset: %d sequences (%d train / %d held out), stream %s",
                len(sequences), len(train_idx), len(held_idx), stream)
    return DataBundle(sequences, graph, stream, train_idx, held_idx)


def epoch_batches(indices: np.ndarray, batch_size: int, seed: int, epoch: int, tag: str) -> List[np.ndarray]:
    """
    Shuffled mini-batches for one epoch
    A trailing batch smaller than 2 is dropped (batch statistics need two samples).
    """
    order = rng_for(seed, 'shuffle', tag, epoch).permutation(len(indices))
    shuffled = np.asarray(indices)[order]
    batches = [shuffled[i:i + batch_size] for i in range(0, len(shuffled), batch_size)]
    return [b for b in batches if len(b) >= 2]


def eval_batches(indices: np.ndarray, batch_size: int) -> List[np.ndarray]:
    indices = np.asarray(indices)
    return [indices[i:i + batch_size] for i in range(0, len(indices), batch_size)]


def build_views(bundle: DataBundle, indices: np.ndarray, config: TrainConfig, epoch: int) -> Dict[str, np.ndarray]:
    """
    Anchor and masked views for the given samples, each stacked N x C x T x V
    Masks are redrawn every epoch unless masking.resample_each_epoch is off; every
    sample draws from its own (seed, epoch, index) stream.
    """
    draw_epoch = epoch if config.masking.resample_each_epoch else 0
    aug = config.augmentation()

    def views_for(i: int) -> Dict[str, SkeletonSequence]:
        rng = rng_for(config.seed, 'views', draw_epoch, int(i))
        return make_asymmetric_views(bundle.sequences[i], config.masking.theta, config.masking.phi, aug, rng)

    per_sample = ordered_map(views_for, list(indices))
    return {key: stack_batch([v[key] for v in per_sample]) for key in VIEW_KEYS}
