"""
Held-out evaluation of finished runs and score-level fusion of stream models
"""
import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from ..autograd import Tensor, default_dtype
from ..errors import DataError, LabelSpaceMismatch
from ..models.checkpoint import load_checkpoint
from ..models.layers import Linear
from ..models.stgcn import EncoderConfig
from ..objectives.classification import accuracy
from ..objectives.distill import soften
from .data import prepare_data
from .runs import read_run, run_config
from .stages import encode_all, load_teacher, new_student, predict

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _run_data(run_dir: PathLike, data_path: Optional[str]):
    config = run_config(run_dir)
    if data_path is not None:
        config = replace(config, data=replace(config.data, path=data_path))
    return config, prepare_data(config)


def evaluate(run_dir: PathLike, data_path: Optional[str] = None) -> Dict:
    """
    Class scores of a probe, fine-tune or distill run on its held-out split
    Returns:
        Dict with 'stage', 'stream', 'accuracy', 'logits' (held x classes) and 'labels'
    """
    run = read_run(run_dir)
    stage = run.get('stage')
    config, bundle = _run_data(run_dir, data_path)
    bundle.require_labels()
    held = bundle.held_idx
    with default_dtype(config.dtype):
        if stage in ('probe', 'finetune'):
            teacher, _, _ = load_teacher(run_dir, bundle.graph)
            logits = predict(teacher, bundle, held)
        elif stage == 'distill':
            ckpt = load_checkpoint(Path(run_dir) / run['checkpoints']['student'])
            student = new_student(config, bundle.graph, int(ckpt.config['num_classes']),
                                  EncoderConfig(**ckpt.config['encoder']))
            student.load_state_dict(ckpt.state)
            student.eval()
            if run['results'].get('mode') == 'feature_cosine':
                readout_ckpt = load_checkpoint(Path(run_dir) / run['checkpoints']['readout'])
                readout = Linear(readout_ckpt.config['in_dim'], readout_ckpt.config['out_dim'],
                                 np.random.default_rng(0))
                readout.load_state_dict(readout_ckpt.state)
                _, pooled = encode_all(student.encoder, bundle)
                logits = readout(Tensor(pooled[held])).data
            else:
                logits = predict(student, bundle, held)
        else:
            raise DataError(f"{run_dir} holds a '{stage}' run, which has no classifier")
    labels = bundle.labels(held)
    acc = accuracy(logits, labels)
    logger.info("%s (%s stream): accuracy %.4f on %d held-out samples", run_dir, bundle.stream, acc, len(held))
    return {'stage': stage, 'stream': bundle.stream, 'accuracy': acc, 'logits': logits, 'labels': labels}


def fuse_scores(score_sets: Sequence[np.ndarray], labels: np.ndarray) -> Dict:
    """
    Equal-weight sum of per-model class probabilities
    Args:
        score_sets: Per-model logits, each N x C
        labels: Ground-truth labels, length N
    Returns:
        Dict with 'per_model' accuracies and 'fused' accuracy
    """
    shapes = {s.shape for s in score_sets}
    if len(shapes) != 1:
        raise LabelSpaceMismatch(f"score sets disagree in shape: {sorted(shapes)}")
    probs = [soften(s, 1.0) for s in score_sets]
    fused = np.sum(probs, axis=0)
    return {
        'per_model': [accuracy(p, labels) for p in probs],
        'fused': accuracy(fused, labels),
    }


def eval_3stream(run_dirs: Sequence[PathLike], data_path: Optional[str] = None) -> Dict:
    """
    Fuse runs trained on different input streams (joint, bone, motion)
    Every run must predict the same label space over the same held-out samples.
    """
    if len(run_dirs) < 2:
        raise DataError("stream fusion needs at least two runs")
    evaluated: List[Dict] = [evaluate(r, data_path) for r in run_dirs]
    reference = evaluated[0]
    for other in evaluated[1:]:
        if other['logits'].shape != reference['logits'].shape or not np.array_equal(other['labels'], reference['labels']):
            raise LabelSpaceMismatch("runs were evaluated on different label spaces or held-out samples")
    fused = fuse_scores([e['logits'] for e in evaluated], reference['labels'])
    streams = [{'stream': e['stream'], 'run': str(run_dir), 'accuracy': acc}
               for run_dir, e, acc in zip(run_dirs, evaluated, fused['per_model'])]
    return {'streams': streams, 'fused': fused['fused']}
