"""
Experiment grids built from the stages: masking ablations, multi-seed statistics,
temperature and student-depth sweeps
"""
import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ConfigError
from ..utils import atomic_write_text, ensure_run_dir, write_table
from .config import TrainConfig
from .data import DataBundle, prepare_data
from .stages import distill_stage, finetune, linear_probe, pretrain

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SPATIAL_ORDER = ('HDSM', 'LDSM', 'random')
TEMPORAL_ORDER = ('HMTM', 'LMTM', 'random')
ABLATION_COLUMNS = ('spatial', 'temporal', 'seed', 'probe_acc')
COUNT_COLUMNS = ('n_joints', 'k_frames', 'seed', 'probe_acc')
TAU_COLUMNS = ('tau', 'student_acc', 'readout_acc', 'teacher_acc')
DEPTH_COLUMNS = ('layers', 'tau', 'student_params', 'student_acc', 'readout_acc')


class _BundleCache:
    """Datasets depend on the seed (synthetic data), so load each seed once"""

    def __init__(self):
        self.bundles: Dict[int, DataBundle] = {}

    def get(self, config: TrainConfig) -> DataBundle:
        if config.seed not in self.bundles:
            self.bundles[config.seed] = prepare_data(config)
        return self.bundles[config.seed]


def pretrain_and_probe(config: TrainConfig, cell_dir: Path, bundle: DataBundle, force: bool) -> Dict:
    pre = pretrain(config, cell_dir / 'pretrain', force, bundle)
    probe = linear_probe(config, cell_dir / 'probe', cell_dir / 'pretrain', force, bundle)
    return {'final_loss': pre.results['final_loss'], 'probe_acc': probe.results['accuracy']}


def _seeds(config: TrainConfig, seeds: Optional[Sequence[int]]) -> List[int]:
    return [config.seed] if not seeds else [int(s) for s in seeds]


def ablation_grid(config: TrainConfig, out_dir: PathLike, seeds: Optional[Sequence[int]] = None,
                  force: bool = False) -> List[Dict]:
    """
    Pretrain + probe for every (spatial, temporal) masking pair, applied to both encoders
    Writes ablation.csv with columns spatial,temporal,seed,probe_acc.
    """
    out = ensure_run_dir(out_dir, force)
    cache = _BundleCache()
    rows = []
    for seed in _seeds(config, seeds):
        for spatial in SPATIAL_ORDER:
            for temporal in TEMPORAL_ORDER:
                cell = replace(config.with_masks(spatial, temporal), seed=seed)
                logger.info("ablation cell %s + %s (seed %d)", spatial, temporal, seed)
                result = pretrain_and_probe(cell, out / f"{spatial}_{temporal}_seed{seed}", cache.get(cell), force)
                rows.append({'spatial': spatial, 'temporal': temporal, 'seed': seed, 'probe_acc': result['probe_acc']})
                write_table(out / 'ablation.csv', rows, ABLATION_COLUMNS)
    return rows


def count_cells(config: TrainConfig, joints: Sequence[int], frames: Sequence[int]) -> List[Tuple[int, int, TrainConfig]]:
    """(n, k, config) per grid cell with the canonical mask pairs; invalid counts raise before anything trains"""
    cells = []
    for n in joints:
        for k in frames:
            masking = replace(config.masking,
                              theta=replace(config.masking.theta, n_joints=int(n), k_frames=int(k)),
                              phi=replace(config.masking.phi, n_joints=int(n), k_frames=int(k)))
            cells.append((int(n), int(k), replace(config, masking=masking)))
    return cells


def mask_count_ablation(config: TrainConfig, out_dir: PathLike, joints: Sequence[int], frames: Sequence[int],
                        seeds: Optional[Sequence[int]] = None, force: bool = False) -> List[Dict]:
    """Pretrain + probe over a grid of masked joint and frame counts with the canonical mask pairs"""
    cells = count_cells(config, joints, frames)
    out = ensure_run_dir(out_dir, force)
    cache = _BundleCache()
    rows = []
    for seed in _seeds(config, seeds):
        for n, k, cell in cells:
            cell = replace(cell, seed=seed)
            result = pretrain_and_probe(cell, out / f"n{n}_k{k}_seed{seed}", cache.get(cell), force)
            rows.append({'n_joints': n, 'k_frames': k, 'seed': seed, 'probe_acc': result['probe_acc']})
            write_table(out / 'mask_counts.csv', rows, COUNT_COLUMNS)
    return rows


def summarize(values: Sequence[float]) -> Dict[str, float]:
    """Mean, sample standard deviation, min and max"""
    arr = np.asarray(values, dtype=np.float64)
    return {
        'mean': float(arr.mean()),
        'std': float(arr.std(ddof=1)) if len(arr) > 1 else 0.0,
        'min': float(arr.min()),
        'max': float(arr.max()),
    }


# stages each multi-seed pipeline trains, ending with the stage being repeated
SEED_PIPELINES = {
    'pretrain': ('pretrain',),
    'probe': ('pretrain', 'probe'),
    'finetune': ('pretrain', 'finetune', 'finetune_align'),
    'distill': ('pretrain', 'probe', 'distill', 'readout'),
}
SEED_METRICS = {
    'pretrain': ('final_loss',),
    'probe': ('final_loss', 'probe_acc'),
    'finetune': ('final_loss', 'finetune_acc'),
    'distill': ('final_loss', 'teacher_acc', 'student_acc', 'readout_acc'),
}


def _check_seed_stage(stage: str):
    if stage not in SEED_PIPELINES:
        raise ConfigError(f"multi-seed stage must be one of {sorted(SEED_PIPELINES)}, got '{stage}'")


def run_seed_pipeline(stage: str, config: TrainConfig, run_dir: Path, bundle: DataBundle, force: bool) -> Dict:
    """Train one seed up to and including `stage`; returns that seed's final metrics"""
    _check_seed_stage(stage)
    pre = pretrain(config, run_dir / 'pretrain', force, bundle)
    result = {'final_loss': pre.results['final_loss']}
    if stage in ('probe', 'distill'):
        probe = linear_probe(config, run_dir / 'probe', run_dir / 'pretrain', force, bundle)
        result['probe_acc'] = probe.results['accuracy']
    if stage == 'finetune':
        tuned = finetune(config, run_dir / 'finetune', run_dir / 'pretrain', force, bundle)
        result['finetune_acc'] = tuned.results['accuracy']
    if stage == 'distill':
        kd = distill_stage(config, run_dir / 'distill', run_dir / 'probe', force, bundle)
        result.update({k: kd.results[k] for k in ('teacher_acc', 'student_acc', 'readout_acc')})
    return result


def multi_seed(config: TrainConfig, out_dir: PathLike, seeds: Sequence[int], stage: str = 'probe',
               force: bool = False) -> Dict:
    """
    Repeat a stage (with the stages it builds on) per seed and report statistics of the final numbers
    Writes seeds.csv (one row per run) and summary.json.
    Args:
        stage: 'pretrain', 'probe', 'finetune' or 'distill'
    """
    if len(seeds) < 2:
        raise ConfigError("multi-seed runs need at least 2 seeds")
    _check_seed_stage(stage)
    out = ensure_run_dir(out_dir, force)
    cache = _BundleCache()
    metrics = SEED_METRICS[stage]
    rows = []
    for i, seed in enumerate(seeds):
        cell = replace(config, seed=int(seed))
        result = run_seed_pipeline(stage, cell, out / f"run{i}_seed{seed}", cache.get(cell), force)
        rows.append({'run': i, 'seed': int(seed), **{k: result.get(k) for k in metrics}})
        write_table(out / 'seeds.csv', rows, ('run', 'seed') + metrics)
    summary = {'stage': stage, 'seeds': [int(s) for s in seeds]}
    for key in metrics:
        values = [r[key] for r in rows if r[key] is not None]
        # feature distillation has no student logits
        summary[key] = summarize(values) if values else None
    atomic_write_text(out / 'summary.json', json.dumps(summary, indent=2, sort_keys=True) + '\n')
    return summary


def tau_sweep(config: TrainConfig, out_dir: PathLike, teacher_run: PathLike, taus: Sequence[float],
              force: bool = False) -> List[Dict]:
    """Distill once per temperature from the same teacher; writes tau_sweep.csv"""
    out = ensure_run_dir(out_dir, force)
    bundle = prepare_data(config)
    rows = []
    for tau in taus:
        record = distill_stage(config, out / f"tau{tau:g}", teacher_run, force, bundle, tau=tau)
        rows.append({'tau': float(tau), **{k: record.results[k] for k in ('student_acc', 'readout_acc', 'teacher_acc')}})
        write_table(out / 'tau_sweep.csv', rows, TAU_COLUMNS)
    return rows


def student_depth_sweep(config: TrainConfig, out_dir: PathLike, teacher_run: PathLike, layers: Sequence[int],
                        force: bool = False) -> List[Dict]:
    """Distill students of different depth from the same teacher; writes student_depth.csv"""
    out = ensure_run_dir(out_dir, force)
    bundle = prepare_data(config)
    rows = []
    for depth in layers:
        record = distill_stage(config, out / f"layers{depth}", teacher_run, force, bundle, student_layers=depth)
        rows.append({'layers': int(depth), 'tau': record.results['tau'],
                     'student_params': record.results['student_params'],
                     'student_acc': record.results['student_acc'], 'readout_acc': record.results['readout_acc']})
        write_table(out / 'student_depth.csv', rows, DEPTH_COLUMNS)
    return rows

