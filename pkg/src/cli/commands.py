"""
Subcommand handlers
Each handler takes the parsed arguments and returns the process exit code.
"""
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from ..errors import ConfigError, UsageError
from ..graphics import MaskPreviewRenderer
from ..masking import (SPATIAL_MODES, TEMPORAL_MODES, joint_mask_distribution, motion_scores,
                       sample_masked_joints, select_frames)
from ..models.checkpoint import load_checkpoint
from ..models.stgcn import EncoderConfig, count_flops
from ..skeleton import (build_ntu_graph, generate_synthetic, joint_motion_stats, load_dataset, stats_csv,
                        write_cache)
from ..training import (ablation_grid, distill_stage, eval_3stream, evaluate, finetune, linear_probe,
                        load_config, mask_count_ablation, multi_seed, parse_override, pretrain, student_depth_sweep,
                        tau_sweep)
from ..training.config import TrainConfig
from ..training.experiments import SEED_METRICS, SEED_PIPELINES
from ..utils import atomic_write_text, rng_for
from .parser import float_list, int_list

logger = logging.getLogger(__name__)

# stages whose epoch count --epochs sets, per command
EPOCH_STAGES = {
    'pretrain': ('pretrain',),
    'probe': ('probe',),
    'finetune': ('finetune', 'finetune_align'),
    'distill': ('distill', 'readout'),
    'ablate-masks': ('pretrain', 'probe'),
    'ablate-counts': ('pretrain', 'probe'),
}

# preview mode -> (masking kind, strategy)
PREVIEW_MODES = {'hdsm': ('joints', 'HDSM'), 'ldsm': ('joints', 'LDSM'),
                 'hmtm': ('frames', 'HMTM'), 'lmtm': ('frames', 'LMTM')}

BUFFER_SUFFIXES = ('running_mean', 'running_var')


def banner(title: str, lines: Sequence[str] = ()):
    print("=" * 60)
    print(title)
    print("=" * 60)
    for line in lines:
        print(line)
    if lines:
        print("=" * 60)
    print()


def resolve_config(args) -> TrainConfig:
    """Preset file, then --set overrides, then dedicated flags"""
    overrides: Dict[str, object] = {}
    for text in args.overrides:
        key, value = parse_override(text)
        overrides[key] = value
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.epochs is not None:
        stages = SEED_PIPELINES[args.stage] if args.command == 'seeds' else EPOCH_STAGES[args.command]
        for stage in stages:
            overrides[f'stages.{stage}.epochs'] = args.epochs
    if args.data is not None:
        overrides['data.path'] = args.data
    if args.stream is not None:
        overrides['data.stream'] = args.stream
    if args.no_center:
        overrides['barlow.center'] = False
    if args.align_norm:
        overrides['align.align_norm'] = True
    for key, value in getattr(args, 'extra_overrides', {}).items():
        overrides[key] = value
    return load_config(args.config, overrides)


def _run_lines(config: TrainConfig, args) -> List[str]:
    return [
        f"Config: {args.config or '(built-in defaults)'}",
        f"Data: {config.data.path} ({config.data.stream} stream, {config.data.frames} frames)",
        f"Seed: {config.seed}",
        f"Precision: {config.precision}",
        f"Output: {args.out}",
    ]


def _print_results(results: Dict):
    for key in sorted(results):
        value = results[key]
        if isinstance(value, float):
            value = f"{value:.4f}"
        print(f"  {key}: {value}")


# data

def cmd_data_stats(args) -> int:
    graph = build_ntu_graph()
    sequences = load_dataset(args.path, args.frames, body=args.body, graph=graph, seed=args.seed)
    text = stats_csv(joint_motion_stats(sequences, graph))
    if args.out:
        atomic_write_text(args.out, text)
        print(f"Wrote statistics of {len(sequences)} sequences to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_data_synth(args) -> int:
    graph = build_ntu_graph()
    sequences = generate_synthetic(args.classes, args.per_class, args.frames, graph, args.seed)
    path = write_cache(Path(args.out) / 'synthetic.asma', sequences)
    print(f"Wrote {len(sequences)} sequences ({args.classes} classes) to {path}")
    return 0


def cmd_data_cache(args) -> int:
    sequences = load_dataset(args.path, args.frames, body=args.body)
    path = write_cache(args.out, sequences)
    print(f"Wrote {len(sequences)} sequences to {path}")
    return 0


# masking

def preview_rows(sequences, mode: str, n: int, k: int, seed: int) -> List[Dict]:
    """Joints or frames each sequence would lose under one masking strategy"""
    kind, strategy = PREVIEW_MODES[mode]
    rows = []
    for i, seq in enumerate(sequences):
        row = {'index': i, 'label': seq.label, 'mode': mode}
        if kind == 'joints':
            dist = joint_mask_distribution(seq.graph, SPATIAL_MODES[strategy])
            row['joints'] = sorted(sample_masked_joints(dist, n, rng_for(seed, 'preview', i)))
        else:
            row['frames'] = select_frames(motion_scores(seq), k, TEMPORAL_MODES[strategy])
        rows.append(row)
    return rows


def cmd_mask_preview(args) -> int:
    sequences = load_dataset(args.dataset, args.frames, seed=args.seed)
    if args.limit is not None:
        sequences = sequences[:args.limit]
    rows = preview_rows(sequences, args.mode, args.n, args.k, args.seed)
    for row in rows:
        sys.stdout.write(json.dumps(row, sort_keys=True) + '\n')
    if args.png and rows:
        seq = sequences[0]
        renderer = MaskPreviewRenderer()
        img = renderer.render(args.mode.upper(), seq.shape[2], seq.shape[1],
                              joints=rows[0].get('joints', ()), frames=rows[0].get('frames', ()),
                              degrees=list(seq.graph.degrees), motion=list(motion_scores(seq).scores))
        renderer.save(img, args.png, scale=4)
        logger.info("mask preview written to %s", args.png)
    return 0


# stages

def cmd_pretrain(args) -> int:
    config = resolve_config(args)
    banner("ASMa pretraining", _run_lines(config, args) + [
        f"Masks: theta {config.masking.theta.spatial_mode}+{config.masking.theta.temporal_mode}, "
        f"phi {config.masking.phi.spatial_mode}+{config.masking.phi.temporal_mode}",
        f"Epochs: {config.stages.pretrain.epochs}",
    ])
    record = pretrain(config, args.out, args.force)
    print("Pretraining finished")
    _print_results(record.results)
    return 0


def cmd_probe(args) -> int:
    config = resolve_config(args)
    mode = 'single' if args.single else 'aligned'
    source = 'random init' if args.random_init else args.from_run
    banner("Linear probe", _run_lines(config, args) + [f"Encoders: {source}", f"Mode: {mode}"])
    record = linear_probe(config, args.out, args.from_run, args.force, mode=mode, random_init=args.random_init)
    print("Probe finished")
    _print_results(record.results)
    return 0


def cmd_finetune(args) -> int:
    config = resolve_config(args)
    banner("Fine-tuning", _run_lines(config, args) + [f"Encoders: {args.from_run}"])
    record = finetune(config, args.out, args.from_run, args.force)
    print("Fine-tuning finished")
    _print_results(record.results)
    return 0


def cmd_distill(args) -> int:
    extra = {}
    if args.tau is not None:
        extra['distill.tau'] = args.tau
    if args.student_tau is not None:
        extra['distill.student_tau'] = args.student_tau
    if args.mode is not None:
        extra['distill.mode'] = args.mode
    args.extra_overrides = extra
    config = resolve_config(args)
    if args.tau_sweep is not None and args.student_layers_sweep is not None:
        raise UsageError("--tau-sweep and --student-layers-sweep are separate experiments; pick one")
    banner("Knowledge distillation", _run_lines(config, args) + [
        f"Teacher: {args.teacher}",
        f"Mode: {config.distill.mode}, tau {config.distill.tau:g}",
        f"Student: {config.student.num_layers} layers",
    ])
    if args.tau_sweep is not None:
        taus = float_list(args.tau_sweep) or list(config.experiments.taus)
        rows = tau_sweep(config, args.out, args.teacher, taus, args.force)
        print(f"Temperature sweep written to {Path(args.out) / 'tau_sweep.csv'}")
        for row in rows:
            print(f"  tau {row['tau']:g}: student {row['student_acc']}, readout {row['readout_acc']:.4f}")
        return 0
    if args.student_layers_sweep is not None:
        layers = int_list(args.student_layers_sweep) or list(config.experiments.student_layers)
        rows = student_depth_sweep(config, args.out, args.teacher, layers, args.force)
        print(f"Student depth sweep written to {Path(args.out) / 'student_depth.csv'}")
        for row in rows:
            print(f"  {row['layers']} layers ({row['student_params']} params): readout {row['readout_acc']:.4f}")
        return 0
    record = distill_stage(config, args.out, args.teacher, args.force)
    print("Distillation finished")
    _print_results(record.results)
    return 0


# evaluation

def cmd_eval(args) -> int:
    result = evaluate(args.run, args.data)
    summary = {k: result[k] for k in ('stage', 'stream', 'accuracy')}
    summary['samples'] = int(len(result['labels']))
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_eval_3s(args) -> int:
    result = eval_3stream([args.joint, args.bone, args.motion], args.data)
    print(json.dumps(result, sort_keys=True, indent=2))
    return 0


# experiments

def cmd_ablate_masks(args) -> int:
    config = resolve_config(args)
    seeds = args.seeds or [config.seed]
    banner("Masking ablation", _run_lines(config, args) + [f"Seeds: {seeds}"])
    rows = ablation_grid(config, args.out, seeds, args.force)
    print(f"{len(rows)} cells written to {Path(args.out) / 'ablation.csv'}")
    for row in rows:
        print(f"  {row['spatial']:>6} + {row['temporal']:<6} seed {row['seed']}: {row['probe_acc']:.4f}")
    return 0


def cmd_ablate_counts(args) -> int:
    config = resolve_config(args)
    joints = args.joints or list(config.experiments.mask_joints)
    frames = args.frames or list(config.experiments.mask_frames)
    seeds = args.seeds or [config.seed]
    banner("Mask count ablation", _run_lines(config, args) + [f"Joints: {joints}", f"Frames: {frames}"])
    rows = mask_count_ablation(config, args.out, joints, frames, seeds, args.force)
    print(f"{len(rows)} cells written to {Path(args.out) / 'mask_counts.csv'}")
    return 0


def cmd_seeds(args) -> int:
    config = resolve_config(args)
    seeds = args.seed_list or list(config.experiments.seeds)
    banner("Multi-seed run", _run_lines(config, args) + [f"Stage: {args.stage}", f"Seeds: {seeds}"])
    summary = multi_seed(config, args.out, seeds, args.stage, args.force)
    for key in SEED_METRICS[args.stage]:
        stats = summary[key]
        if stats is None:
            print(f"{key}: not available")
            continue
        print(f"{key}: mean {stats['mean']:.4f}, std {stats['std']:.4f} "
              f"(min {stats['min']:.4f}, max {stats['max']:.4f})")
    return 0


# models

def checkpoint_info(path, frames: int) -> Dict:
    """Parameter counts of a checkpoint, plus FLOPs when it holds an encoder"""
    ckpt = load_checkpoint(path)
    params = int(sum(v.size for k, v in ckpt.state.items() if not k.endswith(BUFFER_SUFFIXES)))
    info = {
        'path': str(path),
        'kind': ckpt.config.get('kind'),
        'digest': ckpt.digest.hex(),
        'entries': len(ckpt.state),
        'params': params,
    }
    if 'encoder' in ckpt.config:
        encoder = EncoderConfig(**ckpt.config['encoder'])
        joints = int(ckpt.config.get('joints', build_ntu_graph().num_joints))
        info['encoder'] = encoder.to_dict()
        info['flops'] = count_flops(encoder, frames, joints)
        info['frames'] = frames
    return info


def cmd_model_info(args) -> int:
    if args.frames < 1:
        raise ConfigError("--frames must be positive")
    info = checkpoint_info(args.checkpoint, args.frames)
    banner(f"Checkpoint {args.checkpoint}", [
        f"Kind: {info['kind']}",
        f"Parameters: {info['params']:,}",
        f"Config digest: {info['digest']}",
    ])
    if 'flops' in info:
        flops = info['flops']
        print(f"FLOPs per sample ({args.frames} frames):")
        for key in ('graph_conv', 'conv_temporal', 'embed', 'total'):
            print(f"  {key}: {flops[key]:,}")
    return 0


HANDLERS = {
    ('data', 'stats'): cmd_data_stats,
    ('data', 'synth'): cmd_data_synth,
    ('data', 'cache'): cmd_data_cache,
    ('mask', 'preview'): cmd_mask_preview,
    ('model', 'info'): cmd_model_info,
    'pretrain': cmd_pretrain,
    'probe': cmd_probe,
    'finetune': cmd_finetune,
    'distill': cmd_distill,
    'eval': cmd_eval,
    'eval-3s': cmd_eval_3s,
    'ablate-masks': cmd_ablate_masks,
    'ablate-counts': cmd_ablate_counts,
    'seeds': cmd_seeds,
}


def dispatch(args) -> int:
    action = getattr(args, f"{args.command}_command", None)
    handler = HANDLERS[(args.command, action)] if action else HANDLERS[args.command]
    return handler(args)
