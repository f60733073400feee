"""
Training stages: pretrain, linear probe, fine-tune and distill
Each stage writes a self-contained run directory (see runs.py).
"""
import logging
from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from ..autograd import Tensor, default_dtype
from ..errors import ConfigError, DataError, LabelSpaceMismatch
from ..models.adjacency import partition_adjacency
from ..models.align import AlignConfig, AlignmentModule
from ..models.checkpoint import load_checkpoint, save_checkpoint
from ..models.composite import EncoderClassifier, TeacherModel
from ..models.layers import Linear
from ..models.module import Module, parameter_fingerprint
from ..models.projector import ProjectorConfig, ProjectorHead
from ..models.stgcn import EncoderConfig, StgcnEncoder
from ..objectives.barlow import asma_pretrain_loss
from ..objectives.classification import accuracy, cross_entropy
from ..objectives.distill import feature_distill_loss, kd_loss
from ..skeleton.graph import SkeletonGraph
from ..utils import rng_for
from .config import StageConfig, TrainConfig
from .data import DataBundle, build_views, eval_batches, prepare_data
from .loop import StageLoop
from .runs import RunRecord, RunWriter, read_run, run_config

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
EVAL_BATCH = 256
TEACHER_KIND_OF_STAGE = {'probe': 'linear_probed', 'finetune': 'fine_tuned'}


# checkpoint records: the digest in each file covers only what defines the component

def encoder_record(config: EncoderConfig, graph: SkeletonGraph) -> dict:
    return {'kind': 'encoder', 'encoder': config.to_dict(), 'joints': graph.num_joints, 'graph': graph.name}


def align_record(config: AlignConfig) -> dict:
    return {'kind': 'align', 'align': config.to_dict()}


def head_record(in_dim: int, out_dim: int) -> dict:
    return {'kind': 'linear', 'in_dim': in_dim, 'out_dim': out_dim}


def _save(writer: RunWriter, role: str, module: Module, record: dict):
    filename = f"{role}.ckpt"
    save_checkpoint(writer.path(filename), module.state_dict(), record)
    writer.add_checkpoint(role, filename)


def _load(module: Module, run_dir: PathLike, role: str, record: dict):
    run = read_run(run_dir)
    filename = run.get('checkpoints', {}).get(role)
    if filename is None:
        raise DataError(f"{run_dir} has no '{role}' checkpoint")
    module.load_state_dict(load_checkpoint(Path(run_dir) / filename, expected_config=record).state)


def _freeze(module: Module):
    module.eval()
    module.requires_grad_(False)


def predict(fn: Callable[[Tensor], Tensor], bundle: DataBundle, indices: np.ndarray) -> np.ndarray:
    """Evaluate fn over samples in fixed-size batches without recording a tape"""
    outputs = [fn(Tensor(bundle.arrays(batch))).data for batch in eval_batches(indices, EVAL_BATCH)]
    return np.concatenate(outputs, axis=0)


def encode_all(encoder: StgcnEncoder, bundle: DataBundle) -> Tuple[np.ndarray, np.ndarray]:
    """Frame tokens and pooled embeddings of every sample from a frozen encoder"""
    everything = np.arange(len(bundle.sequences))
    tokens, pooled = [], []
    for batch in eval_batches(everything, EVAL_BATCH):
        t, p = encoder(Tensor(bundle.arrays(batch)))
        tokens.append(t.data)
        pooled.append(p.data)
    return np.concatenate(tokens, axis=0), np.concatenate(pooled, axis=0)


def new_encoders(config: TrainConfig, graph: SkeletonGraph) -> Tuple[StgcnEncoder, StgcnEncoder]:
    adjacency = partition_adjacency(graph, config.encoder.spatial_kernel)
    return (StgcnEncoder(config.encoder, adjacency, rng_for(config.seed, 'init', 'encoder_theta')),
            StgcnEncoder(config.encoder, adjacency, rng_for(config.seed, 'init', 'encoder_phi')))


def load_encoders(config: TrainConfig, graph: SkeletonGraph, run_dir: PathLike) -> Tuple[StgcnEncoder, StgcnEncoder]:
    """Encoders of a previous run, checked against the current encoder config"""
    theta, phi = new_encoders(config, graph)
    record = encoder_record(config.encoder, graph)
    _load(theta, run_dir, 'encoder_theta', record)
    _load(phi, run_dir, 'encoder_phi', record)
    return theta, phi


def align_config(config: TrainConfig, num_classes: int) -> AlignConfig:
    return AlignConfig(model_dim=config.encoder.embed_dim, num_classes=num_classes,
                       num_heads=config.align.num_heads, attention_bias=config.align.attention_bias,
                       align_norm=config.align.align_norm)


def pretrain(config: TrainConfig, out_dir: PathLike, force: bool = False,
             bundle: Optional[DataBundle] = None) -> RunRecord:
    """
    Jointly train both encoders and their projectors on the asymmetric masking objective
    Labels are never read.
    """
    with default_dtype(config.dtype):
        bundle = bundle or prepare_data(config)
        writer = RunWriter(out_dir, 'pretrain', config, force)
        seed = config.seed
        enc_theta, enc_phi = new_encoders(config, bundle.graph)
        proj_cfg = ProjectorConfig(in_dim=config.encoder.embed_dim, hidden_dim=config.projector.hidden_dim,
                                   out_dim=config.projector.out_dim, depth=config.projector.depth)
        proj_theta = ProjectorHead(proj_cfg, rng_for(seed, 'init', 'projector_theta'))
        proj_phi = proj_theta if config.projector.shared else ProjectorHead(proj_cfg, rng_for(seed, 'init', 'projector_phi'))
        modules = [enc_theta, enc_phi, proj_theta] + ([] if config.projector.shared else [proj_phi])
        params = [p for m in modules for p in m.parameters()]

        views: Dict[str, np.ndarray] = {}
        rows = {int(i): r for r, i in enumerate(bundle.train_idx)}

        def prepare_epoch(epoch: int):
            if epoch == 0 or config.masking.resample_each_epoch:
                views.update(build_views(bundle, bundle.train_idx, config, epoch))

        def step(batch: np.ndarray, epoch: int):
            picks = [rows[int(i)] for i in batch]
            z = {}
            for name, encoder, projector in (('theta', enc_theta, proj_theta), ('phi', enc_phi, proj_phi)):
                for key, view in ((name, 'anchor'), (f'{name}_joint', f'{name}_joint'),
                                  (f'{name}_motion', f'{name}_motion')):
                    z[key] = projector(encoder(Tensor(views[view][picks]))[1])
            return asma_pretrain_loss(z['theta'], z['theta_joint'], z['theta_motion'],
                                      z['phi'], z['phi_joint'], z['phi_motion'], config.barlow)

        loop = StageLoop('pretrain', config.stages.pretrain, params, seed, writer, log_steps=True)
        history = loop.run(bundle.train_idx, step, prepare_epoch=prepare_epoch)

        record = encoder_record(config.encoder, bundle.graph)
        _save(writer, 'encoder_theta', enc_theta, record)
        _save(writer, 'encoder_phi', enc_phi, record)
        _save(writer, 'projector_theta', proj_theta, {'kind': 'projector', 'projector': proj_cfg.to_dict()})
        if not config.projector.shared:
            _save(writer, 'projector_phi', proj_phi, {'kind': 'projector', 'projector': proj_cfg.to_dict()})
        first, final = history[0]['losses']['total'], history[-1]['losses']['total']
        logger.info("pretrain loss %.4f -> %.4f", first, final)
        return writer.finish(first_loss=first, final_loss=final, stream=bundle.stream,
                             encoder_params=enc_theta.count_params())


def train_alignment(name: str, stage: StageConfig, enc_theta: StgcnEncoder, enc_phi: StgcnEncoder,
                    bundle: DataBundle, config: TrainConfig, writer: Optional[RunWriter]) -> Tuple[AlignmentModule, float]:
    """Train the alignment module and classifier on tokens of two frozen encoders"""
    tokens_theta, _ = encode_all(enc_theta, bundle)
    tokens_phi, _ = encode_all(enc_phi, bundle)
    labels = bundle.labels(np.arange(len(bundle.sequences)))
    align = AlignmentModule(align_config(config, bundle.num_classes), rng_for(config.seed, 'init', 'align'))

    def step(batch: np.ndarray, epoch: int):
        logits = align(Tensor(tokens_theta[batch]), Tensor(tokens_phi[batch]))
        return cross_entropy(logits, labels[batch]), None

    def held_accuracy() -> float:
        held = bundle.held_idx
        return accuracy(align(Tensor(tokens_theta[held]), Tensor(tokens_phi[held])).data, labels[held])

    history = StageLoop(name, stage, align.parameters(), config.seed, writer).run(bundle.train_idx, step, held_accuracy)
    return align, history[-1]['acc']


def train_linear_head(name: str, stage: StageConfig, features: np.ndarray, bundle: DataBundle,
                      seed: int, writer: Optional[RunWriter]) -> Tuple[Linear, float]:
    """Linear classifier on fixed per-sample features"""
    labels = bundle.labels(np.arange(len(bundle.sequences)))
    head = Linear(features.shape[1], bundle.num_classes, rng_for(seed, 'init', name))

    def step(batch: np.ndarray, epoch: int):
        return cross_entropy(head(Tensor(features[batch])), labels[batch]), None

    def held_accuracy() -> float:
        held = bundle.held_idx
        return accuracy(head(Tensor(features[held])).data, labels[held])

    history = StageLoop(name, stage, head.parameters(), seed, writer).run(bundle.train_idx, step, held_accuracy)
    return head, history[-1]['acc']


def linear_probe(config: TrainConfig, out_dir: PathLike, from_run: Optional[PathLike] = None,
                 force: bool = False, bundle: Optional[DataBundle] = None, mode: str = 'aligned',
                 random_init: bool = False) -> RunRecord:
    """
    Train a readout on frozen encoders (batch norm in eval mode)
    Args:
        from_run: Pretrain run providing encoder_theta/encoder_phi
        mode: 'aligned' trains alignment + classifier, 'single' a linear head per encoder
        random_init: Use freshly initialized encoders instead of from_run
    """
    if mode not in ('aligned', 'single'):
        raise ConfigError(f"probe mode must be 'aligned' or 'single', got '{mode}'")
    if from_run is None and not random_init:
        raise ConfigError("probe needs --from <pretrain run> or --random-init")
    with default_dtype(config.dtype):
        bundle = bundle or prepare_data(config)
        bundle.require_labels()
        writer = RunWriter(out_dir, 'probe', config, force)
        if random_init:
            enc_theta, enc_phi = new_encoders(config, bundle.graph)
        else:
            enc_theta, enc_phi = load_encoders(config, bundle.graph, from_run)
        _freeze(enc_theta)
        _freeze(enc_phi)
        before = (parameter_fingerprint(enc_theta), parameter_fingerprint(enc_phi))
        stage = config.stages.probe
        results = {'mode': mode, 'random_init': random_init, 'stream': bundle.stream,
                   'source_run': None if from_run is None else str(from_run)}
        record = encoder_record(config.encoder, bundle.graph)

        if mode == 'aligned':
            align, acc = train_alignment('probe', stage, enc_theta, enc_phi, bundle, config, writer)
            _save(writer, 'align', align, align_record(align.config))
            results['accuracy'] = acc
        else:
            for name, encoder in (('theta', enc_theta), ('phi', enc_phi)):
                _, pooled = encode_all(encoder, bundle)
                head, acc = train_linear_head(f'probe_{name}', stage, pooled, bundle, config.seed, writer)
                _save(writer, f'head_{name}', head, head_record(head.in_dim, head.out_dim))
                results[f'accuracy_{name}'] = acc
            results['accuracy'] = max(results['accuracy_theta'], results['accuracy_phi'])

        after = (parameter_fingerprint(enc_theta), parameter_fingerprint(enc_phi))
        results['encoders_frozen'] = before == after
        _save(writer, 'encoder_theta', enc_theta, record)
        _save(writer, 'encoder_phi', enc_phi, record)
        logger.info("probe accuracy %.4f", results['accuracy'])
        return writer.finish(**results)


def finetune(config: TrainConfig, out_dir: PathLike, from_run: PathLike, force: bool = False,
             bundle: Optional[DataBundle] = None) -> RunRecord:
    """
    Phase 1 trains each encoder end to end with its own linear head; phase 2 trains the
    alignment module and classifier on the tuned, frozen encoders.
    """
    with default_dtype(config.dtype):
        bundle = bundle or prepare_data(config)
        bundle.require_labels()
        writer = RunWriter(out_dir, 'finetune', config, force)
        enc_theta, enc_phi = load_encoders(config, bundle.graph, from_run)
        labels = bundle.labels(np.arange(len(bundle.sequences)))
        results = {'stream': bundle.stream, 'source_run': str(from_run)}

        for name, encoder in (('theta', enc_theta), ('phi', enc_phi)):
            model = EncoderClassifier(encoder, bundle.num_classes, rng_for(config.seed, 'init', f'head_{name}'))
            model.train()

            def step(batch: np.ndarray, epoch: int, model=model):
                return cross_entropy(model(Tensor(bundle.arrays(batch))), labels[batch]), None

            def held_accuracy(model=model) -> float:
                model.eval()
                acc = accuracy(predict(model, bundle, bundle.held_idx), labels[bundle.held_idx])
                model.train()
                return acc

            history = StageLoop(f'finetune_{name}', config.stages.finetune, model.parameters(),
                                config.seed, writer).run(bundle.train_idx, step, held_accuracy)
            results[f'accuracy_{name}'] = history[-1]['acc']
            _save(writer, f'head_{name}', model.head, head_record(model.head.in_dim, model.head.out_dim))

        _freeze(enc_theta)
        _freeze(enc_phi)
        align, acc = train_alignment('finetune_align', config.stages.finetune_align, enc_theta, enc_phi,
                                     bundle, config, writer)
        results['accuracy'] = acc
        record = encoder_record(config.encoder, bundle.graph)
        _save(writer, 'encoder_theta', enc_theta, record)
        _save(writer, 'encoder_phi', enc_phi, record)
        _save(writer, 'align', align, align_record(align.config))
        logger.info("finetune accuracy theta %.4f phi %.4f aligned %.4f",
                    results['accuracy_theta'], results['accuracy_phi'], acc)
        return writer.finish(**results)


def load_teacher(teacher_run: PathLike, graph: SkeletonGraph) -> Tuple[TeacherModel, str, TrainConfig]:
    """
    Rebuild the frozen composite teacher of a probe or fine-tune run
    Returns:
        (teacher, teacher kind, the teacher run's config)
    """
    run = read_run(teacher_run)
    kind = TEACHER_KIND_OF_STAGE.get(run.get('stage'))
    if kind is None or run.get('results', {}).get('mode', 'aligned') != 'aligned':
        raise DataError(f"{teacher_run} is not an aligned probe or fine-tune run")
    teacher_config = run_config(teacher_run)
    with default_dtype(teacher_config.dtype):
        enc_theta, enc_phi = load_encoders(teacher_config, graph, teacher_run)
        ckpt = load_checkpoint(Path(teacher_run) / run['checkpoints']['align'])
        align_cfg = AlignConfig(**ckpt.config['align'])
        align = AlignmentModule(align_cfg, rng_for(teacher_config.seed, 'init', 'align'))
        align.load_state_dict(ckpt.state)
    teacher = TeacherModel(enc_theta, enc_phi, align)
    _freeze(teacher)
    return teacher, kind, teacher_config


def new_student(config: TrainConfig, graph: SkeletonGraph, num_classes: int,
                student_config: Optional[EncoderConfig] = None) -> EncoderClassifier:
    student_config = student_config or config.student
    adjacency = partition_adjacency(graph, student_config.spatial_kernel)
    encoder = StgcnEncoder(student_config, adjacency, rng_for(config.seed, 'init', 'student'))
    return EncoderClassifier(encoder, num_classes, rng_for(config.seed, 'init', 'student_head'))


def distill_stage(config: TrainConfig, out_dir: PathLike, teacher_run: PathLike, force: bool = False,
                  bundle: Optional[DataBundle] = None, tau: Optional[float] = None,
                  student_layers: Optional[int] = None) -> RunRecord:
    """
    Train the compact student against a frozen teacher, without ground-truth labels
    Student accuracy, a linear readout on the frozen student features and the teacher's
    accuracy are reported side by side.
    """
    distill_cfg = config.distill if tau is None else replace(config.distill, tau=float(tau))
    student_cfg = config.student if student_layers is None else replace(config.student, num_layers=int(student_layers))
    config = replace(config, distill=distill_cfg, student=student_cfg)
    with default_dtype(config.dtype):
        bundle = bundle or prepare_data(config)
        bundle.require_labels()
        teacher, kind, _ = load_teacher(teacher_run, bundle.graph)
        if teacher.align.config.num_classes != bundle.num_classes:
            raise LabelSpaceMismatch(
                f"teacher predicts {teacher.align.config.num_classes} classes, data has {bundle.num_classes}")
        if kind != distill_cfg.teacher_kind:
            logger.warning("distill.teacher_kind is %s but %s holds a %s teacher; using the run",
                           distill_cfg.teacher_kind, teacher_run, kind)
        writer = RunWriter(out_dir, 'distill', config, force)
        everything = np.arange(len(bundle.sequences))
        labels = bundle.labels(everything)
        teacher_logits = predict(teacher, bundle, everything)
        teacher_acc = accuracy(teacher_logits[bundle.held_idx], labels[bundle.held_idx])

        student = new_student(config, bundle.graph, bundle.num_classes)
        student.train()
        extra_modules = []
        if distill_cfg.mode == 'logit_kl':
            def step(batch: np.ndarray, epoch: int):
                logits = student(Tensor(bundle.arrays(batch)))
                loss = kd_loss(logits, teacher_logits[batch], distill_cfg)
                return loss, {'kd_loss': loss.item(), 'tau': distill_cfg.tau}
            params = student.parameters()
        else:
            teacher_features = predict(teacher.features, bundle, everything)
            feature_proj = Linear(teacher_features.shape[1], student_cfg.embed_dim,
                                  rng_for(config.seed, 'init', 'feature_proj'))
            extra_modules.append(('feature_proj', feature_proj))

            def step(batch: np.ndarray, epoch: int):
                h_s = student.features(Tensor(bundle.arrays(batch)))
                loss = feature_distill_loss(h_s, Tensor(teacher_features[batch]), feature_proj)
                return loss, {'feature_loss': loss.item(), 'tau': distill_cfg.tau}
            params = student.encoder.parameters() + feature_proj.parameters()

        def held_accuracy() -> float:
            student.eval()
            acc = accuracy(predict(student, bundle, bundle.held_idx), labels[bundle.held_idx])
            student.train()
            return acc

        eval_fn = held_accuracy if distill_cfg.mode == 'logit_kl' else None
        StageLoop('distill', config.stages.distill, params, config.seed, writer,
                  log_steps=True).run(bundle.train_idx, step, eval_fn)

        _freeze(student)
        student_acc = held_accuracy() if distill_cfg.mode == 'logit_kl' else None
        student.eval()
        _, pooled = encode_all(student.encoder, bundle)
        readout, readout_acc = train_linear_head('readout', config.stages.readout, pooled, bundle, config.seed, writer)

        _save(writer, 'student', student, {'kind': 'student', 'encoder': student_cfg.to_dict(),
                                           'num_classes': bundle.num_classes})
        _save(writer, 'readout', readout, head_record(readout.in_dim, readout.out_dim))
        for role, module in extra_modules:
            _save(writer, role, module, head_record(module.in_dim, module.out_dim))
        student_params = student.count_params()
        teacher_params = teacher.count_params()
        writer.extra['teacher_run'] = str(teacher_run)
        logger.info("student %s / readout %.4f / teacher %.4f", student_acc, readout_acc, teacher_acc)
        return writer.finish(student_acc=student_acc, readout_acc=readout_acc, teacher_acc=teacher_acc,
                             teacher_kind=kind, tau=distill_cfg.tau, mode=distill_cfg.mode,
                             student_layers=student_cfg.num_layers, student_params=student_params,
                             teacher_params=teacher_params, param_ratio=student_params / teacher_params,
                             stream=bundle.stream)

