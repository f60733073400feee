"""Shared fixtures: float64 numerics, skeleton graphs and a tiny experiment config"""
import json

import numpy as np
import pytest

from src.autograd import default_dtype
from src.skeleton import build_chain_graph, build_ntu_graph, generate_synthetic
from src.training import TrainConfig, load_config, set_dotted

TINY_OVERRIDES = {
    'precision': 'float64',
    'data.frames': 16,
    'data.synthetic.classes': 3,
    'data.synthetic.per_class': 8,
    'masking.theta.n_joints': 3,
    'masking.theta.k_frames': 3,
    'masking.phi.n_joints': 3,
    'masking.phi.k_frames': 3,
    'encoder.num_layers': 2,
    'encoder.hidden_channels': 4,
    'encoder.temporal_kernel': 3,
    'encoder.embed_dim': 8,
    'student.num_layers': 1,
    'student.hidden_channels': 2,
    'student.temporal_kernel': 3,
    'student.embed_dim': 4,
    'projector.hidden_dim': 16,
    'projector.out_dim': 16,
    'align.num_heads': 2,
    'stages.pretrain': {'epochs': 2, 'batch_size': 8, 'lr': 0.001, 'weight_decay': 1e-05, 'warmup_epochs': 1},
    'stages.probe': {'epochs': 2, 'batch_size': 8, 'lr': 0.003, 'weight_decay': 0.0, 'warmup_epochs': 0},
    'stages.finetune': {'epochs': 1, 'batch_size': 8, 'lr': 0.001, 'weight_decay': 0.0, 'warmup_epochs': 0},
    'stages.finetune_align': {'epochs': 1, 'batch_size': 8, 'lr': 0.001, 'weight_decay': 0.0, 'warmup_epochs': 0},
    'stages.distill': {'epochs': 2, 'batch_size': 8, 'lr': 0.003, 'weight_decay': 0.0, 'warmup_epochs': 0},
    'stages.readout': {'epochs': 2, 'batch_size': 8, 'lr': 0.003, 'weight_decay': 0.0, 'warmup_epochs': 0},
}


@pytest.fixture(autouse=True)
def float64():
    with default_dtype(np.float64):
        yield


@pytest.fixture
def ntu_graph():
    return build_ntu_graph()


@pytest.fixture
def chain3():
    return build_chain_graph(3)


@pytest.fixture
def small_dataset(ntu_graph):
    return generate_synthetic(classes=4, per_class=3, frames=20, graph=ntu_graph, seed=5)


@pytest.fixture(scope='session')
def tiny_config():
    return load_config(None, dict(TINY_OVERRIDES))


@pytest.fixture
def tiny_config_file(tmp_path):
    raw = TrainConfig().to_dict()
    for key, value in TINY_OVERRIDES.items():
        set_dotted(raw, key, value)
    path = tmp_path / 'tiny.json'
    path.write_text(json.dumps(raw))
    return path
