"""Adjacency, ST-GCN encoder, projector, cross-attention alignment and checkpoints"""
import math
from pathlib import Path

import numpy as np
import pytest

from src.autograd import Tensor, default_dtype, gradcheck, ops
from src.errors import (BatchTooSmall, CheckpointFormatError, CheckpointMismatch, ConfigError, DegenerateGraph,
                        ShapeMismatch)
from src.models import (AlignConfig, AlignmentModule, EncoderClassifier, EncoderConfig, Linear, MultiHeadCrossAttention,
                        ProjectorConfig, ProjectorHead, StgcnBlock, build_encoder, build_teacher,
                        count_flops, decode_checkpoint, encode_checkpoint, layer_plan, load_checkpoint,
                        normalize_adjacency, parameter_fingerprint, partition_adjacency, save_checkpoint,
                        scaled_dot_attention)
from src.objectives import BarlowLossConfig, asma_pretrain_loss
from src.skeleton import SkeletonGraph, build_chain_graph
from src.training import load_config

DESK = Path(__file__).parent / 'config' / 'desk.json'


def small_encoder(graph, **kwargs):
    config = EncoderConfig(**{'num_layers': 3, 'hidden_channels': 4, 'temporal_kernel': 3, 'embed_dim': 8, **kwargs})
    return build_encoder(config, graph, np.random.default_rng(0))


def batch(n=2, t=12, v=25, seed=0):
    return Tensor(np.random.default_rng(seed).normal(size=(n, 3, t, v)))


# adjacency

def test_single_joint_adjacency():
    np.testing.assert_allclose(normalize_adjacency(SkeletonGraph(num_joints=1, edges=())), [[1.0]])


def test_two_joint_adjacency():
    np.testing.assert_allclose(normalize_adjacency(build_chain_graph(2)), np.full((2, 2), 0.5))


def test_disconnected_graph_is_rejected():
    graph = SkeletonGraph(num_joints=3, edges=((0, 1),))
    with pytest.raises(DegenerateGraph):
        normalize_adjacency(graph)
    assert normalize_adjacency(graph, require_connected=False)[2, 2] == 1.0


def test_adjacency_is_symmetric(ntu_graph):
    a = normalize_adjacency(ntu_graph)
    np.testing.assert_allclose(a, a.T)


def test_spatial_partitions_sum_to_uniform(ntu_graph):
    parts = partition_adjacency(ntu_graph, 3)
    assert parts.shape == (3, 25, 25)
    np.testing.assert_allclose(parts.sum(axis=0), normalize_adjacency(ntu_graph))
    # the self loop of every joint is in the root group
    np.testing.assert_allclose(np.diag(parts[0]), np.diag(normalize_adjacency(ntu_graph)))


def test_ntu_adjacency_has_unit_spectral_radius(ntu_graph):
    a = normalize_adjacency(ntu_graph)
    v = np.random.default_rng(0).random(25) + 0.1
    for _ in range(20_000):
        v = a @ v
        v /= np.linalg.norm(v)
    assert float(v @ a @ v) == pytest.approx(1.0, abs=1e-6)


def test_unsupported_partition_count(ntu_graph):
    with pytest.raises(ConfigError):
        partition_adjacency(ntu_graph, 2)


# layers and encoder

def test_linear_parameter_count():
    assert Linear(3, 4, np.random.default_rng(0)).count_params() == 16


def test_linear_zero_input_gives_bias():
    layer = Linear(3, 4, np.random.default_rng(0))
    layer.bias.data[...] = [1.0, 2.0, 3.0, 4.0]
    out = layer(Tensor(np.zeros((5, 3)))).data
    np.testing.assert_allclose(out, np.tile([1.0, 2.0, 3.0, 4.0], (5, 1)))


def test_layer_plan_doubles_width():
    plan = layer_plan(EncoderConfig())
    assert [stride for _, _, stride in plan] == [1, 1, 1, 1, 2, 1, 1, 2, 1]
    assert plan[-1][1] == 64
    assert plan[0][0] == 3


def test_encoder_output_shapes(ntu_graph):
    encoder = small_encoder(ntu_graph)
    tokens, pooled = encoder(batch())
    # blocks 1 and 2 halve the frame axis: 12 -> 6 -> 3
    assert tokens.shape == (2, 3, 8)
    assert pooled.shape == (2, 8)
    np.testing.assert_allclose(pooled.data, tokens.data.mean(axis=1))


def test_encoder_with_spatial_partitions(ntu_graph):
    encoder = small_encoder(ntu_graph, spatial_kernel=3)
    assert encoder.blocks[0].gcn_weight.shape == (3, 4, 3)
    assert encoder(batch())[1].shape == (2, 8)


def test_encoder_rejects_wrong_joint_count(ntu_graph):
    with pytest.raises(ShapeMismatch):
        small_encoder(ntu_graph)(batch(v=24))


def test_encoder_zero_input_gives_zero_output(ntu_graph):
    encoder = small_encoder(ntu_graph).eval()
    tokens, pooled = encoder(Tensor(np.zeros((2, 3, 12, 25))))
    np.testing.assert_allclose(pooled.data, 0.0)


def test_isolated_joint_does_not_leak():
    graph = SkeletonGraph(num_joints=4, edges=((0, 1), (1, 2)))
    adjacency = normalize_adjacency(graph, require_connected=False)[None]
    block = StgcnBlock(3, 4, 1, adjacency, 3, np.random.default_rng(0)).eval()
    x = np.random.default_rng(1).normal(size=(2, 3, 8, 4))
    zeroed = x.copy()
    zeroed[:, :, :, 3] = 0.0
    a = block(Tensor(x)).data
    b = block(Tensor(zeroed)).data
    np.testing.assert_allclose(a[..., :3], b[..., :3])


def test_residual_only_when_shapes_match():
    adjacency = normalize_adjacency(build_chain_graph(3))[None]
    rng = np.random.default_rng(0)
    assert StgcnBlock(4, 4, 1, adjacency, 3, rng).residual
    assert not StgcnBlock(4, 8, 1, adjacency, 3, rng).residual
    assert not StgcnBlock(4, 4, 2, adjacency, 3, rng).residual


def test_flop_count_components():
    flops = count_flops(EncoderConfig(), frames=50, joints=25)
    assert flops['total'] == flops['graph_conv'] + flops['conv_temporal'] + flops['embed']
    assert flops['embed'] == 2 * 13 * 64 * 256


@pytest.mark.parametrize('kwargs', [{'temporal_kernel': 4}, {'spatial_kernel': 2}, {'num_layers': 0},
                                    {'embed_dim': 0}])
def test_encoder_config_validation(kwargs):
    with pytest.raises(ConfigError):
        EncoderConfig(**kwargs)


# projector

def test_projector_parameter_count():
    head = ProjectorHead(ProjectorConfig(in_dim=8, hidden_dim=12, out_dim=10), np.random.default_rng(0))
    expected = 8 * 12 + 2 * 12 + 12 * 12 + 2 * 12 + 12 * 10
    assert head.count_params() == expected


def test_projector_output():
    head = ProjectorHead(ProjectorConfig(in_dim=8, hidden_dim=16, out_dim=12), np.random.default_rng(0))
    assert head(Tensor(np.random.default_rng(1).normal(size=(5, 8)))).shape == (5, 12)


def test_projector_needs_two_samples():
    head = ProjectorHead(ProjectorConfig(in_dim=8, hidden_dim=16, out_dim=12), np.random.default_rng(0))
    with pytest.raises(BatchTooSmall):
        head(Tensor(np.zeros((1, 8))))


# attention and alignment

def test_attention_over_one_key_returns_its_value():
    q = Tensor(np.random.default_rng(0).normal(size=(1, 3, 4)))
    k = Tensor(np.random.default_rng(1).normal(size=(1, 1, 4)))
    v = Tensor(np.array([[[1.0, 2.0, 3.0, 4.0]]]))
    out, weights = scaled_dot_attention(q, k, v)
    np.testing.assert_allclose(out.data, np.tile([1.0, 2.0, 3.0, 4.0], (1, 3, 1)))
    np.testing.assert_allclose(weights.data, 1.0)


def test_identical_keys_average_values():
    q = Tensor(np.random.default_rng(0).normal(size=(1, 2, 3)))
    k = Tensor(np.ones((1, 4, 3)))
    v = Tensor(np.arange(12, dtype=float).reshape(1, 4, 3))
    out, weights = scaled_dot_attention(q, k, v)
    np.testing.assert_allclose(weights.data, 0.25)
    np.testing.assert_allclose(out.data[0, 0], v.data[0].mean(axis=0))


def test_attention_by_hand():
    q = Tensor([[[1.0], [0.0]]])
    k = Tensor([[[1.0], [0.0]]])
    v = Tensor([[[2.0], [4.0]]])
    out, weights = scaled_dot_attention(q, k, v)
    e = math.e
    np.testing.assert_allclose(weights.data[0, 0], [e / (e + 1), 1 / (e + 1)])
    np.testing.assert_allclose(weights.data[0, 1], [0.5, 0.5])
    np.testing.assert_allclose(out.data[0, :, 0], [(2 * e + 4) / (e + 1), 3.0])


def identity_attention(module: MultiHeadCrossAttention):
    for layer in (module.query, module.key, module.value, module.out):
        layer.weight.data[...] = np.eye(module.dim)


def test_symmetric_inputs_fuse_by_doubling():
    align = AlignmentModule(AlignConfig(model_dim=8, num_classes=3), np.random.default_rng(0))
    identity_attention(align.theta_to_phi)
    identity_attention(align.phi_to_theta)
    token = np.random.default_rng(1).normal(size=8)
    h = Tensor(np.tile(token, (2, 5, 1)))
    one_way = align.theta_to_phi(h, h).data
    np.testing.assert_allclose(align.phi_to_theta(h, h).data, one_way)
    np.testing.assert_allclose(align.align(h, h).data, 2 * np.tile(token, (2, 1)))


def test_zero_context_leaves_output_bias():
    attention = MultiHeadCrossAttention(8, 4, np.random.default_rng(0), bias=True)
    attention.out.bias.data[...] = np.arange(8)
    query = Tensor(np.random.default_rng(1).normal(size=(2, 3, 8)))
    out = attention(query, Tensor(np.zeros((2, 5, 8)))).data
    np.testing.assert_allclose(out, np.broadcast_to(np.arange(8, dtype=float), (2, 3, 8)))


def test_alignment_parameter_count():
    d, c = 16, 5
    align = AlignmentModule(AlignConfig(model_dim=d, num_classes=c), np.random.default_rng(0))
    assert align.count_params() == 2 * 4 * d * d + d * c + c


def test_alignment_norm_option():
    config = AlignConfig(model_dim=8, num_classes=3, align_norm=True)
    align = AlignmentModule(config, np.random.default_rng(0))
    h = Tensor(np.random.default_rng(1).normal(size=(2, 4, 8)))
    assert align(h, h).shape == (2, 3)


def test_alignment_rejects_uneven_heads():
    with pytest.raises(ConfigError):
        AlignConfig(model_dim=10, num_classes=3, num_heads=4)


def test_alignment_rejects_mismatched_tokens():
    align = AlignmentModule(AlignConfig(model_dim=8, num_classes=3), np.random.default_rng(0))
    with pytest.raises(ShapeMismatch):
        align.align(Tensor(np.zeros((2, 4, 8))), Tensor(np.zeros((2, 3, 8))))


def test_student_is_a_fraction_of_the_teacher(ntu_graph):
    config = load_config(DESK)
    teacher = build_teacher(config.encoder, partition_adjacency(ntu_graph, config.encoder.spatial_kernel),
                            AlignConfig(model_dim=config.encoder.embed_dim, num_classes=4),
                            np.random.default_rng(0))
    student = EncoderClassifier(build_encoder(config.student, ntu_graph, np.random.default_rng(1)), 4,
                                np.random.default_rng(2))
    assert student.count_params() < 0.2 * teacher.count_params()


# checkpoints

def test_checkpoint_round_trip(tmp_path, ntu_graph):
    with default_dtype(np.float32):
        encoder = small_encoder(ntu_graph).eval()
        x = batch().data.astype(np.float32)
        expected = encoder(Tensor(x))[1].data
        record = {'kind': 'encoder', 'encoder': encoder.config.to_dict()}
        save_checkpoint(tmp_path / 'e.ckpt', encoder.state_dict(), record)

        restored = small_encoder(ntu_graph)
        restored.blocks[0].gcn_weight.data[...] = 0.0
        restored.load_state_dict(load_checkpoint(tmp_path / 'e.ckpt', expected_config=record).state)
        restored.eval()
        np.testing.assert_array_equal(restored(Tensor(x))[1].data, expected)
        assert parameter_fingerprint(restored) == parameter_fingerprint(encoder)


def test_float64_checkpoint_is_rounded_to_float32(tmp_path, ntu_graph):
    encoder = small_encoder(ntu_graph).eval()
    x = batch()
    record = {'kind': 'encoder', 'encoder': encoder.config.to_dict()}
    path = save_checkpoint(tmp_path / 'e.ckpt', encoder.state_dict(), record)
    loaded = load_checkpoint(path, expected_config=record)
    assert {v.dtype for v in loaded.state.values()} == {np.dtype(np.float32)}

    for value in encoder.state_dict().values():
        value[...] = value.astype(np.float32)
    expected = encoder(x)[1].data

    restored = small_encoder(ntu_graph)
    restored.blocks[0].gcn_weight.data[...] = 0.0
    restored.load_state_dict(loaded.state)
    restored.eval()
    assert restored.blocks[0].gcn_weight.data.dtype == np.float64
    np.testing.assert_array_equal(restored(x)[1].data, expected)
    assert encode_checkpoint(restored.state_dict(), record) == path.read_bytes()


# composed gradients

def tiny_encoder(graph, seed):
    config = EncoderConfig(num_layers=2, hidden_channels=2, temporal_kernel=3, embed_dim=4)
    return build_encoder(config, graph, np.random.default_rng(seed))


def test_pooled_embedding_gradient(chain3):
    encoder = tiny_encoder(chain3, 0)
    x = batch(n=4, t=6, v=3, seed=1)
    weights = Tensor(np.random.default_rng(2).normal(size=(4, 4)))
    leaves = [encoder.blocks[0].gcn_weight, encoder.blocks[1].tcn_weight, encoder.embed.weight]

    def loss():
        return ops.sum(ops.mul(encoder(x)[1], weights))

    assert gradcheck(loss, leaves) < 1e-4


def test_pretrain_loss_gradient_reaches_encoder_parameters(chain3):
    enc_theta, enc_phi = tiny_encoder(chain3, 0), tiny_encoder(chain3, 1)
    proj_cfg = ProjectorConfig(in_dim=4, hidden_dim=6, out_dim=5, depth=2)
    proj_theta = ProjectorHead(proj_cfg, np.random.default_rng(2))
    proj_phi = ProjectorHead(proj_cfg, np.random.default_rng(3))
    views = {name: batch(n=4, t=6, v=3, seed=10 + i) for i, name in enumerate(
        ('anchor', 'theta_joint', 'theta_motion', 'phi_joint', 'phi_motion'))}
    cfg = BarlowLossConfig(lam=0.1)
    leaves = [enc_theta.blocks[0].gcn_weight, enc_phi.blocks[1].tcn_weight, enc_phi.embed.bias]

    def loss():
        z = {}
        for name, encoder, projector in (('theta', enc_theta, proj_theta), ('phi', enc_phi, proj_phi)):
            z[name] = projector(encoder(views['anchor'])[1])
            for kind in ('joint', 'motion'):
                z[f'{name}_{kind}'] = projector(encoder(views[f'{name}_{kind}'])[1])
        total, _ = asma_pretrain_loss(z['theta'], z['theta_joint'], z['theta_motion'],
                                      z['phi'], z['phi_joint'], z['phi_motion'], cfg)
        return total

    assert gradcheck(loss, leaves) < 1e-4


def test_checkpoint_digest_mismatch(tmp_path):
    save_checkpoint(tmp_path / 'c.ckpt', {'w': np.ones(3)}, {'width': 3})
    with pytest.raises(CheckpointMismatch):
        load_checkpoint(tmp_path / 'c.ckpt', expected_config={'width': 4})


def test_checkpoint_scalar_entry():
    back = decode_checkpoint(encode_checkpoint({'s': np.array(2.5)}, {}))
    assert back.state['s'].shape == ()
    assert float(back.state['s']) == 2.5


@pytest.mark.parametrize('corrupt', [
    lambda p: b'XXXX' + p[4:],
    lambda p: p[:-1],
    lambda p: p + b'\x00',
    lambda p: p[:4] + b'\x09\x00' + p[6:],
])
def test_corrupt_checkpoints(corrupt):
    payload = encode_checkpoint({'w': np.ones((2, 3))}, {'kind': 'test'})
    with pytest.raises(CheckpointFormatError):
        decode_checkpoint(corrupt(payload))


def test_missing_checkpoint_file(tmp_path):
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(tmp_path / 'absent.ckpt')


def test_strict_state_dict_mismatch():
    layer = Linear(3, 4, np.random.default_rng(0))
    with pytest.raises(CheckpointMismatch):
        layer.load_state_dict({'weight': np.zeros((3, 4))})
    with pytest.raises(CheckpointMismatch):
        layer.load_state_dict({'weight': np.zeros((4, 3)), 'bias': np.zeros(4)})
