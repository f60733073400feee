"""Skeleton graph, NTU parsing, synthetic data, streams, augmentation and caches"""
import numpy as np
import pytest

from src.errors import CacheFormatError, DataError, EmptyFile, MalformedRecord, MissingParents, NonNumericField
from src.skeleton import (AugmentationSpec, SkeletonGraph, SkeletonSequence, augment, build_chain_graph,
                          decode_cache, derive_stream, encode_cache, format_ntu_skeleton, generate_synthetic,
                          holdout_split, joint_motion_stats, load_dataset, mirror, parse_ntu_skeleton,
                          read_cache, rotate, stats_csv, temporal_crop_resize, write_cache)
from src.skeleton.ntu_reader import action_label


def skeleton_text(frames):
    """frames: list over time of lists of (body_id, 3 x 25 array)"""
    lines = [str(len(frames))]
    for bodies in frames:
        lines.append(str(len(bodies)))
        for body_id, coords in bodies:
            lines.append(f"{body_id} 0 0 0 0 0 0 0.1 0.2 2")
            lines.append(str(coords.shape[1]))
            for v in range(coords.shape[1]):
                x, y, z = coords[:, v]
                lines.append(f"{x} {y} {z} 0.5 0.5 0 0 0 0 0 0 2")
    return '\n'.join(lines) + '\n'


def joint_coords(seed):
    return np.round(np.random.default_rng(seed).normal(size=(3, 25)), 4)


# graph

def test_ntu_graph_shape(ntu_graph):
    assert ntu_graph.num_joints == 25
    assert sum(ntu_graph.degrees) == 2 * len(ntu_graph.edges) == 48


def test_ntu_graph_degrees(ntu_graph):
    assert ntu_graph.degrees[20] == 4
    for tip in (21, 23):
        assert ntu_graph.degrees[tip] == 1
    assert {v for v, d in enumerate(ntu_graph.degrees) if d == 1} == {3, 15, 19, 21, 23}


def test_ntu_parents_form_tree(ntu_graph):
    parents = ntu_graph.parents
    assert parents[0] is None
    assert parents[1] == 0
    assert parents[20] == 1
    assert sum(p is None for p in parents) == 1


def test_graph_rejects_out_of_range_edge():
    with pytest.raises(DataError):
        SkeletonGraph(num_joints=2, edges=((0, 2),))


def test_graph_rejects_cyclic_parents():
    with pytest.raises(DataError):
        SkeletonGraph(num_joints=2, edges=((0, 1),), parents=(1, 0))


# parser

def test_parse_two_frame_single_body():
    coords = joint_coords(0)
    seqs = parse_ntu_skeleton(skeleton_text([[('b1', coords)], [('b1', coords + 1)]]))
    assert len(seqs) == 1
    assert seqs[0].shape == (3, 2, 25)
    np.testing.assert_allclose(seqs[0].data[:, 0, :], coords)
    np.testing.assert_allclose(seqs[0].data[:, 1, :], coords + 1)


def test_parse_two_bodies():
    a = [joint_coords(t) for t in range(3)]
    b = [joint_coords(10 + t) for t in range(3)]
    text = skeleton_text([[('A', a[t]), ('B', b[t])] for t in range(3)])
    seqs = parse_ntu_skeleton(text, label=4)
    assert [s.shape for s in seqs] == [(3, 3, 25), (3, 3, 25)]
    for t in range(3):
        np.testing.assert_allclose(seqs[0].data[:, t, :], a[t])
        np.testing.assert_allclose(seqs[1].data[:, t, :], b[t])
    assert all(s.label == 4 for s in seqs)


def test_parse_body_appearing_mid_clip_is_zero_filled():
    a, b = joint_coords(1), joint_coords(2)
    seqs = parse_ntu_skeleton(skeleton_text([[('A', a)], [('A', a), ('B', b)]]))
    assert len(seqs) == 2
    assert np.all(seqs[1].data[:, 0, :] == 0.0)
    np.testing.assert_allclose(seqs[1].data[:, 1, :], b)


def test_parse_missing_joint_line():
    coords = joint_coords(0)
    lines = skeleton_text([[('b', coords)], [('b', coords)]]).splitlines()
    # drop the last joint line of frame 0 (lines: count, bodies, header, joints, 25 joint lines)
    del lines[4 + 24]
    with pytest.raises(MalformedRecord):
        parse_ntu_skeleton('\n'.join(lines))


def test_parse_empty_file():
    with pytest.raises(EmptyFile):
        parse_ntu_skeleton(b'  \n')


def test_parse_non_numeric_coordinate_reports_line():
    coords = joint_coords(0)
    lines = skeleton_text([[('b', coords)], [('b', coords)]]).splitlines()
    lines[4] = 'abc 0 0 0 0 0 0 0 0 0 0 2'
    with pytest.raises(NonNumericField) as info:
        parse_ntu_skeleton('\n'.join(lines))
    assert info.value.line == 5
    assert 'line 5' in str(info.value)


def test_parse_bad_body_header():
    coords = joint_coords(0)
    lines = skeleton_text([[('b', coords)], [('b', coords)]]).splitlines()
    lines[2] = 'b 0 0'
    with pytest.raises(MalformedRecord) as info:
        parse_ntu_skeleton('\n'.join(lines))
    assert info.value.line == 3


def test_parse_wrong_joint_count():
    coords = joint_coords(0)
    lines = skeleton_text([[('b', coords)], [('b', coords)]]).splitlines()
    lines[3] = '24'
    with pytest.raises(MalformedRecord):
        parse_ntu_skeleton('\n'.join(lines))


def test_parse_trailing_content():
    coords = joint_coords(0)
    text = skeleton_text([[('b', coords)], [('b', coords)]]) + 'extra\n'
    with pytest.raises(MalformedRecord):
        parse_ntu_skeleton(text)


def test_parse_non_integer_frame_count():
    with pytest.raises(NonNumericField) as info:
        parse_ntu_skeleton('two\n')
    assert info.value.line == 1


def test_format_then_parse_reproduces_coordinates(small_dataset):
    pair = small_dataset[:2]
    parsed = parse_ntu_skeleton(format_ntu_skeleton(pair))
    assert len(parsed) == 2
    for original, back in zip(pair, parsed):
        np.testing.assert_array_equal(original.data, back.data)


def test_action_label_from_file_name():
    assert action_label('S001C001P001R001A050.skeleton') == 49
    assert action_label('notes.skeleton') is None


# synthetic data

def test_synthetic_shape_and_labels(ntu_graph):
    seqs = generate_synthetic(4, 10, 50, ntu_graph, 7)
    assert len(seqs) == 40
    assert all(s.shape == (3, 50, 25) for s in seqs)
    assert sorted({s.label for s in seqs}) == [0, 1, 2, 3]
    assert [s.label for s in seqs[:10]] == [0] * 10


def test_synthetic_is_deterministic(ntu_graph):
    a = generate_synthetic(4, 10, 50, ntu_graph, 7)
    b = generate_synthetic(4, 10, 50, ntu_graph, 7)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.data, y.data)


def test_synthetic_peripheral_joints_move_more(ntu_graph):
    seqs = generate_synthetic(4, 5, 50, ntu_graph, 0)
    rows = joint_motion_stats(seqs, ntu_graph)
    motion = np.array([m for _, _, m in rows])
    degrees = np.array(ntu_graph.degrees)
    assert motion[degrees == 1].mean() > motion[degrees >= 3].mean()


def test_synthetic_classes_are_separable_by_nearest_centroid(ntu_graph):
    seqs = generate_synthetic(4, 50, 50, ntu_graph, 3)

    def feature(seq):
        velocity = np.diff(seq.data, axis=1)
        return np.concatenate([seq.data.mean(axis=1).ravel(), velocity.mean(axis=1).ravel()])

    features = np.stack([feature(s) for s in seqs])
    labels = np.array([s.label for s in seqs])
    fit = np.arange(len(seqs)) % 2 == 0
    centroids = np.stack([features[fit & (labels == c)].mean(axis=0) for c in range(4)])
    test = features[~fit]
    distances = np.linalg.norm(test[:, None, :] - centroids[None, :, :], axis=2)
    accuracy = np.mean(distances.argmin(axis=1) == labels[~fit])
    assert accuracy >= 0.95


# streams

def test_joint_stream_is_identity(small_dataset):
    x = small_dataset[0]
    np.testing.assert_array_equal(derive_stream(x, 'joint').data, x.data)


def test_motion_of_constant_pose_is_zero(ntu_graph):
    x = SkeletonSequence(np.ones((3, 6, 25)), ntu_graph)
    assert np.all(derive_stream(x, 'motion').data == 0.0)


def test_cumsum_of_motion_rebuilds_the_joints(small_dataset):
    for x in small_dataset:
        motion = derive_stream(x, 'motion').data
        assert np.all(motion[:, -1, :] == 0.0)
        steps = np.concatenate([np.zeros_like(motion[:, :1]), np.cumsum(motion[:, :-1], axis=1)], axis=1)
        np.testing.assert_allclose(x.data[:, :1, :] + steps, x.data, atol=1e-5)


def test_bone_stream_on_two_joint_chain():
    graph = build_chain_graph(2)
    data = np.zeros((3, 4, 2))
    data[:, :, 1] = np.array([1.0, 2.0, 3.0])[:, None]
    bone = derive_stream(SkeletonSequence(data, graph), 'bone').data
    np.testing.assert_array_equal(bone[:, :, 1], np.tile([[1.0], [2.0], [3.0]], (1, 4)))
    assert np.all(bone[:, :, 0] == 0.0)


def test_bone_stream_needs_parents():
    graph = SkeletonGraph(num_joints=2, edges=((0, 1),))
    with pytest.raises(MissingParents):
        derive_stream(SkeletonSequence(np.zeros((3, 2, 2)), graph), 'bone')


def test_sequence_rejects_non_finite(ntu_graph):
    data = np.zeros((3, 2, 25))
    data[0, 0, 0] = np.nan
    with pytest.raises(DataError):
        SkeletonSequence(data, ntu_graph)


# augmentation

def test_identity_augmentation(small_dataset):
    x = small_dataset[0]
    out = augment(x, AugmentationSpec.identity(), np.random.default_rng(0))
    np.testing.assert_array_equal(out.data, x.data)


def test_full_turn_rotation_is_identity(small_dataset):
    data = small_dataset[0].data
    for axis in range(3):
        angles = [0.0, 0.0, 0.0]
        angles[axis] = 360.0
        np.testing.assert_allclose(rotate(data, angles), data, atol=1e-6)


def test_half_crop_of_linear_signal_stays_linear():
    t = 20
    data = np.tile(np.arange(t, dtype=float)[None, :, None], (3, 1, 2))
    out = temporal_crop_resize(data, 0.5, 0.0)
    expected = np.linspace(0.0, 9.0, t)
    np.testing.assert_allclose(out[0, :, 0], expected, atol=1e-6)
    assert out.shape == data.shape


def test_mirror_is_an_involution(small_dataset, ntu_graph):
    data = small_dataset[0].data
    np.testing.assert_array_equal(mirror(mirror(data, ntu_graph.mirror_pairs), ntu_graph.mirror_pairs), data)


def test_augment_keeps_shape_and_is_seeded(small_dataset):
    x = small_dataset[1]
    spec = AugmentationSpec()
    a = augment(x, spec, np.random.default_rng(3))
    b = augment(x, spec, np.random.default_rng(3))
    assert a.shape == x.shape
    np.testing.assert_array_equal(a.data, b.data)


@pytest.mark.parametrize('kwargs', [
    {'crop_ratio_range': (0.0, 1.0)},
    {'crop_ratio_range': (0.9, 0.5)},
    {'rotation_max_deg': -1.0},
    {'flip_probability': 1.5},
])
def test_invalid_augmentation_spec(kwargs):
    from src.errors import ConfigError
    with pytest.raises(ConfigError):
        AugmentationSpec(**kwargs)


# cache and dataset loading

def test_cache_round_trip(small_dataset):
    back = decode_cache(encode_cache(small_dataset))
    assert len(back) == len(small_dataset)
    for original, restored in zip(small_dataset, back):
        assert restored.label == original.label
        np.testing.assert_array_equal(restored.data, original.data.astype(np.float32).astype(np.float64))


def test_cache_rejects_bad_magic(small_dataset):
    payload = bytearray(encode_cache(small_dataset))
    payload[:4] = b'NOPE'
    with pytest.raises(CacheFormatError):
        decode_cache(bytes(payload))


def test_cache_rejects_truncation(small_dataset):
    payload = encode_cache(small_dataset)
    with pytest.raises(CacheFormatError):
        decode_cache(payload[:-3])


def test_load_dataset_from_cache(tmp_path, small_dataset):
    path = write_cache(tmp_path / 'd.asma', small_dataset)
    seqs = load_dataset(str(path), frames=10)
    assert len(seqs) == len(small_dataset)
    assert all(s.shape == (3, 10, 25) for s in seqs)
    assert len(read_cache(path)) == len(small_dataset)


def test_load_dataset_from_skeleton_directory(tmp_path, small_dataset):
    (tmp_path / 'S001C001P001R001A001.skeleton').write_bytes(format_ntu_skeleton(small_dataset[:1]))
    (tmp_path / 'S001C001P001R001A002.skeleton').write_bytes(format_ntu_skeleton(small_dataset[1:3]))
    first = load_dataset(str(tmp_path), frames=12)
    assert [s.label for s in first] == [0, 1]
    every = load_dataset(str(tmp_path), frames=12, body='all')
    assert [s.label for s in every] == [0, 1, 1]


def test_load_dataset_missing_path(tmp_path):
    with pytest.raises(DataError):
        load_dataset(str(tmp_path / 'absent'), frames=10)


def test_holdout_split_is_deterministic_and_disjoint():
    train, held = holdout_split(200, 0.2)
    again_train, again_held = holdout_split(200, 0.2)
    np.testing.assert_array_equal(train, again_train)
    np.testing.assert_array_equal(held, again_held)
    assert not set(train) & set(held)
    assert len(train) + len(held) == 200
    assert 20 <= len(held) <= 60


def test_stats_csv_columns(small_dataset, ntu_graph):
    text = stats_csv(joint_motion_stats(small_dataset, ntu_graph))
    lines = text.splitlines()
    assert lines[0] == 'joint_index,degree,mean_motion'
    assert len(lines) == 26
    assert lines[21].startswith('20,4,')
