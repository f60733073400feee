"""Degree-driven joint masks, motion-driven frame masks and the asymmetric views"""
import itertools

import numpy as np
import pytest

from src.errors import ConfigError, UsageError
from src.masking import (HIGH_DEGREE, LOW_DEGREE, UNIFORM, MaskSpec, MotionScores, apply_masks,
                         joint_mask_distribution, make_asymmetric_views, motion_scores, random_frames,
                         sample_masked_joints, select_frames)
from src.skeleton import AugmentationSpec, SkeletonSequence, build_chain_graph, generate_synthetic


def exclusion_probabilities(probs):
    """Chance that each item is the one left after drawing all others without replacement"""
    n = len(probs)
    out = np.zeros(n)
    for order in itertools.permutations(range(n), n - 1):
        p, remaining = 1.0, 1.0
        for i in order:
            p *= probs[i] / remaining
            remaining -= probs[i]
        out[(set(range(n)) - set(order)).pop()] += p
    return out


# joint distributions

def test_high_degree_on_path(chain3):
    np.testing.assert_allclose(joint_mask_distribution(chain3, HIGH_DEGREE).probs, [0.25, 0.5, 0.25])


def test_low_degree_on_path(chain3):
    np.testing.assert_allclose(joint_mask_distribution(chain3, LOW_DEGREE).probs, [0.375, 0.25, 0.375])


def test_uniform_distribution(chain3):
    np.testing.assert_allclose(joint_mask_distribution(chain3, UNIFORM).probs, [1 / 3] * 3)


def test_ntu_leaf_joints(ntu_graph):
    probs = joint_mask_distribution(ntu_graph, HIGH_DEGREE).probs
    for tip in (15, 19, 21, 23):
        assert probs[tip] == pytest.approx(1 / 48)
    assert probs.sum() == pytest.approx(1.0)


def test_low_degree_favours_leaves(ntu_graph):
    probs = joint_mask_distribution(ntu_graph, LOW_DEGREE).probs
    assert probs[21] > probs[20]


def test_unknown_distribution_mode(chain3):
    with pytest.raises(UsageError):
        joint_mask_distribution(chain3, 'sideways')


# joint sampling

def test_sample_zero_joints(chain3):
    dist = joint_mask_distribution(chain3, HIGH_DEGREE)
    assert sample_masked_joints(dist, 0, np.random.default_rng(0)) == frozenset()


def test_sample_rejects_all_joints(chain3):
    dist = joint_mask_distribution(chain3, HIGH_DEGREE)
    with pytest.raises(UsageError):
        sample_masked_joints(dist, 3, np.random.default_rng(0))


def test_single_draw_frequencies(chain3):
    dist = joint_mask_distribution(chain3, HIGH_DEGREE)
    rng = np.random.default_rng(11)
    trials = 50_000
    counts = np.zeros(3)
    for _ in range(trials):
        (joint,) = sample_masked_joints(dist, 1, rng)
        counts[joint] += 1
    np.testing.assert_allclose(counts / trials, [0.25, 0.5, 0.25], atol=0.01)


def test_all_but_one_exclusion_frequencies():
    graph = build_chain_graph(4)
    dist = joint_mask_distribution(graph, HIGH_DEGREE)
    expected = exclusion_probabilities(dist.probs)
    rng = np.random.default_rng(5)
    trials = 20_000
    counts = np.zeros(4)
    for _ in range(trials):
        chosen = sample_masked_joints(dist, 3, rng)
        assert len(chosen) == 3
        counts[(set(range(4)) - chosen).pop()] += 1
    sigma = np.sqrt(expected * (1 - expected) / trials)
    assert np.all(np.abs(counts / trials - expected) <= 4 * sigma)


def test_sampling_is_seeded(ntu_graph):
    dist = joint_mask_distribution(ntu_graph, HIGH_DEGREE)
    a = sample_masked_joints(dist, 9, np.random.default_rng(3))
    b = sample_masked_joints(dist, 9, np.random.default_rng(3))
    assert a == b and len(a) == 9


def test_high_degree_masks_spine_joints_more_often(ntu_graph):
    spine = {v for v, d in enumerate(ntu_graph.degrees) if d >= 3}
    hits = {}
    for strategy, mode in (('HDSM', HIGH_DEGREE), ('LDSM', LOW_DEGREE)):
        dist = joint_mask_distribution(ntu_graph, mode)
        rng = np.random.default_rng(17)
        hits[strategy] = sum(len(spine & sample_masked_joints(dist, 1, rng)) for _ in range(10_000))
    assert hits['HDSM'] > hits['LDSM']


# motion scores and frame selection

def test_constant_sequence_has_no_motion(ntu_graph):
    x = SkeletonSequence(np.full((3, 5, 25), 0.7), ntu_graph)
    assert np.all(motion_scores(x).scores == 0.0)


def test_motion_scores_by_hand():
    graph = build_chain_graph(1)
    x = SkeletonSequence(np.array([[[0.0], [3.0], [3.0]]]), graph)
    np.testing.assert_allclose(motion_scores(x).scores, [3.0, 0.0, 0.0])


def test_motion_scores_reject_negative():
    with pytest.raises(ValueError):
        MotionScores(np.array([1.0, -1.0]))


def test_top_frames():
    assert select_frames(MotionScores(np.array([5.0, 1.0, 4.0, 2.0])), 2, 'top') == [0, 2]


def test_bottom_frames():
    assert select_frames(MotionScores(np.array([5.0, 1.0, 4.0, 2.0])), 2, 'bottom') == [1, 3]


@pytest.mark.parametrize('mode', ['top', 'bottom'])
def test_ties_go_to_lower_index(mode):
    assert select_frames(MotionScores(np.ones(6)), 3, mode) == [0, 1, 2]


def test_select_frames_rejects_k_equal_t():
    with pytest.raises(UsageError):
        select_frames(MotionScores(np.ones(4)), 4, 'top')


def test_random_frames_are_distinct_and_sorted():
    frames = random_frames(20, 7, np.random.default_rng(1))
    assert frames == sorted(set(frames)) and len(frames) == 7


def test_select_frames_matches_a_full_sort():
    rng = np.random.default_rng(23)
    for case in range(1000):
        scores = rng.random(50)
        if case % 2:
            scores = np.round(scores, 1)
        k = int(rng.integers(0, 50))
        for mode, sign in (('top', -1.0), ('bottom', 1.0)):
            expected = sorted(sorted(range(50), key=lambda i: (sign * scores[i], i))[:k])
            assert select_frames(MotionScores(scores), k, mode) == expected


def test_top_and_bottom_frames_are_disjoint():
    rng = np.random.default_rng(4)
    for _ in range(200):
        t = int(rng.integers(2, 40))
        scores = MotionScores(rng.permutation(t).astype(float))
        k_top = int(rng.integers(0, t))
        k_bottom = int(rng.integers(0, t - k_top + 1))
        if k_bottom >= t:
            continue
        top = set(select_frames(scores, k_top, 'top'))
        bottom = set(select_frames(scores, k_bottom, 'bottom'))
        assert not top & bottom


def test_motion_scores_match_a_loop_over_joints(ntu_graph):
    rng = np.random.default_rng(31)
    for _ in range(100):
        t = int(rng.integers(2, 20))
        data = rng.normal(size=(3, t, 25))
        expected = np.zeros(t)
        for f in range(t - 1):
            total = 0.0
            for c in range(3):
                for v in range(25):
                    total += abs(data[c, f + 1, v] - data[c, f, v])
            expected[f] = total / (3 * 25)
        expected[t - 1] = expected[t - 2]
        got = motion_scores(SkeletonSequence(data, ntu_graph)).scores
        np.testing.assert_allclose(got, expected, rtol=1e-9)


# masks and views

def test_apply_no_masks_copies(small_dataset):
    x = small_dataset[0]
    out = apply_masks(x, (), ())
    np.testing.assert_array_equal(out.data, x.data)


def test_mask_every_joint(small_dataset):
    x = small_dataset[0]
    assert np.all(apply_masks(x, range(25), ()).data == 0.0)


def test_mask_counts_by_inclusion_exclusion():
    graph = build_chain_graph(5)
    x = SkeletonSequence(np.ones((3, 4, 5)), graph)
    out = apply_masks(x, [2], [1])
    assert int(np.sum(out.data == 0.0)) == 4 * 3 + 5 * 3 - 3
    assert np.all(x.data == 1.0)


def test_apply_masks_is_idempotent(small_dataset):
    x = small_dataset[1]
    once = apply_masks(x, [0, 7, 20], [2, 5])
    twice = apply_masks(once, [0, 7, 20], [2, 5])
    np.testing.assert_array_equal(twice.data, once.data)


def test_views_hide_joints_and_frames(ntu_graph):
    x = generate_synthetic(2, 1, 50, ntu_graph, 0)[0]
    theta = MaskSpec(n_joints=9, k_frames=10, spatial_mode='HDSM', temporal_mode='LMTM')
    phi = MaskSpec(n_joints=9, k_frames=10, spatial_mode='LDSM', temporal_mode='HMTM')
    views = make_asymmetric_views(x, theta, phi, AugmentationSpec(), np.random.default_rng(2))
    assert set(views) == {'anchor', 'theta_joint', 'theta_motion', 'phi_joint', 'phi_motion'}
    for key in ('theta_joint', 'phi_joint'):
        zero_joints = sum(np.all(views[key].data[:, :, v] == 0.0) for v in range(25))
        assert zero_joints >= 9
    for key in ('theta_motion', 'phi_motion'):
        zero_frames = sum(np.all(views[key].data[:, t, :] == 0.0) for t in range(50))
        assert zero_frames >= 10
    np.testing.assert_array_equal(views['anchor'].data, x.data)


def test_unmasked_views_equal_input(small_dataset):
    x = small_dataset[2]
    spec = MaskSpec(n_joints=0, k_frames=0)
    views = make_asymmetric_views(x, spec, spec, AugmentationSpec.identity(), np.random.default_rng(0))
    for view in views.values():
        np.testing.assert_array_equal(view.data, x.data)


def test_views_are_seeded(small_dataset):
    x = small_dataset[0]
    spec = MaskSpec(n_joints=4, k_frames=3)
    a = make_asymmetric_views(x, spec, spec, AugmentationSpec(), np.random.default_rng(9))
    b = make_asymmetric_views(x, spec, spec, AugmentationSpec(), np.random.default_rng(9))
    for key in a:
        np.testing.assert_array_equal(a[key].data, b[key].data)


def test_mask_spec_validation():
    with pytest.raises(ConfigError):
        MaskSpec(spatial_mode='HMTM')
    with pytest.raises(ConfigError):
        MaskSpec(n_joints=-1)
    with pytest.raises(ConfigError):
        MaskSpec(n_joints=25).check_against(frames=50, joints=25)
