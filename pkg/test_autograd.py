"""Tape-based reverse-mode differentiation and its primitives"""
import numpy as np
import pytest

from src.autograd import (Tape, Tensor, backward, default_dtype, get_default_dtype, gradcheck, ops,
                          relative_error, set_debug)
from src.errors import NonFiniteDetected, NoTape, NotScalar, ShapeMismatch

TOL = 1e-6


def leaf(shape, seed=0, low=-1.0, high=1.0):
    return Tensor(np.random.default_rng(seed).uniform(low, high, size=shape), requires_grad=True)


def weighted(out, seed=99):
    """Scalar sum(out * R) with fixed random R, so every output element matters"""
    r = Tensor(np.random.default_rng(seed).normal(size=out.shape))
    return ops.sum(ops.mul(out, r))


# forward values

def test_softmax_of_zeros():
    np.testing.assert_allclose(ops.softmax(Tensor([[0.0, 0.0, 0.0]])).data, [[1 / 3] * 3])


def test_log_softmax_matches_log_of_softmax():
    x = Tensor([[1.0, -2.0, 0.5], [300.0, 0.0, -300.0]])
    np.testing.assert_allclose(np.exp(ops.log_softmax(x).data), ops.softmax(x).data, atol=1e-12)


def test_unit_kernel_identity_conv_is_identity():
    x = leaf((2, 3, 5, 4))
    weight = Tensor(np.eye(3)[:, :, None])
    np.testing.assert_allclose(ops.conv_temporal(x, weight).data, x.data)


def test_conv_temporal_output_length():
    x = leaf((1, 2, 10, 3))
    weight = leaf((4, 2, 3), seed=1)
    assert ops.conv_temporal(x, weight, stride=2).shape == (1, 4, 5, 3)


def test_identity_adjacency_graph_conv_is_per_joint_linear():
    x = leaf((2, 3, 4, 5))
    w = leaf((6, 3), seed=1)
    out = ops.graph_conv(x, np.eye(5), w).data
    expected = np.einsum('oc,nctv->notv', w.data, x.data)
    np.testing.assert_allclose(out, expected)


def test_batch_norm_eval_uses_running_stats():
    x = Tensor(np.full((4, 2, 3), 5.0))
    mean, var = np.array([1.0, 2.0]), np.array([4.0, 9.0])
    out = ops.batch_norm(x, Tensor(np.ones(2)), Tensor(np.zeros(2)), mean, var, training=False, eps=0.0)
    np.testing.assert_allclose(out.data[:, 0], 2.0)
    np.testing.assert_allclose(out.data[:, 1], 1.0)


def test_batch_norm_training_updates_running_stats():
    x = Tensor(np.array([[0.0], [2.0]]))
    mean, var = np.zeros(1), np.ones(1)
    ops.batch_norm(x, Tensor(np.ones(1)), Tensor(np.zeros(1)), mean, var, training=True, momentum=0.1)
    np.testing.assert_allclose(mean, [0.1])
    # unbiased batch variance of [0, 2] is 2
    np.testing.assert_allclose(var, [0.9 + 0.1 * 2.0])


# gradients by hand

def test_quadratic_gradient():
    w = Tensor([1.0, 2.0, 3.0], requires_grad=True)
    with Tape():
        backward(ops.sum(ops.mul(w, w)))
    np.testing.assert_allclose(w.grad, [2.0, 4.0, 6.0])


def test_relu_mean_gradient():
    w = Tensor([-1.0, 2.0], requires_grad=True)
    with Tape():
        backward(ops.mean(ops.relu(w)))
    np.testing.assert_allclose(w.grad, [0.0, 0.5])


def test_gradients_accumulate_across_backward_calls():
    w = Tensor([1.0, -1.0], requires_grad=True)
    for _ in range(2):
        with Tape():
            backward(ops.sum(ops.mul(w, 3.0)))
    np.testing.assert_allclose(w.grad, [6.0, 6.0])


def test_shared_input_gradients_add():
    w = Tensor([2.0], requires_grad=True)
    with Tape():
        backward(ops.sum(ops.add(ops.mul(w, w), w)))
    np.testing.assert_allclose(w.grad, [5.0])


def test_operator_sugar():
    w = Tensor([1.0, 2.0], requires_grad=True)
    with Tape():
        backward(ops.sum((w * 2.0 - 1.0) / 4.0 + w))
    np.testing.assert_allclose(w.grad, [1.5, 1.5])


# finite differences

@pytest.mark.parametrize('name,fn,shapes', [
    ('add', lambda a, b: ops.add(a, b), [(3, 4), (3, 4)]),
    ('sub', lambda a, b: ops.sub(a, b), [(3, 4), (3, 4)]),
    ('mul', lambda a, b: ops.mul(a, b), [(3, 4), (3, 4)]),
    ('matmul', lambda a, b: ops.matmul(a, b), [(3, 4), (4, 2)]),
    ('batched_matmul', lambda a, b: ops.batched_matmul(a, b), [(2, 3, 4), (2, 4, 5)]),
    ('transpose', lambda a: ops.transpose(a, (2, 0, 1)), [(2, 3, 4)]),
    ('reshape', lambda a: ops.reshape(a, (6, 4)), [(2, 3, 4)]),
    ('concat', lambda a, b: ops.concat([a, b], axis=1), [(2, 3), (2, 5)]),
    ('slice', lambda a: ops.slice(a, (slice(None), [0, 2, 2])), [(3, 4)]),
    ('expand', lambda a: ops.expand(a, (4, 3, 5)), [(3, 1)]),
    ('exp', lambda a: ops.exp(a), [(3, 4)]),
    ('softmax', lambda a: ops.softmax(a, axis=1), [(3, 4)]),
    ('log_softmax', lambda a: ops.log_softmax(a, axis=0), [(3, 4)]),
    ('sum', lambda a: ops.sum(a, (0, 2)), [(2, 3, 4)]),
    ('mean', lambda a: ops.mean(a, 1, keepdims=True), [(2, 3, 4)]),
    ('center', lambda a: ops.center(a, 0), [(5, 3)]),
    ('l2_normalize', lambda a: ops.l2_normalize(a, 1), [(4, 3)]),
])
def test_gradcheck(name, fn, shapes):
    leaves = [leaf(s, seed=i) for i, s in enumerate(shapes)]
    assert gradcheck(lambda: weighted(fn(*leaves)), leaves) < TOL, name


def test_gradcheck_div_and_log():
    a = leaf((3, 4), seed=1)
    b = leaf((3, 4), seed=2, low=0.5, high=2.0)
    assert gradcheck(lambda: weighted(ops.div(a, b)), [a, b]) < TOL
    assert gradcheck(lambda: weighted(ops.log(b)), [b]) < TOL
    assert gradcheck(lambda: weighted(ops.sqrt(b)), [b]) < TOL


def test_gradcheck_relu_away_from_kink():
    x = Tensor(np.array([[-1.0, 0.5], [2.0, -0.3]]), requires_grad=True)
    assert gradcheck(lambda: weighted(ops.relu(x)), [x]) < TOL


def test_gradcheck_batch_norm_training():
    x = leaf((5, 3, 4))
    gamma = leaf((3,), seed=1, low=0.5, high=1.5)
    beta = leaf((3,), seed=2)
    mean, var = np.zeros(3), np.ones(3)
    assert gradcheck(lambda: weighted(ops.batch_norm(x, gamma, beta, mean, var, training=True)),
                     [x, gamma, beta]) < TOL


def test_gradcheck_batch_norm_eval():
    x = leaf((4, 3))
    gamma = leaf((3,), seed=1)
    beta = leaf((3,), seed=2)
    mean, var = np.array([0.1, -0.2, 0.3]), np.array([1.5, 0.5, 2.0])
    assert gradcheck(lambda: weighted(ops.batch_norm(x, gamma, beta, mean, var, training=False)),
                     [x, gamma, beta]) < TOL


@pytest.mark.parametrize('stride', [1, 2])
def test_gradcheck_conv_temporal(stride):
    x = leaf((2, 3, 7, 4))
    w = leaf((2, 3, 3), seed=1)
    assert gradcheck(lambda: weighted(ops.conv_temporal(x, w, stride=stride)), [x, w]) < TOL


def test_gradcheck_graph_conv_partitions():
    x = leaf((2, 3, 4, 5))
    w = leaf((3, 2, 3), seed=1)
    adjacency = np.random.default_rng(4).uniform(size=(3, 5, 5))
    assert gradcheck(lambda: weighted(ops.graph_conv(x, adjacency, w)), [x, w]) < TOL


def test_gradcheck_linear():
    x = leaf((2, 3, 4))
    w = leaf((4, 5), seed=1)
    b = leaf((5,), seed=2)
    assert gradcheck(lambda: weighted(ops.linear(x, w, b)), [x, w, b]) < TOL


def test_relative_error_is_symmetric():
    a, b = np.array([1.0, 2.0]), np.array([1.0, 2.1])
    assert relative_error(a, b) == pytest.approx(relative_error(b, a))


# tape discipline and errors

def test_elementwise_shape_mismatch_names_both_shapes():
    with pytest.raises(ShapeMismatch) as info:
        ops.add(Tensor(np.zeros((2, 3))), Tensor(np.zeros((3, 2))))
    assert '(2, 3)' in str(info.value) and '(3, 2)' in str(info.value)


def test_scalars_broadcast_without_expand():
    out = ops.mul(Tensor(np.ones((2, 2))), 3.0)
    np.testing.assert_allclose(out.data, 3.0)


def test_matmul_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        ops.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))


def test_backward_needs_scalar():
    w = Tensor([1.0, 2.0], requires_grad=True)
    with Tape():
        out = ops.mul(w, 2.0)
        with pytest.raises(NotScalar):
            backward(out)


def test_backward_needs_tape():
    w = Tensor([1.0, 2.0], requires_grad=True)
    out = ops.sum(w)
    assert out.tape_node is None
    with pytest.raises(NoTape):
        backward(out)


def test_tape_is_consumed():
    w = Tensor([1.0], requires_grad=True)
    with Tape():
        loss = ops.sum(ops.mul(w, w))
        backward(loss)
        with pytest.raises(NoTape):
            backward(loss)


def test_constants_are_not_recorded():
    with Tape() as tape:
        ops.add(Tensor([1.0]), Tensor([2.0]))
    assert tape.nodes == []


def test_debug_mode_catches_non_finite():
    set_debug(True)
    try:
        with np.errstate(invalid='ignore'), pytest.raises(NonFiniteDetected):
            ops.log(Tensor([-1.0]))
    finally:
        set_debug(False)


def test_default_dtype_context():
    with default_dtype(np.float32):
        assert Tensor([1.0]).dtype == np.float32
        assert ops.add(Tensor([1.0]), 1.0).dtype == np.float32
    assert get_default_dtype() == np.float64
