"""
Dense tensors recorded on a reverse-mode differentiation tape

Operations only record while a Tape is active (``with Tape():``) and at least one
input requires gradients; outside a tape every op is a plain forward evaluation.
"""
import contextlib
import threading
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import NoTape, NonFiniteDetected, NotScalar

_state = threading.local()


def _stack() -> list:
    if not hasattr(_state, 'tapes'):
        _state.tapes = []
    return _state.tapes


def get_default_dtype():
    return getattr(_state, 'dtype', np.float64)


def set_default_dtype(dtype):
    _state.dtype = np.dtype(dtype).type


@contextlib.contextmanager
def default_dtype(dtype):
    """Temporarily change the dtype new tensors are created with"""
    previous = get_default_dtype()
    set_default_dtype(dtype)
    try:
        yield
    finally:
        set_default_dtype(previous)


def set_debug(enabled: bool):
    """In debug mode every op checks its output for NaN/Inf"""
    _state.debug = bool(enabled)


def debug_enabled() -> bool:
    return getattr(_state, 'debug', False)


class Tensor:
    """
    N-dimensional float array with an optional gradient
    Attributes:
        data: Row-major numpy array holding the values
        requires_grad: Whether gradients flow into this tensor
        grad: Accumulated gradient of the same shape, or None
        tape_node: Node that produced this tensor, None for leaves
    """

    __slots__ = ('data', 'requires_grad', 'grad', 'tape_node', 'name')

    def __init__(self, data, requires_grad: bool = False, dtype=None, name: str = ''):
        dtype = dtype or get_default_dtype()
        self.data = np.array(data, dtype=dtype, copy=True)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.tape_node: Optional['Node'] = None
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def zero_grad(self):
        self.grad = None

    def detach(self) -> 'Tensor':
        return Tensor(self.data, dtype=self.data.dtype)

    def __repr__(self):
        flag = ', requires_grad=True' if self.requires_grad else ''
        return f"Tensor(shape={self.shape}{flag})"

    # operator sugar, resolved lazily to avoid an import cycle
    def __add__(self, other):
        from .ops import add
        return add(self, other)

    def __radd__(self, other):
        from .ops import add
        return add(other, self)

    def __sub__(self, other):
        from .ops import sub
        return sub(self, other)

    def __rsub__(self, other):
        from .ops import sub
        return sub(other, self)

    def __mul__(self, other):
        from .ops import mul
        return mul(self, other)

    def __rmul__(self, other):
        from .ops import mul
        return mul(other, self)

    def __truediv__(self, other):
        from .ops import div
        return div(self, other)

    def __neg__(self):
        from .ops import mul
        return mul(self, -1.0)

    def __matmul__(self, other):
        from .ops import matmul
        return matmul(self, other)


class Node:
    """One recorded primitive application"""

    __slots__ = ('output', 'inputs', 'backward_fn', 'tape', 'index')

    def __init__(self, output: Tensor, inputs: Sequence[Tensor], backward_fn: Callable, tape: 'Tape', index: int):
        self.output = output
        self.inputs = tuple(inputs)
        self.backward_fn = backward_fn
        self.tape = tape
        self.index = index


class Tape:
    """Ordered record of primitive applications; nodes only ever follow their inputs"""

    def __init__(self):
        self.nodes: List[Node] = []
        self.consumed = False

    def __enter__(self) -> 'Tape':
        _stack().append(self)
        return self

    def __exit__(self, *exc):
        _stack().remove(self)
        return False

    def record(self, output: Tensor, inputs: Sequence[Tensor], backward_fn: Callable) -> Node:
        node = Node(output, inputs, backward_fn, self, len(self.nodes))
        self.nodes.append(node)
        output.tape_node = node
        output.requires_grad = True
        return node

    def release(self):
        for node in self.nodes:
            node.output.tape_node = None
        self.nodes = []
        self.consumed = True


def active_tape() -> Optional[Tape]:
    tapes = _stack()
    return tapes[-1] if tapes else None


def make_result(value: np.ndarray, inputs: Sequence[Tensor], backward_fn: Callable) -> Tensor:
    """
    Wrap a forward value, recording a node when a tape is active and an input needs grads
    Args:
        value: Forward output
        inputs: Tensor inputs of the primitive
        backward_fn: Maps the output gradient to a tuple of input gradients (None to skip)
    """
    dtype = inputs[0].data.dtype if inputs else get_default_dtype()
    out = Tensor.__new__(Tensor)
    out.data = np.asarray(value, dtype=dtype)
    out.requires_grad = False
    out.grad = None
    out.tape_node = None
    out.name = ''
    if debug_enabled() and not np.all(np.isfinite(out.data)):
        raise NonFiniteDetected(f"non-finite values produced by {backward_fn.__qualname__.split('.')[0]}")
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        tape.record(out, inputs, backward_fn)
    return out


def backward(loss: Tensor):
    """
    Populate .grad of every leaf that requires gradients with d(loss)/d(leaf)
    Leaf gradients accumulate across calls; the tape is consumed.
    """
    if loss.size != 1:
        raise NotScalar(f"backward needs a scalar loss, got shape {loss.shape}")
    node = loss.tape_node
    if node is None:
        raise NoTape("loss was not produced under an active tape")
    tape = node.tape
    if tape.consumed:
        raise NoTape("tape has already been consumed")

    grads = {id(loss): np.ones_like(loss.data)}
    for current in reversed(tape.nodes[:node.index + 1]):
        g = grads.pop(id(current.output), None)
        if g is None:
            continue
        input_grads = current.backward_fn(g)
        for inp, ig in zip(current.inputs, input_grads):
            if ig is None or not inp.requires_grad:
                continue
            if ig.shape != inp.shape:
                raise AssertionError(f"gradient shape {ig.shape} != input shape {inp.shape}")
            if inp.tape_node is None:
                inp.grad = ig.astype(inp.data.dtype, copy=True) if inp.grad is None else inp.grad + ig
            else:
                key = id(inp)
                grads[key] = grads[key] + ig if key in grads else ig
    tape.release()
