"""
Parameter containers
A Module owns named parameters (Tensors updated by the optimizer), buffers (numpy
arrays such as batch-norm running statistics) and child modules.
"""
import hashlib
from collections import OrderedDict
from typing import Dict, Iterator, List, Tuple

import numpy as np

from ..autograd import Tensor, get_default_dtype
from ..errors import CheckpointMismatch


def uniform_init(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int) -> np.ndarray:
    """Fan-in scaled uniform initialization in [-1/sqrt(fan_in), 1/sqrt(fan_in)]"""
    bound = 1.0 / np.sqrt(max(fan_in, 1))
    return rng.uniform(-bound, bound, size=shape)


class Module:
    """Base class for every trainable component"""

    def __init__(self):
        self._params: Dict[str, Tensor] = OrderedDict()
        self._buffers: Dict[str, np.ndarray] = OrderedDict()
        self._children: Dict[str, 'Module'] = OrderedDict()
        self.training = True

    def add_param(self, name: str, data: np.ndarray) -> Tensor:
        tensor = Tensor(data, requires_grad=True, dtype=get_default_dtype(), name=name)
        self._params[name] = tensor
        return tensor

    def add_buffer(self, name: str, data: np.ndarray) -> np.ndarray:
        array = np.array(data, dtype=get_default_dtype(), copy=True)
        self._buffers[name] = array
        return array

    def add_child(self, name: str, module: 'Module') -> 'Module':
        self._children[name] = module
        return module

    def named_parameters(self, prefix: str = '') -> Iterator[Tuple[str, Tensor]]:
        for name, tensor in self._params.items():
            yield prefix + name, tensor
        for child_name, child in self._children.items():
            yield from child.named_parameters(f"{prefix}{child_name}.")

    def named_buffers(self, prefix: str = '') -> Iterator[Tuple[str, np.ndarray]]:
        for name, array in self._buffers.items():
            yield prefix + name, array
        for child_name, child in self._children.items():
            yield from child.named_buffers(f"{prefix}{child_name}.")

    def parameters(self) -> List[Tensor]:
        return [t for _, t in self.named_parameters()]

    def count_params(self) -> int:
        """Number of learnable scalars"""
        return int(sum(t.size for t in self.parameters()))

    def state_dict(self) -> Dict[str, np.ndarray]:
        state = OrderedDict((name, t.data) for name, t in self.named_parameters())
        state.update(self.named_buffers())
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray], strict: bool = True):
        """
        Copy values in place from a state dict
        Args:
            state: Name to array mapping
            strict: Fail on missing or unexpected names
        """
        own = self.state_dict()
        if strict:
            missing = sorted(set(own) - set(state))
            unexpected = sorted(set(state) - set(own))
            if missing or unexpected:
                raise CheckpointMismatch(f"state dict mismatch (missing {missing}, unexpected {unexpected})")
        for name, target in own.items():
            if name not in state:
                continue
            value = np.asarray(state[name])
            if value.shape != target.shape:
                raise CheckpointMismatch(f"'{name}' has shape {value.shape}, expected {target.shape}")
            target[...] = value

    def train(self, mode: bool = True) -> 'Module':
        self.training = mode
        for child in self._children.values():
            child.train(mode)
        return self

    def eval(self) -> 'Module':
        return self.train(False)

    def requires_grad_(self, flag: bool) -> 'Module':
        for t in self.parameters():
            t.requires_grad = flag
        return self

    def zero_grad(self):
        for t in self.parameters():
            t.zero_grad()

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


def parameter_fingerprint(module: Module) -> str:
    """SHA-256 over every parameter and buffer, used to prove a component stayed frozen"""
    h = hashlib.sha256()
    for name, array in module.state_dict().items():
        h.update(name.encode('utf-8'))
        h.update(np.ascontiguousarray(array).tobytes())
    return h.hexdigest()
