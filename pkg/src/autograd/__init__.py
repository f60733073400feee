from .tensor import (Tensor, Tape, backward, active_tape, default_dtype, get_default_dtype,
                     set_default_dtype, set_debug)
from . import ops
from .gradcheck import gradcheck, numerical_grad, relative_error

__all__ = [
    'Tensor', 'Tape', 'backward', 'active_tape', 'default_dtype', 'get_default_dtype',
    'set_default_dtype', 'set_debug', 'ops', 'gradcheck', 'numerical_grad', 'relative_error',
]
