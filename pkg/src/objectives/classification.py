"""
Classification losses and accuracy
"""
import numpy as np

from ..autograd import Tensor, ops
from ..errors import ShapeMismatch


def one_hot(labels: np.ndarray, num_classes: int, dtype=np.float64) -> np.ndarray:
    out = np.zeros((len(labels), num_classes), dtype=dtype)
    out[np.arange(len(labels)), labels] = 1.0
    return out


def cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean negative log-likelihood of integer labels under softmax(logits)"""
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeMismatch(f"cross_entropy: logits {logits.shape} with labels {labels.shape}")
    target = Tensor(one_hot(labels, logits.shape[1]), dtype=logits.dtype)
    nll = ops.sum(ops.mul(ops.log_softmax(logits, axis=1), target), 1)
    return ops.mul(ops.mean(nll), -1.0)


def accuracy(logits: np.ndarray, labels: np.ndarray) -> float:
    """Top-1 accuracy of class scores"""
    labels = np.asarray(labels)
    if len(labels) == 0:
        return 0.0
    return float(np.mean(np.argmax(logits, axis=1) == labels))
