"""
Teacher-to-student distillation losses
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from ..autograd import Tensor, ops
from ..errors import ConfigError, ShapeMismatch, ZeroVector

DISTILL_MODES = ('logit_kl', 'feature_cosine')
TEACHER_KINDS = ('linear_probed', 'fine_tuned')


@dataclass(frozen=True)
class DistillConfig:
    """
    Attributes:
        tau: Softening temperature for the teacher (and the student unless student_tau is set)
        mode: 'logit_kl' or 'feature_cosine'
        teacher_kind: 'linear_probed' or 'fine_tuned'
        scale_by_tau_sq: Multiply the KL term by tau^2
        student_tau: Separate student temperature, None to reuse tau
    """

    tau: float = 8.0
    mode: str = 'logit_kl'
    teacher_kind: str = 'linear_probed'
    scale_by_tau_sq: bool = True
    student_tau: Optional[float] = None

    def __post_init__(self):
        if self.tau <= 0 or (self.student_tau is not None and self.student_tau <= 0):
            raise ConfigError("distillation temperatures must be positive")
        if self.mode not in DISTILL_MODES:
            raise ConfigError(f"distill mode must be one of {DISTILL_MODES}, got '{self.mode}'")
        if self.teacher_kind not in TEACHER_KINDS:
            raise ConfigError(f"teacher_kind must be one of {TEACHER_KINDS}, got '{self.teacher_kind}'")


def soften(logits: np.ndarray, tau: float) -> np.ndarray:
    """Row-wise softmax of logits / tau"""
    scaled = np.asarray(logits, dtype=np.float64) / tau
    return np.exp(scaled - logsumexp(scaled, axis=1, keepdims=True))


def kd_loss(student_logits: Tensor, teacher_logits: np.ndarray, cfg: DistillConfig) -> Tensor:
    """
    Batch mean of KL(p_teacher || p_student); the teacher side is a constant
    """
    teacher_logits = np.asarray(teacher_logits)
    if student_logits.shape != teacher_logits.shape or student_logits.ndim != 2:
        raise ShapeMismatch(f"kd_loss: student {student_logits.shape} and teacher {teacher_logits.shape}")
    student_tau = cfg.tau if cfg.student_tau is None else cfg.student_tau
    scaled_teacher = teacher_logits.astype(np.float64) / cfg.tau
    log_p_teacher = scaled_teacher - logsumexp(scaled_teacher, axis=1, keepdims=True)
    p_teacher = np.exp(log_p_teacher)
    teacher_entropy_term = Tensor(np.sum(p_teacher * log_p_teacher, axis=1), dtype=student_logits.dtype)

    log_p_student = ops.log_softmax(ops.mul(student_logits, 1.0 / student_tau), axis=1)
    cross = ops.sum(ops.mul(log_p_student, Tensor(p_teacher, dtype=student_logits.dtype)), 1)
    loss = ops.mean(ops.sub(teacher_entropy_term, cross))
    if cfg.scale_by_tau_sq:
        loss = ops.mul(loss, cfg.tau * cfg.tau)
    return loss


def feature_distill_loss(h_s: Tensor, h_t: Tensor, proj) -> Tensor:
    """
    1 - mean cosine similarity between student features and projected teacher features
    Args:
        h_s: Student features N x d_s
        h_t: Teacher features N x D
        proj: Callable mapping N x D tensors to N x d_s (a Linear layer)
    """
    mapped = proj(h_t)
    if mapped.shape != h_s.shape:
        raise ShapeMismatch(f"feature distillation: student {h_s.shape} vs projected teacher {mapped.shape}")
    for name, t in (('student', h_s), ('projected teacher', mapped)):
        if np.any(np.linalg.norm(t.data, axis=1) < 1e-12):
            raise ZeroVector(f"{name} feature vector has (near) zero norm")
    cos = ops.sum(ops.mul(ops.l2_normalize(h_s, 1), ops.l2_normalize(mapped, 1)), 1)
    return ops.sub(1.0, ops.mean(cos))
