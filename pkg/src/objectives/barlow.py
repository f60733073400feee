"""
Barlow Twins redundancy reduction between an anchor projection and masked-view projections
"""
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from ..autograd import Tensor, ops
from ..errors import BatchTooSmall, ConfigError, ShapeMismatch

BREAKDOWN_KEYS = ('L1_theta', 'L2_theta', 'L1_phi', 'L2_phi')


@dataclass(frozen=True)
class BarlowLossConfig:
    """
    Attributes:
        lam: Weight of the off-diagonal redundancy term
        eps: Floor added to the correlation denominator
        center: Subtract the batch mean of every column before correlating
    """

    lam: float = 2e-4
    eps: float = 1e-12
    center: bool = True

    def __post_init__(self):
        if self.lam <= 0 or self.eps <= 0:
            raise ConfigError("barlow lambda and eps must be positive")


def cross_correlation(z: Tensor, z2: Tensor, eps: float = 1e-12, center: bool = True) -> Tensor:
    """
    Batch cross-correlation of two N x D projections
    C_ij = sum_b z_bi z2_bj / (sqrt(sum_b z_bi^2) sqrt(sum_b z2_bj^2) + eps)
    """
    if z.shape != z2.shape or z.ndim != 2:
        raise ShapeMismatch(f"cross_correlation: shapes {z.shape} and {z2.shape} differ")
    if z.shape[0] < 2:
        raise BatchTooSmall(f"cross_correlation needs at least 2 samples, got {z.shape[0]}")
    if center:
        z, z2 = ops.center(z, 0), ops.center(z2, 0)
    numerator = ops.matmul(ops.transpose(z, (1, 0)), z2)
    norm = ops.sqrt(ops.sum(ops.square(z), 0, keepdims=True))
    norm2 = ops.sqrt(ops.sum(ops.square(z2), 0, keepdims=True))
    denominator = ops.add(ops.matmul(ops.transpose(norm, (1, 0)), norm2), eps)
    return ops.div(numerator, denominator)


def barlow_loss(c: Tensor, lam: float = 2e-4) -> Tensor:
    """sum_i (1 - C_ii)^2 + lam * sum_{i != j} C_ij^2"""
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ShapeMismatch(f"barlow_loss needs a square matrix, got {c.shape}")
    eye = np.eye(c.shape[0])
    on_diag = ops.sum(ops.square(ops.mul(ops.sub(c, Tensor(eye, dtype=c.dtype)), Tensor(eye, dtype=c.dtype))))
    off_diag = ops.sum(ops.square(ops.mul(c, Tensor(1.0 - eye, dtype=c.dtype))))
    return ops.add(on_diag, ops.mul(off_diag, lam))


def pair_loss(anchor: Tensor, view: Tensor, cfg: BarlowLossConfig) -> Tensor:
    return barlow_loss(cross_correlation(anchor, view, cfg.eps, cfg.center), cfg.lam)


def asma_pretrain_loss(
    z_theta: Tensor, z_theta_joint: Tensor, z_theta_motion: Tensor,
    z_phi: Tensor, z_phi_joint: Tensor, z_phi_motion: Tensor,
    cfg: BarlowLossConfig,
) -> Tuple[Tensor, Dict[str, float]]:
    """
    Sum of the four anchor-to-view alignment terms across both encoders
    Returns:
        (total loss, breakdown with keys L1_theta, L2_theta, L1_phi, L2_phi, total)
    """
    shape = z_theta.shape
    for z in (z_theta_joint, z_theta_motion, z_phi, z_phi_joint, z_phi_motion):
        if z.shape != shape:
            raise ShapeMismatch(f"projections differ: {shape} and {z.shape}")
    terms = {
        'L1_theta': pair_loss(z_theta, z_theta_joint, cfg),
        'L2_theta': pair_loss(z_theta, z_theta_motion, cfg),
        'L1_phi': pair_loss(z_phi, z_phi_joint, cfg),
        'L2_phi': pair_loss(z_phi, z_phi_motion, cfg),
    }
    total = ops.add(ops.add(terms['L1_theta'], terms['L2_theta']), ops.add(terms['L1_phi'], terms['L2_phi']))
    breakdown = {key: terms[key].item() for key in BREAKDOWN_KEYS}
    breakdown['total'] = total.item()
    return total, breakdown
