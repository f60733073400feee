from .barlow import (BarlowLossConfig, cross_correlation, barlow_loss, pair_loss, asma_pretrain_loss,
                     BREAKDOWN_KEYS)
from .classification import cross_entropy, accuracy, one_hot
from .distill import (DistillConfig, soften, kd_loss, feature_distill_loss, DISTILL_MODES, TEACHER_KINDS)

__all__ = [
    'BarlowLossConfig', 'cross_correlation', 'barlow_loss', 'pair_loss', 'asma_pretrain_loss',
    'BREAKDOWN_KEYS',
    'cross_entropy', 'accuracy', 'one_hot',
    'DistillConfig', 'soften', 'kd_loss', 'feature_distill_loss', 'DISTILL_MODES', 'TEACHER_KINDS',
]
