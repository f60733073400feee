from .config import (TrainConfig, StageConfig, DataConfig, MaskingConfig, ProjectorSettings, AlignSettings,
                     load_config, config_from_dict, parse_override, set_dotted, STAGE_NAMES)
from .optim import Adam, AdamState, adam_step, lr_at, stage_lr
from .data import DataBundle, prepare_data, epoch_batches, eval_batches, build_views
from .loop import StageLoop
from .runs import RunRecord, RunWriter, read_run, read_metrics, run_config
from .stages import (pretrain, linear_probe, finetune, distill_stage, load_teacher, new_student,
                     train_alignment, train_linear_head)
from .evaluation import evaluate, fuse_scores, eval_3stream
from .experiments import (ablation_grid, mask_count_ablation, multi_seed, summarize, tau_sweep,
                          student_depth_sweep)

__all__ = [
    'TrainConfig', 'StageConfig', 'DataConfig', 'MaskingConfig', 'ProjectorSettings', 'AlignSettings',
    'load_config', 'config_from_dict', 'parse_override', 'set_dotted', 'STAGE_NAMES',
    'Adam', 'AdamState', 'adam_step', 'lr_at', 'stage_lr',
    'DataBundle', 'prepare_data', 'epoch_batches', 'eval_batches', 'build_views',
    'StageLoop',
    'RunRecord', 'RunWriter', 'read_run', 'read_metrics', 'run_config',
    'pretrain', 'linear_probe', 'finetune', 'distill_stage', 'load_teacher', 'new_student',
    'train_alignment', 'train_linear_head',
    'evaluate', 'fuse_scores', 'eval_3stream',
    'ablation_grid', 'mask_count_ablation', 'multi_seed', 'summarize', 'tau_sweep', 'student_depth_sweep',
]
