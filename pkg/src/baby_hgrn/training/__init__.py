'''
Objectives, optimizer and training loops.
'''

from baby_hgrn.training.config import SCHEDULERS, DistillConfig, TrainConfig
from baby_hgrn.training.distill import DistillResult, distill_pipeline
from baby_hgrn.training.losses import ce_loss, kd_loss, total_loss
from baby_hgrn.training.optim import (
    Adam,
    clip_grad_norm,
    global_grad_norm,
    linear_schedule,
)
from baby_hgrn.training.sweep import (
    DEFAULT_GRID,
    METRICS,
    SweepReport,
    SweepResult,
    lr_sweep,
)
from baby_hgrn.training.trainer import (
    EpochStats,
    Trainer,
    TrainReport,
    dataset_ce,
    train,
)

__all__ = [
    'Adam',
    'DEFAULT_GRID',
    'DistillConfig',
    'DistillResult',
    'EpochStats',
    'METRICS',
    'SCHEDULERS',
    'SweepReport',
    'SweepResult',
    'TrainConfig',
    'TrainReport',
    'Trainer',
    'ce_loss',
    'clip_grad_norm',
    'dataset_ce',
    'distill_pipeline',
    'global_grad_norm',
    'kd_loss',
    'linear_schedule',
    'lr_sweep',
    'total_loss',
]
