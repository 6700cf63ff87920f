'''
Two-phase knowledge distillation: train (or load) a teacher, then train a
student on the blended CE + KL objective with the teacher frozen.
'''

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from baby_hgrn.data.packing import PackedDataset
from baby_hgrn.errors import ConfigError
from baby_hgrn.models.checkpoint import load_checkpoint
from baby_hgrn.models.config import ModelConfig
from baby_hgrn.models.lm import build_model
from baby_hgrn.training.config import DistillConfig, TrainConfig
from baby_hgrn.training.trainer import TrainReport, train
from baby_hgrn.utils.helpers import PathLike

logger = logging.getLogger(__name__)


@dataclass
class DistillResult:
    student_report: TrainReport
    student_checkpoint: Optional[str]
    teacher_report: Optional[TrainReport] = None
    teacher_checkpoint: Optional[str] = None


def distill_pipeline(
    teacher_config: Optional[ModelConfig],
    student_config: ModelConfig,
    dataset: PackedDataset,
    cfg: TrainConfig,
    distill: DistillConfig,
    out_dir: Optional[PathLike] = None,
    validation: Optional[PackedDataset] = None,
) -> DistillResult:
    '''
    Produce a distilled student.

    When ``distill.teacher_checkpoint`` is set the teacher is loaded from it
    and ``teacher_config`` may be ``None``; otherwise a teacher is first
    trained with plain cross-entropy under ``cfg``.  The student starts from
    ``distill.student_seed`` (default ``cfg.seed + 1``), which also seeds its
    data order.

    Args:
        teacher_config: Architecture of the teacher to train in phase one.
        student_config: Architecture of the student.
        dataset: Training chunks for both phases.
        cfg: Shared training hyperparameters.
        distill: Blend weight, temperature and optional teacher checkpoint.
        out_dir: Receives ``teacher/`` and ``student/`` run directories.
        validation: Held-out chunks for per-epoch validation CE.

    Raises:
        ConfigError: Neither a teacher checkpoint nor a teacher config, or
            teacher and student vocabularies differ.
    '''
    distill.validate()
    root = Path(out_dir) if out_dir is not None else None
    teacher_report = None
    if distill.teacher_checkpoint:
        teacher = load_checkpoint(distill.teacher_checkpoint)
        teacher_checkpoint = distill.teacher_checkpoint
        logger.info('Loaded teacher from %s', teacher_checkpoint)
    else:
        if teacher_config is None:
            raise ConfigError(
                'Distillation needs a teacher config or teacher_checkpoint'
            )
        if teacher_config.vocab_size != student_config.vocab_size:
            raise ConfigError(
                f'Teacher vocabulary ({teacher_config.vocab_size}) differs from '
                f'student vocabulary ({student_config.vocab_size})'
            )
        logger.info('Phase 1: training %s teacher', teacher_config.architecture)
        teacher = build_model(teacher_config, seed=cfg.seed)
        teacher_report = train(
            teacher,
            dataset,
            cfg,
            out_dir=root / 'teacher' if root is not None else None,
            validation=validation,
        )
        teacher_checkpoint = teacher_report.final_checkpoint

    teacher.eval()
    student_seed = distill.student_seed
    if student_seed is None:
        student_seed = cfg.seed + 1
    logger.info(
        'Phase 2: distilling into %s student (alpha=%g, temperature=%g, seed=%d)',
        student_config.architecture,
        distill.alpha,
        distill.temperature,
        student_seed,
    )
    student = build_model(student_config, seed=student_seed)
    student_report = train(
        student,
        dataset,
        replace(cfg, seed=student_seed),
        distill=distill,
        teacher=teacher,
        out_dir=root / 'student' if root is not None else None,
        validation=validation,
    )
    return DistillResult(
        student_report=student_report,
        student_checkpoint=student_report.final_checkpoint,
        teacher_report=teacher_report,
        teacher_checkpoint=teacher_checkpoint,
    )
