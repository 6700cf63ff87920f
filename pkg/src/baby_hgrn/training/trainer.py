'''
The training loop: cross-entropy or distillation, Adam, linear decay.

Per step the trainer draws ``batch_size`` chunks in the epoch's shuffled
order, predicts ``chunk[1:]`` from ``chunk[:-1]``, clips the global
gradient norm and applies one Adam update.  When an output directory is
given it appends one JSON line per step to ``metrics.jsonl``, writes
``checkpoint-epoch<N>.bin`` after every epoch, ``checkpoint-final.bin``
at the end and the :class:`TrainReport` as ``report.json``.
'''

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from baby_hgrn.data.packing import PackedDataset
from baby_hgrn.errors import (
    ConfigError,
    DataError,
    NumericError,
    TrainingError,
    UsageError,
)
from baby_hgrn.models.checkpoint import load_checkpoint, save_checkpoint
from baby_hgrn.models.lm import CausalLM
from baby_hgrn.tensor import backward, no_grad
from baby_hgrn.training.config import DistillConfig, TrainConfig
from baby_hgrn.training.losses import ce_loss, kd_loss, total_loss
from baby_hgrn.training.optim import Adam, clip_grad_norm, linear_schedule
from baby_hgrn.utils.helpers import PathLike, append_jsonl, load_json, write_json

logger = logging.getLogger(__name__)

EpochCallback = Callable[[int, CausalLM], Optional[float]]


@dataclass
class EpochStats:
    '''Summary of one epoch; ``score`` is what the epoch callback returned.'''

    epoch: int
    train_ce: float
    train_perplexity: float
    valid_ce: Optional[float] = None
    valid_perplexity: Optional[float] = None
    score: Optional[float] = None
    checkpoint: Optional[str] = None
    seconds: float = 0.0


@dataclass
class TrainReport:
    '''
    Outcome of one training run.

    ``step_losses`` holds the optimized objective (the blended loss when
    distilling) and ``step_ce`` the plain cross-entropy, both measured
    before each update.
    '''

    step_losses: List[float] = field(default_factory=list)
    step_ce: List[float] = field(default_factory=list)
    learning_rates: List[float] = field(default_factory=list)
    epochs: List[EpochStats] = field(default_factory=list)
    tokens: int = 0
    wall_clock: float = 0.0
    final_checkpoint: Optional[str] = None
    best_epoch: Optional[int] = None
    alpha: float = 0.0

    @property
    def steps(self) -> int:
        return len(self.step_losses)

    @property
    def final_ce(self) -> float:
        return self.epochs[-1].train_ce if self.epochs else float('nan')

    @property
    def final_valid_ce(self) -> Optional[float]:
        return self.epochs[-1].valid_ce if self.epochs else None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['steps'] = self.steps
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TrainReport':
        data = {k: v for k, v in data.items() if k != 'steps'}
        epochs = [EpochStats(**e) for e in data.pop('epochs', [])]
        return cls(epochs=epochs, **data)

    def save(self, path: PathLike) -> str:
        return write_json(self.to_dict(), path)

    @classmethod
    def load(cls, path: PathLike) -> 'TrainReport':
        return cls.from_dict(load_json(path))


def dataset_ce(model: CausalLM, dataset: PackedDataset, batch_size: int = 64) -> float:
    '''
    Token-weighted mean next-token CE of ``model`` over ``dataset`` (nats).

    Raises:
        DataError: If the dataset holds no next-token targets.
    '''
    if dataset.chunk_count == 0 or dataset.chunk_len < 2:
        raise DataError(
            f'Cannot score an empty dataset ({dataset.chunk_count} chunks of '
            f'length {dataset.chunk_len})'
        )
    was_training = model.training
    model.eval()
    total, count = 0.0, 0
    try:
        with no_grad():
            for start in range(0, dataset.chunk_count, batch_size):
                batch = dataset.chunks[start : start + batch_size].astype(np.int64)
                logits, _ = model(batch[:, :-1])
                n = batch[:, 1:].size
                total += ce_loss(logits, batch[:, 1:]).item() * n
                count += n
    finally:
        model.train(was_training)
    return total / count


class Trainer:
    '''
    Runs :func:`train`.  Holds the optimizer and teacher for one run.

    Args:
        model: Student (or plain) model to optimize.
        cfg: Training hyperparameters.
        distill: Distillation settings; enables the KD term.
        teacher: Frozen teacher; loaded from ``distill.teacher_checkpoint``
            when omitted.
        out_dir: Where metrics, checkpoints and the report go.
        validation: Held-out chunks scored after each epoch.
        epoch_callback: ``(epoch, model) -> score`` (higher is better),
            used to pick ``best_epoch``.
    '''

    def __init__(
        self,
        model: CausalLM,
        cfg: TrainConfig,
        distill: Optional[DistillConfig] = None,
        teacher: Optional[CausalLM] = None,
        out_dir: Optional[PathLike] = None,
        validation: Optional[PackedDataset] = None,
        epoch_callback: Optional[EpochCallback] = None,
    ) -> None:
        self.model = model
        self.cfg = cfg.validate()
        self.distill = distill.validate() if distill is not None else None
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.validation = validation
        self.epoch_callback = epoch_callback
        self.teacher = teacher
        if self.distill is not None and self.teacher is None:
            if not self.distill.teacher_checkpoint:
                raise ConfigError(
                    'Distillation needs a teacher model or teacher_checkpoint'
                )
            self.teacher = load_checkpoint(self.distill.teacher_checkpoint)
        if self.teacher is not None:
            if self.teacher.vocab_size != model.vocab_size:
                raise ConfigError(
                    f'Teacher vocabulary ({self.teacher.vocab_size}) differs from '
                    f'student vocabulary ({model.vocab_size})'
                )
            self.teacher.eval()
        self.optimizer = Adam(
            model.parameters(),
            lr=cfg.learning_rate,
            betas=(cfg.beta1, cfg.beta2),
            eps=cfg.eps,
        )

    def _check_dataset(self, dataset: PackedDataset) -> None:
        if dataset.chunk_count == 0:
            raise UsageError('Cannot train on an empty dataset')
        if dataset.vocab_size > self.model.vocab_size:
            raise ConfigError(
                f'Dataset vocabulary ({dataset.vocab_size}) exceeds model vocabulary '
                f'({self.model.vocab_size})'
            )
        if dataset.chunk_len != self.cfg.sequence_length:
            raise ConfigError(
                f'sequence_length {self.cfg.sequence_length} does not match the '
                f'dataset chunk length {dataset.chunk_len}'
            )

    def _step_loss(self, batch: np.ndarray):
        inputs, targets = batch[:, :-1], batch[:, 1:]
        logits, _ = self.model(inputs)
        ce = ce_loss(logits, targets)
        if self.distill is None:
            return ce, ce
        with no_grad():
            teacher_logits, _ = self.teacher(inputs)
        kd = kd_loss(teacher_logits, logits, self.distill.temperature)
        return total_loss(ce, kd, self.distill.alpha), ce

    def train(self, dataset: PackedDataset) -> TrainReport:
        self._check_dataset(dataset)
        cfg = self.cfg
        n_chunks = dataset.chunk_count
        steps_per_epoch = math.ceil(n_chunks / cfg.batch_size)
        total_steps = cfg.epochs * steps_per_epoch
        rng = np.random.default_rng(cfg.seed)
        params = self.model.parameters()
        report = TrainReport(alpha=self.distill.alpha if self.distill else 0.0)
        metrics_path = None
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            metrics_path = self.out_dir / 'metrics.jsonl'
            metrics_path.write_text('')

        logger.info(
            'Training %d epochs x %d steps on %d chunks of %d tokens',
            cfg.epochs,
            steps_per_epoch,
            n_chunks,
            dataset.chunk_len,
        )
        self.model.train()
        started = time.perf_counter()
        step = 0
        for epoch in range(1, cfg.epochs + 1):
            epoch_started = time.perf_counter()
            order = rng.permutation(n_chunks)
            ce_sum, token_sum = 0.0, 0
            for start in range(0, n_chunks, cfg.batch_size):
                step_started = time.perf_counter()
                rows = order[start : start + cfg.batch_size]
                batch = dataset.chunks[rows].astype(np.int64)
                lr = (
                    linear_schedule(cfg.learning_rate, step, total_steps)
                    if cfg.scheduler == 'linear'
                    else cfg.learning_rate
                )
                self.optimizer.zero_grad()
                try:
                    loss, ce = self._step_loss(batch)
                    loss_value, ce_value = loss.item(), ce.item()
                    if not (math.isfinite(loss_value) and math.isfinite(ce_value)):
                        raise NumericError('loss is not finite')
                    backward(loss)
                except NumericError as exc:
                    raise TrainingError(
                        f'Training aborted at step {step}: {exc}'
                    ) from exc
                grad_norm = clip_grad_norm(params, cfg.max_grad_norm)
                if not math.isfinite(grad_norm):
                    raise TrainingError(
                        f'Training aborted at step {step}: gradient norm is {grad_norm}'
                    )
                self.optimizer.step(lr)

                n_tokens = batch[:, 1:].size
                ce_sum += ce_value * n_tokens
                token_sum += n_tokens
                report.step_losses.append(loss_value)
                report.step_ce.append(ce_value)
                report.learning_rates.append(lr)
                report.tokens += n_tokens
                elapsed = time.perf_counter() - step_started
                if metrics_path is not None:
                    append_jsonl(
                        metrics_path,
                        {
                            'step': step,
                            'epoch': epoch,
                            'lr': lr,
                            'loss': loss_value,
                            'ce': ce_value,
                            'grad_norm': grad_norm,
                            'tokens_per_sec': (
                                n_tokens / elapsed if elapsed > 0 else None
                            ),
                        },
                    )
                if step % cfg.log_every == 0:
                    logger.debug(
                        'step %d lr %.3g loss %.4f ce %.4f grad_norm %.3f',
                        step,
                        lr,
                        loss_value,
                        ce_value,
                        grad_norm,
                    )
                step += 1

            stats = self._finish_epoch(epoch, ce_sum / token_sum, epoch_started)
            report.epochs.append(stats)

        report.wall_clock = time.perf_counter() - started
        report.best_epoch = _best_epoch(report.epochs)
        if self.out_dir is not None:
            report.final_checkpoint = save_checkpoint(
                self.model, self.out_dir / 'checkpoint-final.bin'
            )
            report.save(self.out_dir / 'report.json')
        return report

    def _finish_epoch(self, epoch: int, train_ce: float, started: float) -> EpochStats:
        stats = EpochStats(
            epoch=epoch, train_ce=train_ce, train_perplexity=math.exp(train_ce)
        )
        if self.validation is not None:
            stats.valid_ce = dataset_ce(
                self.model, self.validation, self.cfg.batch_size
            )
            stats.valid_perplexity = math.exp(stats.valid_ce)
        if self.epoch_callback is not None:
            self.model.eval()
            try:
                score = self.epoch_callback(epoch, self.model)
            finally:
                self.model.train()
            stats.score = None if score is None else float(score)
        if self.out_dir is not None:
            stats.checkpoint = save_checkpoint(
                self.model, self.out_dir / f'checkpoint-epoch{epoch}.bin'
            )
        stats.seconds = time.perf_counter() - started
        logger.info(
            'Epoch %d: train CE %.4f (ppl %.2f)%s',
            epoch,
            train_ce,
            stats.train_perplexity,
            '' if stats.valid_ce is None else f', valid CE {stats.valid_ce:.4f}',
        )
        return stats


def _best_epoch(epochs: List[EpochStats]) -> Optional[int]:
    if not epochs:
        return None
    if all(e.score is not None for e in epochs):
        return max(epochs, key=lambda e: (e.score, -e.epoch)).epoch
    if all(e.valid_ce is not None for e in epochs):
        return min(epochs, key=lambda e: (e.valid_ce, e.epoch)).epoch
    return min(epochs, key=lambda e: (e.train_ce, e.epoch)).epoch


def train(
    model: CausalLM,
    dataset: PackedDataset,
    cfg: TrainConfig,
    distill: Optional[DistillConfig] = None,
    teacher: Optional[CausalLM] = None,
    out_dir: Optional[PathLike] = None,
    validation: Optional[PackedDataset] = None,
    epoch_callback: Optional[EpochCallback] = None,
) -> TrainReport:
    '''
    Train ``model`` on ``dataset``.

    Raises:
        ConfigError: Invalid config, mismatched sequence length, or a
            teacher whose vocabulary differs from the student's.
        TrainingError: A non-finite loss; the message names the step.
    '''
    trainer = Trainer(
        model,
        cfg,
        distill=distill,
        teacher=teacher,
        out_dir=out_dir,
        validation=validation,
        epoch_callback=epoch_callback,
    )
    return trainer.train(dataset)
