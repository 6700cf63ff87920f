'''
Learning-rate grid search.

Every rate trains a fresh model from the same factory and seed; runs are
ranked by a metric (lower is better) and ties go to the larger rate.  A
run that fails with a package error is recorded and the sweep moves on.
'''

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import polars as pl

from baby_hgrn.data.packing import PackedDataset
from baby_hgrn.errors import BabyHGRNError, TrainingError, UsageError
from baby_hgrn.models.lm import CausalLM
from baby_hgrn.training.config import TrainConfig
from baby_hgrn.training.trainer import TrainReport, train
from baby_hgrn.utils.helpers import PathLike, write_json

logger = logging.getLogger(__name__)

DEFAULT_GRID = (1e-3, 1e-4, 1e-5, 1e-6)

MetricFn = Callable[[TrainReport], float]


def _valid_ce(report: TrainReport) -> float:
    value = report.final_valid_ce
    return report.final_ce if value is None else value


def _train_ce(report: TrainReport) -> float:
    return report.final_ce


METRICS: Dict[str, MetricFn] = {
    'valid_ce': _valid_ce,
    'train_ce': _train_ce,
}


@dataclass
class SweepResult:
    learning_rate: float
    metric: Optional[float] = None
    status: str = 'ok'
    error: Optional[str] = None
    report: Optional[TrainReport] = None

    @property
    def ok(self) -> bool:
        return self.status == 'ok'


@dataclass
class SweepReport:
    '''Ranked sweep outcome; ``winner`` is ``None`` when every run failed.'''

    results: List[SweepResult] = field(default_factory=list)
    metric_name: str = 'valid_ce'
    winner: Optional[float] = None

    @property
    def ranked(self) -> List[SweepResult]:
        done = [r for r in self.results if r.ok]
        done.sort(key=lambda r: (r.metric, -r.learning_rate))
        return done + [r for r in self.results if not r.ok]

    @property
    def failures(self) -> List[SweepResult]:
        return [r for r in self.results if not r.ok]

    def to_table(self) -> pl.DataFrame:
        rows = []
        for rank, result in enumerate(self.ranked, start=1):
            rows.append(
                {
                    'Rank': rank if result.ok else None,
                    'Learning rate': result.learning_rate,
                    self.metric_name: result.metric,
                    'Status': result.status,
                    'Error': result.error or '',
                }
            )
        return pl.DataFrame(rows)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'metric': self.metric_name,
            'winner': self.winner,
            'results': [
                {
                    'learning_rate': r.learning_rate,
                    'metric': r.metric,
                    'status': r.status,
                    'error': r.error,
                    'final_checkpoint': r.report.final_checkpoint if r.report else None,
                }
                for r in self.ranked
            ],
        }

    def save(self, path: PathLike) -> str:
        return write_json(self.to_dict(), path)


def lr_sweep(
    model_factory: Callable[[], CausalLM],
    dataset: PackedDataset,
    cfg: TrainConfig,
    grid: Sequence[float] = DEFAULT_GRID,
    metric: Union[str, MetricFn] = 'valid_ce',
    out_dir: Optional[PathLike] = None,
    validation: Optional[PackedDataset] = None,
) -> SweepReport:
    '''
    Train one model per learning rate and rank the runs.

    Args:
        model_factory: Returns a freshly initialized model for each run.
        dataset: Training chunks, shared by every run.
        cfg: Base config; only ``learning_rate`` varies.
        grid: Rates to try.
        metric: ``"valid_ce"``, ``"train_ce"`` or a callable on the
            :class:`TrainReport`; lower is better.
        out_dir: Parent directory; each run writes to ``lr-<rate>/``.
        validation: Held-out chunks for ``"valid_ce"``.

    Raises:
        UsageError: On an empty grid or an unknown metric name.
    '''
    rates = list(dict.fromkeys(float(lr) for lr in grid))
    if not rates:
        raise UsageError('Learning-rate grid is empty')
    if callable(metric):
        metric_fn, metric_name = metric, getattr(metric, '__name__', 'metric')
    else:
        if metric not in METRICS:
            raise UsageError(
                f'Unknown sweep metric {metric!r}. Available: {list(METRICS)}'
            )
        metric_fn, metric_name = METRICS[metric], metric

    sweep = SweepReport(metric_name=metric_name)
    for lr in rates:
        run_dir = Path(out_dir) / f'lr-{lr:g}' if out_dir is not None else None
        try:
            report = train(
                model_factory(),
                dataset,
                replace(cfg, learning_rate=lr),
                out_dir=run_dir,
                validation=validation,
            )
            value = float(metric_fn(report))
            if not math.isfinite(value):
                raise TrainingError(f'metric {metric_name} is {value}')
        except BabyHGRNError as exc:
            logger.warning('Sweep run lr=%g failed: %s', lr, exc)
            sweep.results.append(
                SweepResult(lr, status='failed', error=f'[{exc.category}] {exc}')
            )
            continue
        logger.info('Sweep run lr=%g: %s = %.4f', lr, metric_name, value)
        sweep.results.append(SweepResult(lr, metric=value, report=report))

    ranked = sweep.ranked
    sweep.winner = ranked[0].learning_rate if ranked and ranked[0].ok else None
    if out_dir is not None:
        sweep.save(Path(out_dir) / 'sweep.json')
    return sweep
