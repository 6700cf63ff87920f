'''
Evaluation reports: per-task and per-tag accuracy, perplexity and the
macro average, as JSON and as a polars table.
'''

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence

import polars as pl

from baby_hgrn.data.packing import PackedDataset
from baby_hgrn.evaluation.scoring import (
    TaskResult,
    eval_choice,
    eval_minimal_pairs,
    macro_average,
    perplexity,
)
from baby_hgrn.evaluation.tasks import ChoiceInstance, MinimalPair
from baby_hgrn.models.lm import CausalLM
from baby_hgrn.utils.helpers import PathLike, to_table, write_json

logger = logging.getLogger(__name__)

MACRO_CAVEAT = (
    'Macro average is the unweighted mean of task accuracies; '
    'tasks differ in size and are weighted equally.'
)


@dataclass
class EvalReport:
    model: str = ''
    tasks: Dict[str, TaskResult] = field(default_factory=dict)
    perplexity: Optional[float] = None
    norm: str = 'none'

    @property
    def scores(self) -> Dict[str, float]:
        return {name: result.accuracy for name, result in self.tasks.items()}

    @property
    def macro(self) -> Optional[float]:
        return macro_average(self.scores) if self.tasks else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'model': self.model,
            'norm': self.norm,
            'tasks': {name: result.to_dict() for name, result in self.tasks.items()},
            'perplexity': self.perplexity,
            'macro_average': self.macro,
            'caveat': MACRO_CAVEAT,
        }

    def to_table(self) -> pl.DataFrame:
        '''One row per task, one per tag under it, then the macro average.'''
        rows: List[Dict[str, Any]] = []
        for name, result in self.tasks.items():
            rows.append(
                {
                    'Task': name,
                    'Tag': '(all)',
                    'Correct': result.correct,
                    'Total': result.total,
                    'Accuracy (%)': round(result.accuracy, 1),
                    'Ties': len(result.ties),
                }
            )
            if len(result.by_tag) > 1:
                for tag, acc in result.tag_accuracy().items():
                    counts = result.by_tag[tag]
                    rows.append(
                        {
                            'Task': name,
                            'Tag': tag,
                            'Correct': counts['correct'],
                            'Total': counts['total'],
                            'Accuracy (%)': round(acc, 1),
                            'Ties': None,
                        }
                    )
        if self.tasks:
            rows.append(
                {
                    'Task': 'Macro average',
                    'Tag': '',
                    'Correct': None,
                    'Total': None,
                    'Accuracy (%)': round(self.macro, 1),
                    'Ties': None,
                }
            )
        schema = {
            'Task': pl.Utf8,
            'Tag': pl.Utf8,
            'Correct': pl.Int64,
            'Total': pl.Int64,
            'Accuracy (%)': pl.Float64,
            'Ties': pl.Int64,
        }
        return to_table(rows, schema)

    def save(self, path: PathLike) -> str:
        return write_json(self.to_dict(), path)


def evaluate(
    scorer: Any,
    pair_tasks: Optional[Mapping[str, Sequence[MinimalPair]]] = None,
    choice_tasks: Optional[Mapping[str, Sequence[ChoiceInstance]]] = None,
    norm: str = 'none',
    workers: int = 1,
    model: Optional[CausalLM] = None,
    dataset: Optional[PackedDataset] = None,
    model_id: str = '',
) -> EvalReport:
    '''
    Run any subset of minimal-pair tasks, choice tasks and perplexity.

    Perplexity needs both ``model`` and ``dataset``.
    '''
    report = EvalReport(model=model_id, norm=norm)
    for name, pairs in (pair_tasks or {}).items():
        report.tasks[name] = eval_minimal_pairs(scorer, pairs, norm, workers, name=name)
    for name, instances in (choice_tasks or {}).items():
        report.tasks[name] = eval_choice(scorer, instances, norm, workers, name=name)
    if model is not None and dataset is not None:
        report.perplexity = perplexity(model, dataset)
        logger.info('Perplexity: %.3f', report.perplexity)
    return report
