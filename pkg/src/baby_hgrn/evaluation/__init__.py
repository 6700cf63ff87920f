'''
Zero-shot evaluation: minimal pairs, k-way choices, perplexity and
macro-averaged reports.
'''

from baby_hgrn.evaluation.report import MACRO_CAVEAT, EvalReport, evaluate
from baby_hgrn.evaluation.scoring import (
    NORMS,
    LMScorer,
    TaskResult,
    continuation_logprob,
    eval_choice,
    eval_minimal_pairs,
    macro_average,
    perplexity,
    score_requests,
    sequence_logprob,
)
from baby_hgrn.evaluation.tasks import (
    ChoiceInstance,
    MinimalPair,
    choices_from_records,
    load_choices,
    load_pairs,
    pairs_from_records,
    write_choices,
    write_pairs,
)

__all__ = [
    'ChoiceInstance',
    'EvalReport',
    'LMScorer',
    'MACRO_CAVEAT',
    'MinimalPair',
    'NORMS',
    'TaskResult',
    'choices_from_records',
    'continuation_logprob',
    'eval_choice',
    'eval_minimal_pairs',
    'evaluate',
    'load_choices',
    'load_pairs',
    'macro_average',
    'pairs_from_records',
    'perplexity',
    'score_requests',
    'sequence_logprob',
    'write_choices',
    'write_pairs',
]
