'''
baby-hgrn: desk-scale gated linear-RNN language models with cross-entropy
and knowledge-distillation training, ratio-controlled corpus sampling and
zero-shot log-likelihood evaluation.
'''

__version__ = '0.1.0'

from baby_hgrn.data import BPEVocabulary, PackedDataset, pack, sample_corpus, train_bpe
from baby_hgrn.errors import BabyHGRNError
from baby_hgrn.evaluation import (
    EvalReport,
    LMScorer,
    eval_choice,
    eval_minimal_pairs,
    macro_average,
)
from baby_hgrn.models import HGRN2LM, LSTMLM, ModelConfig, build_model, load_checkpoint
from baby_hgrn.training import (
    DistillConfig,
    TrainConfig,
    distill_pipeline,
    lr_sweep,
    train,
)

__all__ = [
    'BPEVocabulary',
    'BabyHGRNError',
    'DistillConfig',
    'EvalReport',
    'HGRN2LM',
    'LMScorer',
    'LSTMLM',
    'ModelConfig',
    'PackedDataset',
    'TrainConfig',
    'build_model',
    'distill_pipeline',
    'eval_choice',
    'eval_minimal_pairs',
    'load_checkpoint',
    'lr_sweep',
    'macro_average',
    'pack',
    'sample_corpus',
    'train',
    'train_bpe',
]
