'''
Corpus construction: domain sampling, BPE tokenization and packing.

This package turns line-delimited ``{text, domain}`` records into the
fixed-length token chunks the trainers consume.
'''

from baby_hgrn.data.bpe import (
    DEFAULT_VOCAB_SIZE,
    FULL_SCALE_VOCAB_SIZE,
    NUM_BASE_SYMBOLS,
    SPECIAL_TOKENS,
    BPEVocabulary,
    split_words,
    train_bpe,
)
from baby_hgrn.data.packing import DEFAULT_CHUNK_LEN, PackedDataset, pack, pack_ids
from baby_hgrn.data.sampling import (
    PLANS,
    CorpusManifest,
    DomainManifest,
    DomainSpec,
    SampledCorpus,
    SamplingPlan,
    get_plan,
    list_plans,
    read_jsonl_corpus,
    sample_corpus,
    validate_plan,
    write_jsonl_corpus,
)
from baby_hgrn.data.synthetic import AgreementGrammar, bigram_entropy

__all__ = [
    'AgreementGrammar',
    'BPEVocabulary',
    'CorpusManifest',
    'DEFAULT_CHUNK_LEN',
    'DEFAULT_VOCAB_SIZE',
    'DomainManifest',
    'DomainSpec',
    'FULL_SCALE_VOCAB_SIZE',
    'NUM_BASE_SYMBOLS',
    'PLANS',
    'PackedDataset',
    'SPECIAL_TOKENS',
    'SampledCorpus',
    'SamplingPlan',
    'bigram_entropy',
    'get_plan',
    'list_plans',
    'pack',
    'pack_ids',
    'read_jsonl_corpus',
    'sample_corpus',
    'split_words',
    'train_bpe',
    'validate_plan',
    'write_jsonl_corpus',
]
