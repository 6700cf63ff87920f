'''
Log-likelihood scoring and the zero-shot evaluators.

A *scorer* is any object with ``score(context, text) -> (logprob, n_tokens)``
(and optionally ``score_many``).  :class:`LMScorer` is the one backed by a
:class:`~baby_hgrn.models.lm.CausalLM` and a BPE vocabulary.
'''

import logging
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from baby_hgrn.data.bpe import BPEVocabulary
from baby_hgrn.data.packing import PackedDataset
from baby_hgrn.errors import ConfigError, DataError, UsageError
from baby_hgrn.evaluation.tasks import ChoiceInstance, MinimalPair
from baby_hgrn.models.lm import CausalLM
from baby_hgrn.tensor import log_softmax, no_grad
from baby_hgrn.training.trainer import dataset_ce

logger = logging.getLogger(__name__)

NORMS = ('none', 'per-token')

Request = Tuple[str, str]
Score = Tuple[float, int]


# ---------------------------------------------------------------------------
# Scoring primitives
# ---------------------------------------------------------------------------


class LMScorer:
    '''
    Score text under a causal LM.

    Each request is encoded as ``<bos> + context + text``; only the ``text``
    tokens contribute to the log-probability.  Requests of equal encoded
    length are run together in batches of ``batch_size``.  The model is put
    in evaluation mode and never modified, so one scorer may serve several
    threads.

    Raises:
        ConfigError: If the vocabulary is larger than the model's.
    '''

    def __init__(
        self, model: CausalLM, vocab: BPEVocabulary, batch_size: int = 32
    ) -> None:
        if vocab.vocab_size > model.vocab_size:
            raise ConfigError(
                f'Vocabulary size {vocab.vocab_size} exceeds model vocabulary '
                f'{model.vocab_size}'
            )
        self.model = model.eval()
        self.vocab = vocab
        self.batch_size = max(1, batch_size)

    def encode(self, context: str, text: str) -> Tuple[np.ndarray, int]:
        '''
        Returns:
            ``(ids, n)`` where the last ``n`` ids belong to ``text``.

        Raises:
            DataError: If ``text`` encodes to no tokens.
        '''
        scored = self.vocab.encode(text)
        if not scored:
            raise DataError(f'Text {text!r} is empty after tokenization')
        prefix = self.vocab.encode(context) if context else []
        ids = [self.vocab.bos_id] + prefix + scored
        return np.asarray(ids, dtype=np.int64), len(scored)

    def _run(self, batch: np.ndarray, counts: Sequence[int]) -> List[float]:
        with no_grad():
            logits, _ = self.model(batch[:, :-1])
            log_p = log_softmax(logits, axis=-1).data
        picked = np.take_along_axis(log_p, batch[:, 1:, None], axis=-1)[..., 0]
        picked = picked.astype(np.float64)
        return [float(row[-n:].sum()) for row, n in zip(picked, counts)]

    def score_many(self, requests: Sequence[Request]) -> List[Score]:
        encoded = [self.encode(context, text) for context, text in requests]
        by_length: Dict[int, List[int]] = defaultdict(list)
        for i, (ids, _) in enumerate(encoded):
            by_length[len(ids)].append(i)
        out: List[Optional[Score]] = [None] * len(encoded)
        for indices in by_length.values():
            for start in range(0, len(indices), self.batch_size):
                chunk = indices[start : start + self.batch_size]
                batch = np.stack([encoded[i][0] for i in chunk])
                counts = [encoded[i][1] for i in chunk]
                for i, logprob in zip(chunk, self._run(batch, counts)):
                    out[i] = (logprob, encoded[i][1])
        return out

    def score(self, context: str, text: str) -> Score:
        return self.score_many([(context, text)])[0]


def continuation_logprob(
    model: CausalLM, vocab: BPEVocabulary, context: str, text: str
) -> Score:
    '''Log-probability (nats) of ``text`` given ``context``, and its token count.'''
    return LMScorer(model, vocab).score(context, text)


def sequence_logprob(model: CausalLM, vocab: BPEVocabulary, text: str) -> Score:
    '''
    Total log-probability of ``text`` under ``model`` with ``<bos>``
    conditioning, and the number of scored tokens.

    Raises:
        DataError: If ``text`` is empty after tokenization.
    '''
    return continuation_logprob(model, vocab, '', text)


def _score_shard(scorer: Any, requests: Sequence[Request]) -> List[Score]:
    if hasattr(scorer, 'score_many'):
        return list(scorer.score_many(requests))
    return [tuple(scorer.score(context, text)) for context, text in requests]


def score_requests(
    scorer: Any, requests: Sequence[Request], workers: int = 1
) -> List[Score]:
    '''Score requests in order, on ``workers`` threads when more than one.'''
    if workers <= 1 or len(requests) < 2:
        return _score_shard(scorer, requests)
    size = math.ceil(len(requests) / workers)
    shards = [requests[i : i + size] for i in range(0, len(requests), size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda shard: _score_shard(scorer, shard), shards))
    return [score for part in parts for score in part]


def _normalize(score: Score, norm: str) -> float:
    logprob, n_tokens = score
    return logprob / n_tokens if norm == 'per-token' else logprob


def _check_norm(norm: str) -> None:
    if norm not in NORMS:
        raise UsageError(f'Unknown normalization {norm!r}. Available: {list(NORMS)}')


# ---------------------------------------------------------------------------
# Evaluators
# ---------------------------------------------------------------------------


@dataclass
class TaskResult:
    '''
    Accuracy on one task file.

    ``ties`` lists the item indices whose decision rested on exactly equal
    scores (counted wrong for pairs, first candidate for choices).
    '''

    name: str
    kind: str
    correct: int
    total: int
    norm: str = 'none'
    ties: List[int] = field(default_factory=list)
    by_tag: Dict[str, Dict[str, int]] = field(default_factory=dict)
    predictions: List[int] = field(default_factory=list)

    @property
    def accuracy(self) -> float:
        return 100.0 * self.correct / self.total

    def tag_accuracy(self) -> Dict[str, float]:
        return {
            tag: 100.0 * counts['correct'] / counts['total']
            for tag, counts in sorted(self.by_tag.items())
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'kind': self.kind,
            'norm': self.norm,
            'correct': self.correct,
            'total': self.total,
            'accuracy': self.accuracy,
            'ties': list(self.ties),
            'by_tag': {
                tag: dict(counts, accuracy=self.tag_accuracy()[tag])
                for tag, counts in sorted(self.by_tag.items())
            },
        }


def _tally(by_tag: Dict[str, Dict[str, int]], tag: str, hit: bool) -> None:
    counts = by_tag.setdefault(tag, {'correct': 0, 'total': 0})
    counts['total'] += 1
    counts['correct'] += int(hit)


def eval_minimal_pairs(
    scorer: Any,
    pairs: Sequence[MinimalPair],
    norm: str = 'none',
    workers: int = 1,
    name: str = 'pairs',
) -> TaskResult:
    '''
    Minimal-pair accuracy: a pair is right iff ``score(good) > score(bad)``.

    Args:
        scorer: Object with ``score(context, text)``; see :class:`LMScorer`.
        pairs: Items to score.
        norm: ``"none"`` (total log-probability) or ``"per-token"``.
        workers: Scoring threads.
        name: Task name in the report.

    Raises:
        UsageError: On an empty list or unknown ``norm``.
    '''
    _check_norm(norm)
    if not pairs:
        raise UsageError('eval_minimal_pairs needs at least one pair')
    requests = [r for p in pairs for r in (('', p.good), ('', p.bad))]
    scores = score_requests(scorer, requests, workers)
    result = TaskResult(name=name, kind='pairs', correct=0, total=len(pairs), norm=norm)
    for i, pair in enumerate(pairs):
        good = _normalize(scores[2 * i], norm)
        bad = _normalize(scores[2 * i + 1], norm)
        hit = good > bad
        if good == bad:
            result.ties.append(i)
        result.correct += int(hit)
        result.predictions.append(int(hit))
        _tally(result.by_tag, pair.tag, hit)
    if result.ties:
        logger.warning('%s: %d tied pair(s) counted incorrect', name, len(result.ties))
    logger.info('%s: %.1f%% of %d pairs', name, result.accuracy, result.total)
    return result


def eval_choice(
    scorer: Any,
    instances: Sequence[ChoiceInstance],
    norm: str = 'none',
    workers: int = 1,
    name: str = 'choices',
) -> TaskResult:
    '''
    k-way choice accuracy: the prediction is the highest-scoring candidate,
    the first one on ties.

    Raises:
        UsageError: On an empty list or unknown ``norm``.
    '''
    _check_norm(norm)
    if not instances:
        raise UsageError('eval_choice needs at least one instance')
    requests = [r for inst in instances for r in inst.requests()]
    scores = score_requests(scorer, requests, workers)
    result = TaskResult(
        name=name, kind='choices', correct=0, total=len(instances), norm=norm
    )
    offset = 0
    for i, inst in enumerate(instances):
        k = len(inst.candidates)
        values = [_normalize(s, norm) for s in scores[offset : offset + k]]
        offset += k
        best = max(values)
        predicted = values.index(best)
        if values.count(best) > 1:
            result.ties.append(i)
        hit = predicted == inst.gold
        result.correct += int(hit)
        result.predictions.append(predicted)
        _tally(result.by_tag, inst.tag, hit)
    if result.ties:
        logger.warning(
            '%s: %d tied instance(s) resolved to the first candidate',
            name,
            len(result.ties),
        )
    logger.info('%s: %.1f%% of %d instances', name, result.accuracy, result.total)
    return result


def macro_average(
    scores: Union[Mapping[str, float], Sequence[float]], ndigits: Optional[int] = None
) -> float:
    '''
    Unweighted mean of task scores.  Tasks of different sizes count
    equally.

    Raises:
        UsageError: If no scores are given.
    '''
    values = list(scores.values()) if isinstance(scores, Mapping) else list(scores)
    if not values:
        raise UsageError('macro_average needs at least one score')
    mean = math.fsum(values) / len(values)
    return round(mean, ndigits) if ndigits is not None else mean


def perplexity(model: CausalLM, dataset: PackedDataset, batch_size: int = 64) -> float:
    '''``exp`` of the token-weighted mean CE over ``dataset``; ``inf`` on overflow.'''
    try:
        return math.exp(dataset_ce(model, dataset, batch_size))
    except OverflowError:
        return float('inf')
