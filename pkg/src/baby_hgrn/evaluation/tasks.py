'''
Zero-shot task items and their line-delimited JSON files.

Minimal pairs are stored as ``{"good", "bad", "tag"}``; BLiMP-style
``sentence_good``/``sentence_bad``/``UID`` keys are accepted on load.
Choice instances are ``{"context", "candidates", "gold", "tag"}``, plus an
optional ``"target"``: when present the candidates are alternative
contexts and each is scored by how well it predicts the shared target.
'''

from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from baby_hgrn.errors import DataError
from baby_hgrn.utils.helpers import PathLike, read_jsonl, write_jsonl

DEFAULT_PAIR_TAG = 'minimal_pair'
DEFAULT_CHOICE_TAG = 'choice'


@dataclass(frozen=True)
class MinimalPair:
    '''A grammatical sentence and an ungrammatical twin.'''

    good: str
    bad: str
    tag: str = DEFAULT_PAIR_TAG

    def __post_init__(self) -> None:
        if not self.good.strip() or not self.bad.strip():
            raise DataError(f'Minimal pair has an empty sentence: {self!r}')
        if self.good == self.bad:
            raise DataError(f'Minimal pair sentences are identical: {self.good!r}')

    def to_dict(self) -> Dict[str, str]:
        return {'good': self.good, 'bad': self.bad, 'tag': self.tag}

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> 'MinimalPair':
        good = record.get('good', record.get('sentence_good'))
        bad = record.get('bad', record.get('sentence_bad'))
        if not isinstance(good, str) or not isinstance(bad, str):
            raise DataError(
                f'Minimal pair record needs "good" and "bad" strings: {record!r}'
            )
        tag = record.get('tag', record.get('UID', DEFAULT_PAIR_TAG))
        return cls(good=good, bad=bad, tag=str(tag))


@dataclass(frozen=True)
class ChoiceInstance:
    '''
    One k-way item with a single gold candidate.

    Attributes:
        context: Shared prompt that every candidate continues.
        candidates: Completions (or contexts, when ``target`` is set).
        gold: Index of the true / plausible candidate.
        tag: Task or phenomenon label used for breakdowns.
        target: Shared continuation scored after each candidate context.
    '''

    context: str
    candidates: Tuple[str, ...]
    gold: int
    tag: str = DEFAULT_CHOICE_TAG
    target: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, 'candidates', tuple(self.candidates))
        if len(self.candidates) < 2:
            raise DataError(
                'Choice instance needs at least 2 candidates, '
                f'got {len(self.candidates)}'
            )
        if not isinstance(self.gold, int) or not 0 <= self.gold < len(self.candidates):
            raise DataError(
                f'Gold index {self.gold!r} out of range for '
                f'{len(self.candidates)} candidates'
            )
        if any(not c.strip() for c in self.candidates):
            raise DataError('Choice instance has an empty candidate')
        if len(set(self.candidates)) != len(self.candidates):
            raise DataError(
                f'Choice instance has duplicate candidates: {self.candidates!r}'
            )
        if self.target is not None and not self.target.strip():
            raise DataError('Choice instance target is empty')

    def requests(self) -> List[Tuple[str, str]]:
        '''``(context, text)`` pairs to score, one per candidate.'''
        if self.target is None:
            return [(self.context, c) for c in self.candidates]
        return [(self.context + c, self.target) for c in self.candidates]

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'context': self.context,
            'candidates': list(self.candidates),
            'gold': self.gold,
            'tag': self.tag,
        }
        if self.target is not None:
            data['target'] = self.target
        return data

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> 'ChoiceInstance':
        candidates = record.get('candidates')
        if not isinstance(candidates, list) or not all(
            isinstance(c, str) for c in candidates
        ):
            raise DataError(
                f'Choice record needs a "candidates" list of strings: {record!r}'
            )
        gold = record.get('gold')
        if isinstance(gold, bool) or not isinstance(gold, int):
            raise DataError(f'Choice record needs an integer "gold": {record!r}')
        return cls(
            context=str(record.get('context', '')),
            candidates=tuple(candidates),
            gold=gold,
            tag=str(record.get('tag', DEFAULT_CHOICE_TAG)),
            target=record.get('target'),
        )


def _load(path: PathLike, build) -> list:
    items = []
    for lineno, record in enumerate(read_jsonl(path), start=1):
        try:
            items.append(build(record))
        except DataError as exc:
            raise DataError(f'{str(path)!r} line {lineno}: {exc}') from exc
    if not items:
        raise DataError(f'Task file {str(path)!r} has no items')
    return items


def load_pairs(path: PathLike) -> List[MinimalPair]:
    '''
    Read minimal pairs from JSONL.

    Raises:
        IngestionError: Unreadable file or malformed JSON.
        DataError: Invalid pair (the message names the line) or empty file.
    '''
    return _load(path, MinimalPair.from_dict)


def load_choices(path: PathLike) -> List[ChoiceInstance]:
    '''Read choice instances from JSONL; errors as :func:`load_pairs`.'''
    return _load(path, ChoiceInstance.from_dict)


def write_pairs(path: PathLike, pairs: Iterable[MinimalPair]) -> str:
    return write_jsonl(path, (p.to_dict() for p in pairs))


def write_choices(path: PathLike, instances: Iterable[ChoiceInstance]) -> str:
    return write_jsonl(path, (c.to_dict() for c in instances))


def pairs_from_records(records: Sequence[Dict[str, Any]]) -> List[MinimalPair]:
    return [MinimalPair.from_dict(r) for r in records]


def choices_from_records(records: Sequence[Dict[str, Any]]) -> List[ChoiceInstance]:
    return [ChoiceInstance.from_dict(r) for r in records]
