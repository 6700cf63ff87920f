'''
Byte-level Byte-Pair Encoding.

Text is first split into whitespace-prefixed words (``"the dog"`` ->
``["the", " dog"]``) so merges never cross word boundaries, then each
word is encoded as UTF-8 bytes.  Ids are laid out as:

* ``0..3``:   special tokens ``<pad>``, ``<bos>``, ``<eos>``, ``<unk>``
* ``4..259``: the 256 single bytes
* ``260..``:  merged symbols, in merge rank order; a merge that rebuilds an
  existing symbol adds no id

Because every byte has an id, ``decode(encode(s)) == s`` for any string.
'''

import heapq
import logging
import re
from collections import Counter, defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from baby_hgrn.errors import DataError, UsageError
from baby_hgrn.utils.helpers import PathLike, load_json, write_json

logger = logging.getLogger(__name__)

PAD, BOS, EOS, UNK = '<pad>', '<bos>', '<eos>', '<unk>'
SPECIAL_TOKENS = (PAD, BOS, EOS, UNK)
NUM_BASE_SYMBOLS = len(SPECIAL_TOKENS) + 256

DEFAULT_VOCAB_SIZE = 2_000
FULL_SCALE_VOCAB_SIZE = 16_000

_FORMAT = 'baby-hgrn-bpe'
_WORD_RE = re.compile(r'\s*\S+|\s+')

Pair = Tuple[bytes, bytes]


def split_words(text: str) -> List[str]:
    '''Split text into whitespace-prefixed words; ``''.join`` restores it.'''
    return _WORD_RE.findall(text)


class BPEVocabulary:
    '''
    A trained byte-level BPE vocabulary.

    Args:
        merges: Merge rules in rank order (rank 0 is applied first).
        requested_size: Size asked of :func:`train_bpe`, when known.
    '''

    def __init__(
        self,
        merges: Sequence[Pair],
        requested_size: Optional[int] = None,
    ) -> None:
        self.merges: List[Pair] = [(bytes(a), bytes(b)) for a, b in merges]
        self.requested_size = requested_size
        self.special_ids: Dict[str, int] = {
            tok: i for i, tok in enumerate(SPECIAL_TOKENS)
        }
        self.id_to_bytes: List[bytes] = [b''] * len(SPECIAL_TOKENS)
        self.id_to_bytes += [bytes([b]) for b in range(256)]
        self.token_to_id: Dict[bytes, int] = {
            token: idx
            for idx, token in enumerate(self.id_to_bytes)
            if idx >= len(SPECIAL_TOKENS)
        }
        # a merge whose result already has an id reuses it
        for a, b in self.merges:
            if a + b not in self.token_to_id:
                self.token_to_id[a + b] = len(self.id_to_bytes)
                self.id_to_bytes.append(a + b)
        self._ranks: Dict[Pair, int] = {pair: r for r, pair in enumerate(self.merges)}
        self._cache: Dict[str, List[int]] = {}

    # ------------------------------------------------------------------
    # Properties
    # ------------------------------------------------------------------

    @property
    def vocab_size(self) -> int:
        return len(self.id_to_bytes)

    @property
    def pad_id(self) -> int:
        return self.special_ids[PAD]

    @property
    def bos_id(self) -> int:
        return self.special_ids[BOS]

    @property
    def eos_id(self) -> int:
        return self.special_ids[EOS]

    @property
    def unk_id(self) -> int:
        return self.special_ids[UNK]

    def __len__(self) -> int:
        return self.vocab_size

    def __repr__(self) -> str:
        return f'BPEVocabulary(vocab_size={self.vocab_size}, merges={len(self.merges)})'

    # ------------------------------------------------------------------
    # Encoding
    # ------------------------------------------------------------------

    def _encode_word(self, word: str) -> List[int]:
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        symbols = [bytes([b]) for b in word.encode('utf-8')]
        while len(symbols) > 1:
            best_rank, best_at = None, -1
            for i in range(len(symbols) - 1):
                rank = self._ranks.get((symbols[i], symbols[i + 1]))
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank, best_at = rank, i
            if best_rank is None:
                break
            pair = self.merges[best_rank]
            merged: List[bytes] = []
            i = 0
            while i < len(symbols):
                if i < len(symbols) - 1 and (symbols[i], symbols[i + 1]) == pair:
                    merged.append(symbols[i] + symbols[i + 1])
                    i += 2
                else:
                    merged.append(symbols[i])
                    i += 1
            symbols = merged
        ids = [self.token_to_id[s] for s in symbols]
        self._cache[word] = ids
        return ids

    def encode(self, text: str) -> List[int]:
        '''Encode text to ids (no special tokens added).'''
        ids: List[int] = []
        for word in split_words(text):
            ids.extend(self._encode_word(word))
        return ids

    def decode(self, ids: Iterable[int]) -> str:
        '''
        Decode ids back to text; special tokens decode to nothing.

        Raises:
            DataError: If an id is outside ``[0, vocab_size)``.
        '''
        parts = []
        for idx in ids:
            idx = int(idx)
            if not 0 <= idx < self.vocab_size:
                raise DataError(
                    f'Token id {idx} outside vocabulary of size {self.vocab_size}'
                )
            parts.append(self.id_to_bytes[idx])
        return b''.join(parts).decode('utf-8', errors='replace')

    def token_text(self, idx: int) -> str:
        '''Readable form of one id (specials by name).'''
        if idx < len(SPECIAL_TOKENS):
            return SPECIAL_TOKENS[idx]
        return self.id_to_bytes[idx].decode('utf-8', errors='backslashreplace')

    # ------------------------------------------------------------------
    # Persistence
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict:
        return {
            'format': _FORMAT,
            'version': 1,
            'vocab_size': self.vocab_size,
            'requested_size': self.requested_size,
            'specials': dict(self.special_ids),
            'merges': [[a.hex(), b.hex()] for a, b in self.merges],
        }

    def save(self, path: PathLike) -> str:
        '''Write the vocabulary file (merges in rank order plus special ids).'''
        return write_json(self.to_dict(), path)

    @classmethod
    def load(cls, path: PathLike) -> 'BPEVocabulary':
        data = load_json(path)
        if data.get('format') != _FORMAT:
            raise DataError(f'{str(path)!r} is not a baby-hgrn vocabulary file')
        merges = [(bytes.fromhex(a), bytes.fromhex(b)) for a, b in data['merges']]
        vocab = cls(merges, requested_size=data.get('requested_size'))
        if vocab.special_ids != data.get('specials', vocab.special_ids):
            raise DataError(f'{str(path)!r} declares unexpected special-token ids')
        return vocab


def train_bpe(
    corpus: Iterable[str],
    vocab_size: int = DEFAULT_VOCAB_SIZE,
) -> BPEVocabulary:
    '''
    Learn BPE merges from a text stream.

    The most frequent adjacent symbol pair is merged first; ties go to
    the lexicographically smallest pair so training is deterministic.

    Args:
        corpus: Iterable of documents.
        vocab_size: Target size including the 4 specials and 256 bytes.

    Returns:
        The trained :class:`BPEVocabulary`.  When the corpus runs out of
        pairs first, the vocabulary is smaller than requested, a warning
        is logged and ``requested_size`` keeps the original target.

    Raises:
        UsageError: If ``vocab_size`` does not exceed the 260 base symbols.
    '''
    if vocab_size <= NUM_BASE_SYMBOLS:
        raise UsageError(
            f'vocab_size must exceed the {NUM_BASE_SYMBOLS} base symbols, '
            f'got {vocab_size}'
        )

    word_freq: Counter = Counter()
    for text in corpus:
        word_freq.update(split_words(text))

    words: List[List[bytes]] = []
    freqs: List[int] = []
    for word, freq in word_freq.items():
        words.append([bytes([b]) for b in word.encode('utf-8')])
        freqs.append(freq)

    pair_counts: Counter = Counter()
    where: Dict[Pair, set] = defaultdict(set)
    for wi, symbols in enumerate(words):
        for pair in zip(symbols, symbols[1:]):
            pair_counts[pair] += freqs[wi]
            where[pair].add(wi)

    heap = [(-count, pair) for pair, count in pair_counts.items()]
    heapq.heapify(heap)

    merges: List[Pair] = []
    known = {bytes([b]) for b in range(256)}
    target = vocab_size - NUM_BASE_SYMBOLS
    while len(known) - 256 < target and heap:
        neg_count, pair = heapq.heappop(heap)
        current = pair_counts.get(pair, 0)
        if current <= 0 or -neg_count != current:
            continue
        merges.append(pair)
        merged_symbol = pair[0] + pair[1]
        known.add(merged_symbol)
        touched: Counter = Counter()
        for wi in sorted(where.pop(pair, ())):
            symbols = words[wi]
            freq = freqs[wi]
            for old in zip(symbols, symbols[1:]):
                pair_counts[old] -= freq
                touched[old] += 1
            rebuilt: List[bytes] = []
            i = 0
            while i < len(symbols):
                if i < len(symbols) - 1 and (symbols[i], symbols[i + 1]) == pair:
                    rebuilt.append(merged_symbol)
                    i += 2
                else:
                    rebuilt.append(symbols[i])
                    i += 1
            words[wi] = rebuilt
            for new in zip(rebuilt, rebuilt[1:]):
                pair_counts[new] += freq
                where[new].add(wi)
                touched[new] += 1
        pair_counts.pop(pair, None)
        for changed in touched:
            count = pair_counts.get(changed, 0)
            if count > 0:
                heapq.heappush(heap, (-count, changed))
            else:
                pair_counts.pop(changed, None)

    learned = len(known) - 256
    if learned < target:
        logger.warning(
            'Corpus too small for vocab_size=%d: learned %d merges, vocabulary size %d',
            vocab_size,
            len(merges),
            NUM_BASE_SYMBOLS + learned,
        )
    logger.info('Trained BPE vocabulary with %d merges', len(merges))
    return BPEVocabulary(merges, requested_size=vocab_size)
