'''
Concatenate-and-chunk packing of tokenized documents.

Documents are joined with a single ``<eos>`` between neighbours and the
resulting stream is cut into chunks of exactly ``chunk_len`` ids; the
trailing partial chunk is dropped and counted.

On disk a packed dataset is a fixed little-endian header followed by
``chunk_count * chunk_len`` unsigned 32-bit ids::

    magic b'BHPD' | version u16 | vocab_size u32 | chunk_len u32 | chunk_count u32

A ``<path>.json`` sidecar keeps the sampling manifest and the token
accounting so the binary stays a plain id array.
'''

import logging
import struct
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from baby_hgrn.data.bpe import BPEVocabulary
from baby_hgrn.errors import (
    CheckpointError,
    DataError,
    IngestionError,
    PlanError,
    UsageError,
)
from baby_hgrn.utils.helpers import PathLike, load_json, write_json

logger = logging.getLogger(__name__)

MAGIC = b'BHPD'
VERSION = 1
DEFAULT_CHUNK_LEN = 512

_HEADER = struct.Struct('<4sHIII')


class PackedDataset:
    '''
    Fixed-length token chunks.

    Args:
        chunks: ``[chunk_count, chunk_len]`` integer array.
        vocab_size: Size of the vocabulary the ids come from.
        manifest: Sampling manifest (``CorpusManifest.to_dict()``), if any.
        dropped_tokens: Ids discarded from the final partial chunk.

    Raises:
        DataError: If an id falls outside ``[0, vocab_size)``.
    '''

    def __init__(
        self,
        chunks: np.ndarray,
        vocab_size: int,
        manifest: Optional[Dict[str, Any]] = None,
        dropped_tokens: int = 0,
    ) -> None:
        chunks = np.ascontiguousarray(chunks, dtype=np.uint32)
        if chunks.ndim != 2:
            raise DataError(f'chunks must be 2-D, got shape {chunks.shape}')
        if chunks.size and int(chunks.max()) >= vocab_size:
            raise DataError(
                f'Token id {int(chunks.max())} outside vocabulary of size {vocab_size}'
            )
        self.chunks = chunks
        self.vocab_size = int(vocab_size)
        self.manifest = manifest
        self.dropped_tokens = int(dropped_tokens)

    @property
    def chunk_count(self) -> int:
        return self.chunks.shape[0]

    @property
    def chunk_len(self) -> int:
        return self.chunks.shape[1]

    @property
    def token_count(self) -> int:
        '''Ids kept in chunks.'''
        return self.chunks.size

    @property
    def total_tokens(self) -> int:
        '''Ids in the concatenated stream (kept plus dropped).'''
        return self.token_count + self.dropped_tokens

    def __len__(self) -> int:
        return self.chunk_count

    def __repr__(self) -> str:
        return (
            f'PackedDataset(chunks={self.chunk_count}, chunk_len={self.chunk_len}, '
            f'vocab_size={self.vocab_size})'
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PackedDataset):
            return NotImplemented
        return (
            self.vocab_size == other.vocab_size
            and self.chunks.shape == other.chunks.shape
            and bool(np.array_equal(self.chunks, other.chunks))
        )

    def subset(self, indices: Sequence[int]) -> 'PackedDataset':
        '''Dataset holding the given chunks, in the given order.'''
        return PackedDataset(
            self.chunks[np.asarray(indices, dtype=np.int64)],
            self.vocab_size,
            manifest=self.manifest,
        )

    def split(
        self, validation_fraction: float, seed: int = 0
    ) -> Tuple['PackedDataset', 'PackedDataset']:
        '''
        Hold out a random share of chunks for validation.

        Both parts keep their chunks in original order.

        Raises:
            UsageError: If the fraction is outside ``(0, 1)`` or either
                part would be empty.
        '''
        if not 0.0 < validation_fraction < 1.0:
            raise UsageError(
                f'validation_fraction must be in (0, 1), got {validation_fraction}'
            )
        n_valid = int(round(self.chunk_count * validation_fraction))
        if n_valid == 0 or n_valid == self.chunk_count:
            raise UsageError(
                f'Cannot hold out {validation_fraction:.0%} of '
                f'{self.chunk_count} chunks'
            )
        order = np.random.default_rng(seed).permutation(self.chunk_count)
        valid = np.sort(order[:n_valid])
        train = np.sort(order[n_valid:])
        return self.subset(train), self.subset(valid)

    # ------------------------------------------------------------------
    # Persistence
    # ------------------------------------------------------------------

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(
            MAGIC, VERSION, self.vocab_size, self.chunk_len, self.chunk_count
        )
        return header + self.chunks.astype('<u4').tobytes()

    def save(self, path: PathLike) -> str:
        '''Write the binary container and its JSON sidecar.'''
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes())
        write_json(
            {
                'vocab_size': self.vocab_size,
                'chunk_len': self.chunk_len,
                'chunk_count': self.chunk_count,
                'token_count': self.token_count,
                'dropped_tokens': self.dropped_tokens,
                'manifest': self.manifest,
            },
            _sidecar(path),
        )
        logger.info(
            'Wrote %d chunks of %d tokens to %s', self.chunk_count, self.chunk_len, path
        )
        return str(path)

    @classmethod
    def from_bytes(cls, blob: bytes) -> 'PackedDataset':
        if len(blob) < _HEADER.size:
            raise CheckpointError('Packed dataset is shorter than its header')
        magic, version, vocab_size, chunk_len, chunk_count = _HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise CheckpointError(f'Not a packed dataset (magic {magic!r})')
        if version != VERSION:
            raise CheckpointError(f'Unsupported packed dataset version {version}')
        expected = _HEADER.size + 4 * chunk_len * chunk_count
        if len(blob) != expected:
            raise CheckpointError(
                f'Packed dataset holds {len(blob)} bytes, header implies {expected}'
            )
        ids = np.frombuffer(blob, dtype='<u4', offset=_HEADER.size)
        return cls(ids.reshape(chunk_count, chunk_len), vocab_size)

    @classmethod
    def load(cls, path: PathLike) -> 'PackedDataset':
        '''
        Read a dataset written by :meth:`save`.

        Raises:
            IngestionError: If the file cannot be read.
            CheckpointError: If the header or payload size is invalid.
        '''
        path = Path(path)
        try:
            blob = path.read_bytes()
        except OSError as exc:
            raise IngestionError(f'Cannot read {str(path)!r}: {exc}') from exc
        dataset = cls.from_bytes(blob)
        sidecar = _sidecar(path)
        if sidecar.exists():
            meta = load_json(sidecar)
            dataset.manifest = meta.get('manifest')
            dataset.dropped_tokens = int(meta.get('dropped_tokens', 0))
        return dataset


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + '.json')


def pack_ids(
    documents: Iterable[Sequence[int]],
    vocab_size: int,
    eos_id: int,
    chunk_len: int = DEFAULT_CHUNK_LEN,
    manifest: Optional[Dict[str, Any]] = None,
) -> PackedDataset:
    '''
    Pack already-tokenized documents.

    Args:
        documents: One id sequence per document.
        vocab_size: Vocabulary size the ids must respect.
        eos_id: Separator inserted between consecutive documents.
        chunk_len: Chunk length (>= 2).
        manifest: Optional sampling manifest to carry along.

    Raises:
        UsageError: If ``chunk_len < 2``.
        PlanError: If there are no tokens or not enough for one chunk.
        DataError: If an id is outside the vocabulary.
    '''
    if chunk_len < 2:
        raise UsageError(f'chunk_len must be at least 2, got {chunk_len}')
    stream: List[int] = []
    n_docs = 0
    for doc in documents:
        if not len(doc):
            continue
        if n_docs:
            stream.append(eos_id)
        stream.extend(int(i) for i in doc)
        n_docs += 1
    if not stream:
        raise PlanError('Cannot pack an empty corpus')

    ids = np.asarray(stream, dtype=np.int64)
    if ids.min() < 0 or ids.max() >= vocab_size:
        raise DataError(f'Token ids must lie in [0, {vocab_size})')
    chunk_count = len(ids) // chunk_len
    if chunk_count == 0:
        raise PlanError(
            f'Corpus has {len(ids)} tokens, fewer than one chunk of {chunk_len}'
        )
    kept = chunk_count * chunk_len
    dataset = PackedDataset(
        ids[:kept].reshape(chunk_count, chunk_len),
        vocab_size,
        manifest=manifest,
        dropped_tokens=len(ids) - kept,
    )
    logger.info(
        'Packed %d documents into %d chunks (%d tokens dropped)',
        n_docs,
        chunk_count,
        dataset.dropped_tokens,
    )
    return dataset


def pack(
    corpus: Iterable[str],
    vocab: BPEVocabulary,
    chunk_len: int = DEFAULT_CHUNK_LEN,
    manifest: Optional[Dict[str, Any]] = None,
) -> PackedDataset:
    '''Tokenize ``corpus`` with ``vocab`` and pack it (see :func:`pack_ids`).'''
    return pack_ids(
        (vocab.encode(text) for text in corpus),
        vocab.vocab_size,
        vocab.eos_id,
        chunk_len=chunk_len,
        manifest=manifest,
    )
