'''
Self-describing checkpoint container.

Layout (all integers little-endian)::

    magic b'BHCK' | version u16 | entry count u32
    per entry:  name length u16 | UTF-8 name | ndim u8 | dims u32 * ndim | f32 payload
    trailer:    JSON length u32 | ModelConfig as UTF-8 JSON

Parameters are written in ``named_parameters`` order, so two identical
models produce byte-identical files.
'''

import json
import logging
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from baby_hgrn.errors import CheckpointError, IngestionError
from baby_hgrn.models.config import ModelConfig
from baby_hgrn.models.lm import CausalLM, build_model
from baby_hgrn.utils.helpers import PathLike

logger = logging.getLogger(__name__)

MAGIC = b'BHCK'
VERSION = 1


def checkpoint_bytes(model: CausalLM) -> bytes:
    entries = list(model.named_parameters())
    parts = [MAGIC, struct.pack('<HI', VERSION, len(entries))]
    for name, param in entries:
        encoded = name.encode('utf-8')
        parts.append(struct.pack('<H', len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack(f'<B{param.ndim}I', param.ndim, *param.shape))
        parts.append(np.ascontiguousarray(param.data, dtype='<f4').tobytes())
    trailer = json.dumps(model.config.to_dict(), sort_keys=True).encode('utf-8')
    parts.append(struct.pack('<I', len(trailer)))
    parts.append(trailer)
    return b''.join(parts)


def save_checkpoint(model: CausalLM, path: PathLike) -> str:
    '''Write ``model`` to ``path``; returns the path.'''
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(model))
    logger.info('Saved checkpoint %s', path)
    return str(path)


class _Reader:
    def __init__(self, blob: bytes) -> None:
        self.blob = blob
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.blob):
            raise CheckpointError('Checkpoint is truncated')
        chunk = self.blob[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def parse_checkpoint(blob: bytes) -> Tuple['OrderedDict[str, np.ndarray]', ModelConfig]:
    '''
    Decode checkpoint bytes into ``(state, config)``.

    Raises:
        CheckpointError: On a bad magic, unknown version, truncation,
            trailing bytes or an unreadable config trailer.
    '''
    reader = _Reader(blob)
    if reader.take(4) != MAGIC:
        raise CheckpointError('Not a baby-hgrn checkpoint (bad magic)')
    version, count = reader.unpack('<HI')
    if version != VERSION:
        raise CheckpointError(f'Unsupported checkpoint version {version}')
    state: 'OrderedDict[str, np.ndarray]' = OrderedDict()
    for _ in range(count):
        (name_len,) = reader.unpack('<H')
        try:
            name = reader.take(name_len).decode('utf-8')
        except UnicodeDecodeError as exc:
            raise CheckpointError(f'Entry name is not UTF-8: {exc}') from exc
        (ndim,) = reader.unpack('<B')
        shape = reader.unpack(f'<{ndim}I')
        size = int(np.prod(shape)) if ndim else 1
        payload = np.frombuffer(reader.take(4 * size), dtype='<f4')
        state[name] = payload.reshape(shape).astype(np.float32)
    (trailer_len,) = reader.unpack('<I')
    try:
        config_dict = json.loads(reader.take(trailer_len).decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(
            f'Checkpoint config trailer is unreadable: {exc}'
        ) from exc
    if reader.offset != len(blob):
        raise CheckpointError(f'{len(blob) - reader.offset} unexpected trailing bytes')
    return state, ModelConfig.from_dict(config_dict)


def read_checkpoint(path: PathLike) -> Tuple[Dict[str, np.ndarray], ModelConfig]:
    '''Read ``(state, config)`` without building a model.'''
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise IngestionError(f'Cannot read checkpoint {str(path)!r}: {exc}') from exc
    return parse_checkpoint(blob)


def load_checkpoint(path: PathLike, seed: int = 0) -> CausalLM:
    '''
    Rebuild the model stored at ``path``.

    ``seed`` only drives runtime randomness such as dropout masks; all
    weights come from the file.
    '''
    state, config = read_checkpoint(path)
    model = build_model(config, seed=seed)
    model.load_state_dict(state)
    return model
