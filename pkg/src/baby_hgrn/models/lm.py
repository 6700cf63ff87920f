'''
Causal language models: embedding, stacked mixing layers, output head.

Every model accepts token ids shaped ``[T]`` or ``[B, T]`` and returns
logits shaped ``[T, V]`` or ``[B, T, V]`` together with the carried
:class:`~baby_hgrn.models.hgrn2.RecurrentState`, so long inputs can be
fed in pieces.
'''

import logging
from typing import Optional, Tuple

import numpy as np

from baby_hgrn.errors import ConfigError, DataError, UsageError
from baby_hgrn.models.config import ModelConfig
from baby_hgrn.models.hgrn2 import MODES, HGRN2Layer, RecurrentState, lower_bounds
from baby_hgrn.models.layers import (
    Dropout,
    Embedding,
    Linear,
    Module,
    ModuleList,
    RMSNorm,
)
from baby_hgrn.models.lstm import LSTMLayer
from baby_hgrn.tensor import Tensor, reshape, slice_along, stack

logger = logging.getLogger(__name__)


class CausalLM(Module):
    '''Common plumbing for the concrete language models.'''

    def __init__(self, config: ModelConfig, seed: int = 0) -> None:
        super().__init__()
        self.config = config
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    @property
    def vocab_size(self) -> int:
        return self.config.vocab_size

    def check_ids(self, ids) -> np.ndarray:
        '''
        Validate and batch token ids.

        Raises:
            DataError: On empty input or ids outside ``[0, vocab_size)``.
            UsageError: On inputs with more than two axes.
        '''
        ids = np.asarray(ids)
        if ids.ndim not in (1, 2):
            raise UsageError(f'Token ids must be [T] or [B, T], got shape {ids.shape}')
        if ids.size == 0:
            raise DataError('Cannot run the model on an empty sequence')
        if not np.issubdtype(ids.dtype, np.integer):
            raise DataError(f'Token ids must be integers, got {ids.dtype}')
        bad = ids[(ids < 0) | (ids >= self.vocab_size)]
        if bad.size:
            raise DataError(
                f'Token id {int(bad[0])} outside vocabulary of size {self.vocab_size}'
            )
        return ids if ids.ndim == 2 else ids[None, :]

    def forward(
        self, ids, state: Optional[RecurrentState] = None
    ) -> Tuple[Tensor, RecurrentState]:
        batched = self.check_ids(ids)
        logits, state = self._forward(batched, state)
        if np.asarray(ids).ndim == 1:
            logits = reshape(logits, logits.shape[1:])
        return logits, state

    def _forward(
        self, ids: np.ndarray, state: Optional[RecurrentState]
    ) -> Tuple[Tensor, RecurrentState]:
        raise NotImplementedError

    def lower_bounds(self) -> Optional[np.ndarray]:
        '''Per-layer forget-gate lower bounds, ``None`` for models without them.'''
        return None


class HGRN2LM(CausalLM):
    '''
    HGRN2 language model.

    ``embed -> L x HGRN2Layer -> RMSNorm -> lm_head``.  Forward runs the
    chunkwise scan by default; ``mode="sequential"`` forces the
    step-by-step reference path.
    '''

    def __init__(self, config: ModelConfig, seed: int = 0) -> None:
        super().__init__(config, seed)
        d = config.hidden_size
        self.embed = Embedding(config.vocab_size, d, self.rng)
        self.layers = ModuleList(
            [
                HGRN2Layer(
                    d,
                    config.heads,
                    config.expand_ratio,
                    config.hidden_ratio,
                    self.rng,
                    norm_eps=config.norm_eps,
                    index=i,
                )
                for i in range(config.num_layers)
            ]
        )
        self.norm = RMSNorm(d, config.norm_eps)
        self.lm_head = Linear(d, config.vocab_size, self.rng)
        self.mode = 'scan'

    def bounds_tensor(self) -> Tensor:
        return lower_bounds(stack([layer.gamma for layer in self.layers], axis=0))

    def lower_bounds(self) -> np.ndarray:
        return self.bounds_tensor().numpy()

    def _forward(
        self,
        ids: np.ndarray,
        state: Optional[RecurrentState],
        mode: Optional[str] = None,
    ) -> Tuple[Tensor, RecurrentState]:
        mode = mode or self.mode
        if mode not in MODES:
            raise UsageError(f'Unknown mode {mode!r}. Available: {list(MODES)}')
        x = self.embed(ids)
        betas = self.bounds_tensor()
        carried = state.layers if state is not None else [None] * len(self.layers)
        new_states = []
        for index, layer in enumerate(self.layers):
            beta = reshape(slice_along(betas, 0, index, index + 1), (betas.shape[1],))
            x, layer_state = layer(
                x, beta, carried[index], mode=mode, block=self.config.block_size
            )
            new_states.append(layer_state)
        position = (state.position if state is not None else 0) + ids.shape[1]
        return self.lm_head(self.norm(x)), RecurrentState(new_states, position)

    def forward_mode(
        self, ids, mode: str, state: Optional[RecurrentState] = None
    ) -> Tuple[Tensor, RecurrentState]:
        '''Forward with an explicit execution path (``"scan"`` or ``"sequential"``).'''
        previous, self.mode = self.mode, mode
        try:
            return self.forward(ids, state)
        finally:
            self.mode = previous


class LSTMLM(CausalLM):
    '''``embed -> L x LSTMLayer (dropout between) -> lm_head``.'''

    def __init__(self, config: ModelConfig, seed: int = 0) -> None:
        super().__init__(config, seed)
        h = config.hidden_size
        self.embed = Embedding(config.vocab_size, config.embed_dim, self.rng)
        self.layers = ModuleList(
            [
                LSTMLayer(config.embed_dim if i == 0 else h, h, self.rng, index=i)
                for i in range(config.num_layers)
            ]
        )
        self.dropout = Dropout(config.dropout, self.rng)
        self.lm_head = Linear(h, config.vocab_size, self.rng)

    def _forward(
        self, ids: np.ndarray, state: Optional[RecurrentState]
    ) -> Tuple[Tensor, RecurrentState]:
        x = self.embed(ids)
        carried = state.layers if state is not None else [None] * len(self.layers)
        new_states = []
        for index, layer in enumerate(self.layers):
            if index > 0:
                x = self.dropout(x)
            x, layer_state = layer(x, carried[index])
            new_states.append(layer_state)
        position = (state.position if state is not None else 0) + ids.shape[1]
        return self.lm_head(x), RecurrentState(new_states, position)


MODEL_CLASSES = {'hgrn2': HGRN2LM, 'lstm': LSTMLM}


def build_model(config: ModelConfig, seed: int = 0) -> CausalLM:
    '''
    Instantiate the model described by ``config``.

    Raises:
        ConfigError: On an invalid config or an unimplemented architecture.
    '''
    config.validate()
    try:
        cls = MODEL_CLASSES[config.architecture]
    except KeyError:
        raise ConfigError(f'Unknown architecture {config.architecture!r}') from None
    model = cls(config, seed=seed)
    logger.debug(
        'Built %s with %d parameters', config.architecture, model.num_parameters()
    )
    return model


def lm_forward(tokens, model: CausalLM) -> Tensor:
    '''
    Next-token logits for ``tokens``.

    ``logits[t]`` depends only on ``tokens[:t + 1]``.

    Raises:
        DataError: If an id is outside the vocabulary.
    '''
    logits, _ = model(tokens)
    return logits
