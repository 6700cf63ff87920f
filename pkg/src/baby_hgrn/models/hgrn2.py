'''
HGRN2: gated linear recurrence with state expansion.

Per head, with ``e`` the expand ratio and ``dv = d / h``::

    f_t = beta + (1 - beta) * sigmoid(W_f x_t)      # [e], in [beta, 1)
    k_t = 1 - f_t                                   # [e]
    S_t = diag(f_t) S_{t-1} + outer(k_t, v_t)       # [e, dv]
    o_t = S_t^T q_t                                 # [dv]

``beta`` is the layer's forget-gate lower bound.  The bounds of all
layers come from one cumulative softmax over the layer axis (see
:func:`lower_bounds`), which makes them non-decreasing with depth.

Two execution paths share the same contract: :func:`hgrn2_forward_sequential`
unrolls the recurrence one step at a time and is the reference, while
:func:`hgrn2_forward_scan` processes blocks of ``block`` steps at once
using within-block cumulative log-decays.
'''

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from baby_hgrn.errors import NumericError, UsageError
from baby_hgrn.models.layers import GatedMLP, Linear, Module, Parameter, RMSNorm
from baby_hgrn.tensor import (
    Tensor,
    concat,
    cumsum,
    diag_scale,
    exp,
    log,
    matmul,
    outer_product,
    reshape,
    sigmoid,
    slice_along,
    softmax,
    swap_last,
    transpose,
)

logger = logging.getLogger(__name__)

MODES = ('scan', 'sequential')


def lower_bounds(gammas: Tensor) -> Tensor:
    '''
    Per-layer forget-gate lower bounds from stacked logits.

    ``beta_l = sum_{m < l} softmax(gammas, axis=0)_m``, i.e. the
    cumulative softmax mass of the layers strictly below ``l``.  Layer 0
    always gets 0 and every bound stays below 1.

    Args:
        gammas: ``[L, h*e]`` logits, one row per layer.

    Returns:
        ``[L, h*e]`` bounds, monotone non-decreasing along axis 0.
    '''
    weights = softmax(gammas, axis=0)
    return cumsum(weights, axis=0) - weights


@dataclass
class RecurrentState:
    '''
    Carried recurrent state of a whole model.

    Attributes:
        layers: One entry per layer: an ``[B, h, e, dv]`` matrix for
            HGRN2, an ``(h, c)`` pair of ``[B, H]`` tensors for LSTM.
        position: Number of tokens consumed so far.
    '''

    layers: List = field(default_factory=list)
    position: int = 0

    def detach(self) -> 'RecurrentState':
        def _detach(value):
            if isinstance(value, tuple):
                return tuple(v.detach() for v in value)
            return value.detach()

        return RecurrentState([_detach(v) for v in self.layers], self.position)


class HGRN2Mixer(Module):
    '''Token mixing: projections and the gated recurrence of one layer.'''

    def __init__(
        self,
        hidden_size: int,
        num_heads: int,
        expand_ratio: int,
        rng: np.random.Generator,
    ) -> None:
        super().__init__()
        self.hidden_size = hidden_size
        self.num_heads = num_heads
        self.expand_ratio = expand_ratio
        self.head_dim = hidden_size // num_heads
        key_dim = num_heads * expand_ratio
        self.q_proj = Linear(hidden_size, key_dim, rng)
        self.f_proj = Linear(hidden_size, key_dim, rng)
        self.i_proj = Linear(hidden_size, hidden_size, rng)
        self.o_proj = Linear(hidden_size, hidden_size, rng)

    def zero_state(self, batch: int, dtype) -> Tensor:
        shape = (batch, self.num_heads, self.expand_ratio, self.head_dim)
        return Tensor(np.zeros(shape), dtype=dtype)

    def _heads(self, x: Tensor, width: int) -> Tensor:
        '''``[B, T, h*width]`` -> ``[B, h, T, width]``.'''
        b, t, _ = x.shape
        return transpose(reshape(x, (b, t, self.num_heads, width)), (0, 2, 1, 3))

    def gates(self, x: Tensor, beta: Tensor) -> Tuple[Tensor, Tensor, Tensor, Tensor]:
        '''Return ``q, f, k, v`` laid out as ``[B, h, T, .]``.'''
        q = self._heads(self.q_proj(x), self.expand_ratio)
        f = beta + (1.0 - beta) * sigmoid(self.f_proj(x))
        f = self._heads(f, self.expand_ratio)
        k = 1.0 - f
        v = self._heads(self.i_proj(x), self.head_dim)
        return q, f, k, v

    def merge(self, o: Tensor) -> Tensor:
        '''``[B, h, T, dv]`` -> output projection of ``[B, T, d]``.'''
        b, _, t, _ = o.shape
        merged = reshape(transpose(o, (0, 2, 1, 3)), (b, t, self.hidden_size))
        return self.o_proj(merged)


def _step_slice(x: Tensor, t: int) -> Tensor:
    '''``[B, h, T, w]`` -> ``[B, h, w]`` at step ``t``.'''
    b, h, _, w = x.shape
    return reshape(slice_along(x, 2, t, t + 1), (b, h, w))


def recurrence_sequential(
    q: Tensor, f: Tensor, k: Tensor, v: Tensor, state: Tensor, location: str = ''
) -> Tuple[Tensor, Tensor]:
    '''
    Step-by-step reference recurrence.

    Args:
        q, f, k: ``[B, h, T, e]``.
        v: ``[B, h, T, dv]``.
        state: ``[B, h, e, dv]``.

    Returns:
        ``(o, state')`` with ``o`` of shape ``[B, h, T, dv]``.
    '''
    outputs = []
    for t in range(q.shape[2]):
        try:
            state = diag_scale(_step_slice(f, t), state) + outer_product(
                _step_slice(k, t), _step_slice(v, t)
            )
            outputs.append(matmul(slice_along(q, 2, t, t + 1), state))
        except NumericError as exc:
            raise NumericError(f'{location}step {t}: {exc}') from exc
    return concat(outputs, axis=2), state


def recurrence_chunkwise(
    q: Tensor,
    f: Tensor,
    k: Tensor,
    v: Tensor,
    state: Tensor,
    block: int,
    location: str = '',
) -> Tuple[Tensor, Tensor]:
    '''
    Blockwise evaluation of the same recurrence.

    Inside a block of length ``C`` with inclusive cumulative log-decay
    ``A_t = sum_{r<=t} log f_r``::

        o_t  = (q_t * exp(A_t)) S_0 + sum_{s<=t} (q_t . (k_s * exp(A_t - A_s))) v_s
        S_C  = diag(exp(A_C)) S_0 + sum_s outer(k_s * exp(A_C - A_s), v_s)

    ``block == 1`` falls back to :func:`recurrence_sequential`.
    '''
    if block < 1:
        raise UsageError(f'block must be >= 1, got {block}')
    if block == 1:
        return recurrence_sequential(q, f, k, v, state, location)

    b, h, total, e = q.shape
    # f == 0 is clamped to the smallest normal float
    log_f = log(f, floor=float(np.finfo(f.dtype).tiny))
    outputs = []
    for start in range(0, total, block):
        stop = min(start + block, total)
        size = stop - start
        try:
            qb = slice_along(q, 2, start, stop)
            kb = slice_along(k, 2, start, stop)
            vb = slice_along(v, 2, start, stop)
            decay = cumsum(slice_along(log_f, 2, start, stop), axis=2)

            inter = matmul(qb * exp(decay), state)

            causal = np.tril(np.ones((size, size)))[:, :, None]
            rows, cols = (b, h, size, 1, e), (b, h, 1, size, e)
            gap = reshape(decay, rows) - reshape(decay, cols)
            weights = exp(gap * causal) * causal
            scores = (reshape(qb, rows) * reshape(kb, cols) * weights).sum(axis=-1)
            outputs.append(inter + matmul(scores, vb))

            last = slice_along(decay, 2, size - 1, size)
            carried = diag_scale(exp(reshape(last, (b, h, e))), state)
            state = carried + matmul(swap_last(kb * exp(last - decay)), vb)
        except NumericError as exc:
            raise NumericError(f'{location}block at step {start}: {exc}') from exc
    return concat(outputs, axis=2), state


def hgrn2_forward_sequential(
    mixer: HGRN2Mixer, x: Tensor, beta: Tensor, state: Tensor, location: str = ''
) -> Tuple[Tensor, Tensor]:
    '''
    Token mixing of ``x`` (``[B, T, d]``) by step-by-step recurrence.

    Returns the projected mixer output (before the residual) and the
    final state.
    '''
    q, f, k, v = mixer.gates(x, beta)
    o, state = recurrence_sequential(q, f, k, v, state, location)
    return mixer.merge(o), state


def hgrn2_forward_scan(
    mixer: HGRN2Mixer,
    x: Tensor,
    beta: Tensor,
    state: Tensor,
    block: int,
    location: str = '',
) -> Tuple[Tensor, Tensor]:
    '''Same contract as :func:`hgrn2_forward_sequential`, evaluated blockwise.'''
    q, f, k, v = mixer.gates(x, beta)
    o, state = recurrence_chunkwise(q, f, k, v, state, block, location)
    return mixer.merge(o), state


class HGRN2Layer(Module):
    '''
    Pre-norm block: ``x + mixer(norm(x))`` then ``x + mlp(norm(x))``.

    ``gamma`` is this layer's lower-bound logit vector; the model stacks
    the vectors of all layers to compute the bounds.
    '''

    def __init__(
        self,
        hidden_size: int,
        num_heads: int,
        expand_ratio: int,
        hidden_ratio: int,
        rng: np.random.Generator,
        norm_eps: float = 1e-6,
        index: int = 0,
    ) -> None:
        super().__init__()
        self.index = index
        self.mixer_norm = RMSNorm(hidden_size, norm_eps)
        self.mixer = HGRN2Mixer(hidden_size, num_heads, expand_ratio, rng)
        self.gamma = Parameter(np.zeros(num_heads * expand_ratio))
        self.mlp_norm = RMSNorm(hidden_size, norm_eps)
        self.mlp = GatedMLP(hidden_size, hidden_ratio * hidden_size, rng)

    def forward(
        self,
        x: Tensor,
        beta: Tensor,
        state: Optional[Tensor] = None,
        mode: str = 'scan',
        block: int = 16,
    ) -> Tuple[Tensor, Tensor]:
        if state is None:
            state = self.mixer.zero_state(x.shape[0], x.dtype)
        location = f'layer {self.index} '
        normed = self.mixer_norm(x)
        if mode == 'sequential':
            mixed, state = hgrn2_forward_sequential(
                self.mixer, normed, beta, state, location
            )
        elif mode == 'scan':
            mixed, state = hgrn2_forward_scan(
                self.mixer, normed, beta, state, block, location
            )
        else:
            raise UsageError(f'Unknown mode {mode!r}. Available: {list(MODES)}')
        x = x + mixed
        x = x + self.mlp(self.mlp_norm(x))
        return x, state
