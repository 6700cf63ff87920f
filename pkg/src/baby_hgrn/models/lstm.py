'''
Vanilla LSTM baseline.

Gate pre-activations are ``x_t W_x + h_{t-1} W_h + b`` split into the
input, forget, candidate and output blocks, in that order::

    c_t = f * c_{t-1} + i * tanh(g)
    h_t = o * tanh(c_t)
'''

from typing import Optional, Tuple

import numpy as np

from baby_hgrn.errors import NumericError
from baby_hgrn.models.layers import Module, Parameter, uniform_init
from baby_hgrn.tensor import Tensor, matmul, reshape, sigmoid, slice_along, stack, tanh

LSTMCarry = Tuple[Tensor, Tensor]


class LSTMLayer(Module):
    '''One LSTM layer over ``[B, T, input_size]`` inputs.'''

    def __init__(
        self,
        input_size: int,
        hidden_size: int,
        rng: np.random.Generator,
        index: int = 0,
    ) -> None:
        super().__init__()
        self.index = index
        self.input_size = input_size
        self.hidden_size = hidden_size
        std = 1.0 / np.sqrt(hidden_size)
        self.w_x = Parameter(uniform_init(rng, (input_size, 4 * hidden_size), std))
        self.w_h = Parameter(uniform_init(rng, (hidden_size, 4 * hidden_size), std))
        self.bias = Parameter(np.zeros(4 * hidden_size))

    def zero_state(self, batch: int, dtype) -> LSTMCarry:
        zeros = np.zeros((batch, self.hidden_size))
        return Tensor(zeros, dtype=dtype), Tensor(zeros, dtype=dtype)

    def forward(
        self, x: Tensor, state: Optional[LSTMCarry] = None
    ) -> Tuple[Tensor, LSTMCarry]:
        b, t, _ = x.shape
        if state is None:
            state = self.zero_state(b, x.dtype)
        h, c = state
        n = self.hidden_size
        projected = matmul(x, self.w_x) + self.bias
        outputs = []
        for step in range(t):
            try:
                gates = reshape(slice_along(projected, 1, step, step + 1), (b, 4 * n))
                gates = gates + matmul(h, self.w_h)
                i = sigmoid(slice_along(gates, 1, 0, n))
                f = sigmoid(slice_along(gates, 1, n, 2 * n))
                g = tanh(slice_along(gates, 1, 2 * n, 3 * n))
                o = sigmoid(slice_along(gates, 1, 3 * n, 4 * n))
                c = f * c + i * g
                h = o * tanh(c)
            except NumericError as exc:
                raise NumericError(f'layer {self.index} step {step}: {exc}') from exc
            outputs.append(h)
        return stack(outputs, axis=1), (h, c)


def lstm_forward(
    layer: LSTMLayer, x: Tensor, state: Optional[LSTMCarry] = None
) -> Tuple[Tensor, LSTMCarry]:
    '''Run one layer; returns ``(y [B, T, H], (h_T, c_T))``.'''
    return layer(x, state)
