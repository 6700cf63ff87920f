'''
Central finite-difference gradient checks.

The analytic gradient of a scalar-valued closure is compared coordinate
by coordinate with ``(f(x + h) - f(x - h)) / 2h``.  Relative error uses
``max(|analytic|, |numeric|, floor)`` as denominator so that coordinates
whose true gradient is (near) zero are judged on absolute error.
'''

from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Sequence, Union

import numpy as np

from baby_hgrn.tensor.tensor import Tensor, backward, no_grad


@dataclass
class GradCheckResult:
    '''Outcome of checking one input tensor.'''

    name: str
    analytic: np.ndarray
    numeric: np.ndarray
    relative_error: np.ndarray

    @property
    def max_error(self) -> float:
        return float(self.relative_error.max()) if self.relative_error.size else 0.0

    def fraction_within(self, tol: float) -> float:
        if not self.relative_error.size:
            return 1.0
        return float(np.mean(self.relative_error <= tol))

    def passed(
        self, tight: float = 1e-4, loose: float = 1e-3, quorum: float = 0.95
    ) -> bool:
        '''``tight`` must hold on ``quorum`` of coordinates and ``loose`` on all.'''
        return self.fraction_within(tight) >= quorum and self.max_error <= loose


def numerical_gradient(
    fn: Callable[[], Tensor], tensor: Tensor, h: float = 1e-3
) -> np.ndarray:
    '''Central-difference gradient of ``fn()`` with respect to ``tensor``.'''
    grad = np.zeros(tensor.shape, dtype=np.float64)
    flat = tensor.data.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            plus = fn().item()
            flat[i] = original - h
            minus = fn().item()
            flat[i] = original
            grad.reshape(-1)[i] = (plus - minus) / (2.0 * h)
    return grad


def check_gradients(
    fn: Callable[[], Tensor],
    inputs: Union[Sequence[Tensor], Mapping[str, Tensor]],
    h: float = 1e-3,
    floor: float = 1e-3,
) -> Dict[str, GradCheckResult]:
    '''
    Compare analytic and finite-difference gradients of ``fn``.

    Args:
        fn: Zero-argument closure returning a scalar Tensor built from
            ``inputs``.  It is re-evaluated twice per coordinate.
        inputs: Tensors to check (``requires_grad`` must be set), as a
            sequence or a name -> tensor mapping.
        h: Finite-difference step.
        floor: Lower bound on the relative-error denominator.

    Returns:
        Mapping from input name (or position) to :class:`GradCheckResult`.
    '''
    named = (
        dict(inputs)
        if isinstance(inputs, Mapping)
        else {str(i): t for i, t in enumerate(inputs)}
    )
    for tensor in named.values():
        tensor.zero_grad()
    backward(fn())

    results: Dict[str, GradCheckResult] = {}
    for name, tensor in named.items():
        if tensor.grad is None:
            analytic = np.zeros(tensor.shape)
        else:
            analytic = tensor.grad.astype(np.float64)
        numeric = numerical_gradient(fn, tensor, h=h)
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
        results[name] = GradCheckResult(
            name=name,
            analytic=analytic,
            numeric=numeric,
            relative_error=np.abs(analytic - numeric) / denom,
        )
    return results
