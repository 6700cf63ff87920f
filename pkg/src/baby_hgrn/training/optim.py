'''
Adam, the linear learning-rate schedule and global-norm clipping.
'''

from typing import List, Optional, Sequence

import numpy as np

from baby_hgrn.tensor import Tensor


def linear_schedule(base_lr: float, step: int, total_steps: int) -> float:
    '''``base_lr * (1 - step / total_steps)``, floored at 0.'''
    if total_steps <= 0:
        return base_lr
    return base_lr * max(0.0, 1.0 - step / total_steps)


def global_grad_norm(params: Sequence[Tensor]) -> float:
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float(np.sum(np.square(p.grad, dtype=np.float64)))
    return float(np.sqrt(total))


def clip_grad_norm(params: Sequence[Tensor], max_norm: float) -> float:
    '''
    Rescale gradients in place so their global L2 norm is at most ``max_norm``.

    Returns:
        The norm before clipping.
    '''
    norm = global_grad_norm(params)
    if norm > max_norm:
        scale = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad = (p.grad * scale).astype(p.grad.dtype)
    return norm


class Adam:
    '''
    Bias-corrected Adam without weight decay.

    Args:
        params: Parameters to update.
        lr: Default learning rate (overridable per step).
        betas: Exponential decay of the first and second moments.
        eps: Denominator guard.
    '''

    def __init__(
        self,
        params: Sequence[Tensor],
        lr: float = 1e-3,
        betas: tuple = (0.9, 0.999),
        eps: float = 1e-8,
    ) -> None:
        self.params: List[Tensor] = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data, dtype=np.float64) for p in self.params]
        self.v = [np.zeros_like(p.data, dtype=np.float64) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self, lr: Optional[float] = None) -> None:
        lr = self.lr if lr is None else lr
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for i, p in enumerate(self.params):
            if p.grad is None:
                continue
            g = p.grad.astype(np.float64)
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            m_hat = self.m[i] / correction1
            v_hat = self.v[i] / correction2
            update = lr * m_hat / (np.sqrt(v_hat) + self.eps)
            p.data -= update.astype(p.data.dtype)
