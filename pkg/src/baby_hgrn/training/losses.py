'''
Training objectives.

* :func:`ce_loss`: mean next-token negative log-likelihood in nats.
* :func:`kd_loss`: token-mean ``KL(softmax(z_t / tau) || softmax(z_s / tau))``
  with the teacher treated as a constant; no ``tau**2`` rescaling.
* :func:`total_loss`: ``(1 - alpha) * ce + alpha * kd``.
'''

from typing import Any, Optional

import numpy as np

from baby_hgrn.errors import ConfigError, DimensionError, UsageError
from baby_hgrn.tensor import Tensor, gather_last, log_softmax, no_grad


def ce_loss(
    logits: Tensor,
    targets: Any,
    mask: Optional[np.ndarray] = None,
    ignore_id: Optional[int] = None,
) -> Tensor:
    '''
    Mean cross-entropy over unmasked positions.

    Args:
        logits: ``[..., T, V]``.
        targets: Integer ids shaped like ``logits.shape[:-1]``.
        mask: Optional boolean array, ``True`` where a position counts.
        ignore_id: Target id (e.g. padding) excluded from the mean.

    Raises:
        DimensionError: If targets do not match the logits' leading shape.
        UsageError: If every position is masked.
    '''
    targets = np.asarray(targets)
    if targets.shape != logits.shape[:-1]:
        raise DimensionError(
            f'ce_loss: targets {targets.shape} do not match logits {logits.shape}'
        )
    if mask is None:
        keep = np.ones(targets.shape, dtype=bool)
    else:
        keep = np.asarray(mask, dtype=bool)
    if ignore_id is not None:
        keep = keep & (targets != ignore_id)
    count = int(keep.sum())
    if count == 0:
        raise UsageError('ce_loss: every position is masked')
    picked = gather_last(log_softmax(logits, axis=-1), targets)
    if mask is None and ignore_id is None:
        return -picked.mean()
    weights = Tensor(keep / count, dtype=logits.dtype)
    return -(picked * weights).sum()


def kd_loss(
    teacher_logits: Any,
    student_logits: Tensor,
    temperature: float = 1.0,
) -> Tensor:
    '''
    Token-mean KL divergence from the teacher to the student distribution.

    Teacher logits may be a Tensor or an array; they are used as values
    only, so no gradient ever reaches the teacher.

    Raises:
        DimensionError: If the two logit sets differ in shape.
        ConfigError: If ``temperature <= 0``.
    '''
    if temperature <= 0:
        raise ConfigError(f'temperature must be > 0, got {temperature}')
    if isinstance(teacher_logits, Tensor):
        teacher_logits = teacher_logits.data
    teacher = np.asarray(teacher_logits, dtype=student_logits.dtype)
    if teacher.shape != student_logits.shape:
        raise DimensionError(
            f'kd_loss: teacher {teacher.shape} and student '
            f'{student_logits.shape} differ'
        )
    dtype = teacher.dtype
    with no_grad():
        teacher_log_p = log_softmax(Tensor(teacher / temperature, dtype=dtype)).data
    teacher_p = Tensor(np.exp(teacher_log_p), dtype=dtype)
    student_log_q = log_softmax(student_logits / temperature, axis=-1)
    gap = Tensor(teacher_log_p, dtype=dtype) - student_log_q
    return (teacher_p * gap).sum(axis=-1).mean()


def total_loss(ce: Any, kd: Any, alpha: float) -> Any:
    '''
    Blend ``(1 - alpha) * ce + alpha * kd``.

    ``alpha == 0`` returns ``ce`` and ``alpha == 1`` returns ``kd``
    unchanged.

    Raises:
        ConfigError: If ``alpha`` is outside ``[0, 1]``.
    '''
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f'alpha must be in [0, 1], got {alpha}')
    if alpha == 0.0:
        return ce
    if alpha == 1.0:
        return kd
    return (1.0 - alpha) * ce + alpha * kd
