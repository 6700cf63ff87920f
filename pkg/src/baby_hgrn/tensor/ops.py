'''
Differentiable operations on :class:`~baby_hgrn.tensor.tensor.Tensor`.

Each op computes its forward value with NumPy, refuses to produce
non-finite values, and records a backward rule on the tape when any
input requires gradients.

Broadcasting follows NumPy rules for ``add``, ``sub``, ``mul`` and
``div`` and for the leading (batch) dimensions of ``matmul``,
``outer_product`` and ``diag_scale``; gradients are summed back over
broadcast axes.  Reductions accumulate in float64 and cast back to the
storage dtype.
'''

import builtins
from typing import Any, Optional, Sequence, Tuple, Union

import numpy as np

from baby_hgrn.errors import DimensionError, NumericError
from baby_hgrn.tensor.tensor import Tensor

Axis = Union[None, int, Tuple[int, ...]]


# ----------------------------------------------------------------------
# Helpers
# ----------------------------------------------------------------------


def as_tensor(value: Any, dtype: Any = None) -> Tensor:
    '''Return ``value`` unchanged if it is a Tensor, else wrap it as a constant.'''
    if isinstance(value, Tensor):
        return value
    return Tensor(value, dtype=dtype)


def _coerce(a: Any, b: Any) -> Tuple[Tensor, Tensor]:
    if isinstance(a, Tensor) and not isinstance(b, Tensor):
        return a, Tensor(b, dtype=a.dtype)
    if isinstance(b, Tensor) and not isinstance(a, Tensor):
        return Tensor(a, dtype=b.dtype), b
    return as_tensor(a), as_tensor(b)


def _finite(op: str, data: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(data)):
        raise NumericError(f'{op} produced non-finite values')
    return data


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    '''Sum ``grad`` down to ``shape`` over the axes NumPy broadcast.'''
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, *shapes: Tuple[int, ...]) -> Tuple[int, ...]:
    try:
        return np.broadcast_shapes(*shapes)
    except ValueError:
        raise DimensionError(f'{op}: shapes {list(shapes)} do not broadcast') from None


def _normalize_axis(axis: Axis, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    return tuple(a % ndim for a in axes)


# ----------------------------------------------------------------------
# Elementwise arithmetic
# ----------------------------------------------------------------------


def add(a: Any, b: Any) -> Tensor:
    a, b = _coerce(a, b)
    _broadcast_shape('add', a.shape, b.shape)
    out = _finite('add', a.data + b.data)

    def backward(g: np.ndarray):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return Tensor.from_op(out, 'add', (a, b), backward)


def sub(a: Any, b: Any) -> Tensor:
    a, b = _coerce(a, b)
    _broadcast_shape('sub', a.shape, b.shape)
    out = _finite('sub', a.data - b.data)

    def backward(g: np.ndarray):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return Tensor.from_op(out, 'sub', (a, b), backward)


def neg(x: Tensor) -> Tensor:
    def backward(g: np.ndarray):
        return (-g,)

    return Tensor.from_op(-x.data, 'neg', (x,), backward)


def mul(a: Any, b: Any) -> Tensor:
    a, b = _coerce(a, b)
    _broadcast_shape('mul', a.shape, b.shape)
    with np.errstate(over='ignore', invalid='ignore'):
        out = _finite('mul', a.data * b.data)

    def backward(g: np.ndarray):
        ga = _unbroadcast(g * b.data, a.shape) if a.requires_grad else None
        gb = _unbroadcast(g * a.data, b.shape) if b.requires_grad else None
        return ga, gb

    return Tensor.from_op(out, 'mul', (a, b), backward)


def div(a: Any, b: Any) -> Tensor:
    a, b = _coerce(a, b)
    _broadcast_shape('div', a.shape, b.shape)
    with np.errstate(all='ignore'):
        out = _finite('div', a.data / b.data)

    def backward(g: np.ndarray):
        ga = _unbroadcast(g / b.data, a.shape) if a.requires_grad else None
        gb = (
            _unbroadcast(-g * out / b.data, b.shape) if b.requires_grad else None
        )
        return ga, gb

    return Tensor.from_op(out, 'div', (a, b), backward)


def power(x: Tensor, exponent: float) -> Tensor:
    '''Raise to a scalar power.'''
    with np.errstate(all='ignore'):
        out = _finite('power', x.data**exponent)

    def backward(g: np.ndarray):
        return (g * exponent * x.data ** (exponent - 1),)

    return Tensor.from_op(out, 'power', (x,), backward)


def exp(x: Tensor) -> Tensor:
    with np.errstate(over='ignore'):
        out = _finite('exp', np.exp(x.data))

    def backward(g: np.ndarray):
        return (g * out,)

    return Tensor.from_op(out, 'exp', (x,), backward)


def log(x: Tensor, floor: Optional[float] = None) -> Tensor:
    '''
    Natural log. With ``floor``, inputs below it are clamped first and
    receive no gradient.
    '''
    if floor is None:
        with np.errstate(divide='ignore', invalid='ignore'):
            out = _finite('log', np.log(x.data))

        def backward(g: np.ndarray):
            return (g / x.data,)

        return Tensor.from_op(out, 'log', (x,), backward)

    clamped = np.maximum(x.data, floor)
    out = _finite('log', np.log(clamped))
    live = x.data > floor

    def floored_backward(g: np.ndarray):
        return (np.where(live, g / clamped, 0.0).astype(x.dtype),)

    return Tensor.from_op(out, 'log', (x,), floored_backward)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    positive = z >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-z[positive]))
    e = np.exp(z[~positive])
    out[~positive] = e / (1.0 + e)
    return out


def sigmoid(x: Tensor) -> Tensor:
    out = _sigmoid(x.data)

    def backward(g: np.ndarray):
        return (g * out * (1.0 - out),)

    return Tensor.from_op(out, 'sigmoid', (x,), backward)


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def backward(g: np.ndarray):
        return (g * (1.0 - out * out),)

    return Tensor.from_op(out, 'tanh', (x,), backward)


def silu(x: Tensor) -> Tensor:
    '''``x * sigmoid(x)``.'''
    return mul(x, sigmoid(x))


# ----------------------------------------------------------------------
# Normalized exponentials
# ----------------------------------------------------------------------


def _check_axis_extent(op: str, x: Tensor, axis: int) -> None:
    if x.ndim == 0 or x.shape[axis] < 1:
        raise DimensionError(f'{op}: axis {axis} of shape {x.shape} is empty')


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    '''Softmax with max-subtraction; rows sum to one.'''
    _check_axis_extent('softmax', x, axis)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    total = e.sum(axis=axis, keepdims=True, dtype=np.float64)
    out = _finite('softmax', (e / total).astype(x.dtype))

    def backward(g: np.ndarray):
        inner = (g * out).sum(axis=axis, keepdims=True, dtype=np.float64)
        return ((out * (g - inner)).astype(x.dtype),)

    return Tensor.from_op(out, 'softmax', (x,), backward)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    '''``log(softmax(x))`` evaluated through log-sum-exp.'''
    _check_axis_extent('log_softmax', x, axis)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True, dtype=np.float64))
    out = _finite('log_softmax', (shifted - lse).astype(x.dtype))

    def backward(g: np.ndarray):
        total = g.sum(axis=axis, keepdims=True, dtype=np.float64)
        return ((g - np.exp(out) * total).astype(x.dtype),)

    return Tensor.from_op(out, 'log_softmax', (x,), backward)


# ----------------------------------------------------------------------
# Reductions and scans
# ----------------------------------------------------------------------


def sum(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    axes = _normalize_axis(axis, x.ndim)
    out = np.asarray(
        x.data.sum(axis=axes, keepdims=keepdims, dtype=np.float64), dtype=x.dtype
    )
    _finite('sum', out)

    def backward(g: np.ndarray):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, x.shape),)

    return Tensor.from_op(out, 'sum', (x,), backward)


def mean(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axis(axis, x.ndim)
    count = int(np.prod([x.shape[a] for a in axes])) if axes else 1
    out = np.asarray(
        x.data.sum(axis=axes, keepdims=keepdims, dtype=np.float64) / count,
        dtype=x.dtype,
    )
    _finite('mean', out)

    def backward(g: np.ndarray):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g / count, x.shape),)

    return Tensor.from_op(out, 'mean', (x,), backward)


def cumsum(x: Tensor, axis: int = 0) -> Tensor:
    '''Inclusive running sum along ``axis``.'''
    with np.errstate(over='ignore'):
        out = np.cumsum(x.data, axis=axis, dtype=np.float64).astype(x.dtype)
    _finite('cumsum', out)

    def backward(g: np.ndarray):
        flipped = np.flip(g, axis=axis)
        return (np.flip(np.cumsum(flipped, axis=axis), axis=axis),)

    return Tensor.from_op(out, 'cumsum', (x,), backward)


# ----------------------------------------------------------------------
# Shape manipulation
# ----------------------------------------------------------------------


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError:
        raise DimensionError(
            f'reshape: cannot view {x.shape} as {tuple(shape)}'
        ) from None

    def backward(g: np.ndarray):
        return (g.reshape(x.shape),)

    return Tensor.from_op(out, 'reshape', (x,), backward)


def transpose(x: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    perm = tuple(axes) if axes is not None else tuple(reversed(range(x.ndim)))
    if sorted(a % max(x.ndim, 1) for a in perm) != list(range(x.ndim)):
        raise DimensionError(f'transpose: {perm} is not a permutation of {x.ndim} axes')
    out = np.ascontiguousarray(x.data.transpose(perm))
    inverse = tuple(np.argsort(perm))

    def backward(g: np.ndarray):
        return (g.transpose(inverse),)

    return Tensor.from_op(out, 'transpose', (x,), backward)


def swap_last(x: Tensor) -> Tensor:
    '''Swap the two trailing axes.'''
    perm = list(range(x.ndim))
    perm[-1], perm[-2] = perm[-2], perm[-1]
    return transpose(x, perm)


def getitem(x: Tensor, index: Any) -> Tensor:
    try:
        out = np.array(x.data[index])
    except IndexError as exc:
        raise DimensionError(f'slice: {exc}') from None

    def backward(g: np.ndarray):
        grad = np.zeros_like(x.data)
        np.add.at(grad, index, g)
        return (grad,)

    return Tensor.from_op(out, 'slice', (x,), backward)


def slice_along(x: Tensor, axis: int, start: int, stop: int) -> Tensor:
    '''Contiguous slice ``[start, stop)`` of one axis.'''
    index = [builtins.slice(None)] * x.ndim
    index[axis] = builtins.slice(start, stop)
    return getitem(x, tuple(index))


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise DimensionError('concat: nothing to concatenate')
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as exc:
        raise DimensionError(f'concat: {exc}') from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g: np.ndarray):
        return tuple(np.split(g, bounds, axis=axis))

    return Tensor.from_op(out, 'concat', tuple(tensors), backward)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise DimensionError('stack: nothing to stack')
    try:
        out = np.stack([t.data for t in tensors], axis=axis)
    except ValueError as exc:
        raise DimensionError(f'stack: {exc}') from None

    def backward(g: np.ndarray):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return Tensor.from_op(out, 'stack', tuple(tensors), backward)


# ----------------------------------------------------------------------
# Products
# ----------------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    '''
    Matrix product over the trailing two axes.

    Leading axes broadcast.  Backward: ``dA = dC·Bᵀ``, ``dB = Aᵀ·dC``.

    Raises:
        DimensionError: If either operand has fewer than two axes or the
            inner extents differ.
    '''
    a, b = _coerce(a, b)
    if a.ndim < 2 or b.ndim < 2:
        raise DimensionError(
            f'matmul: operands need >= 2 axes, got {a.shape} and {b.shape}'
        )
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(f'matmul: inner extents differ in {a.shape} @ {b.shape}')
    _broadcast_shape('matmul', a.shape[:-2], b.shape[:-2])
    out = _finite('matmul', np.matmul(a.data, b.data))

    def backward(g: np.ndarray):
        ga = (
            _unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape)
            if a.requires_grad
            else None
        )
        gb = (
            _unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape)
            if b.requires_grad
            else None
        )
        return ga, gb

    return Tensor.from_op(out, 'matmul', (a, b), backward)


def outer_product(a: Tensor, b: Tensor) -> Tensor:
    '''``out[..., i, j] = a[..., i] * b[..., j]``.'''
    a, b = _coerce(a, b)
    _broadcast_shape('outer_product', a.shape[:-1], b.shape[:-1])
    out = _finite('outer_product', a.data[..., :, None] * b.data[..., None, :])

    def backward(g: np.ndarray):
        ga = _unbroadcast((g * b.data[..., None, :]).sum(axis=-1), a.shape)
        gb = _unbroadcast((g * a.data[..., :, None]).sum(axis=-2), b.shape)
        return ga, gb

    return Tensor.from_op(out, 'outer_product', (a, b), backward)


def diag_scale(d: Tensor, m: Tensor) -> Tensor:
    '''``diag(d) · m``: scale row ``i`` of ``m[..., i, :]`` by ``d[..., i]``.'''
    d, m = _coerce(d, m)
    if m.ndim < 2 or d.shape[-1] != m.shape[-2]:
        raise DimensionError(f'diag_scale: cannot scale {m.shape} rows by {d.shape}')
    _broadcast_shape('diag_scale', d.shape[:-1], m.shape[:-2])
    out = _finite('diag_scale', d.data[..., :, None] * m.data)

    def backward(g: np.ndarray):
        gd = _unbroadcast((g * m.data).sum(axis=-1), d.shape)
        gm = _unbroadcast(g * d.data[..., :, None], m.shape)
        return gd, gm

    return Tensor.from_op(out, 'diag_scale', (d, m), backward)


# ----------------------------------------------------------------------
# Indexing by integer ids
# ----------------------------------------------------------------------


def embedding(weight: Tensor, ids: np.ndarray) -> Tensor:
    '''Gather rows of ``weight`` (``[V, d]``) for integer ``ids``.'''
    ids = np.asarray(ids)
    out = _finite('embedding', weight.data[ids])

    def backward(g: np.ndarray):
        grad = np.zeros_like(weight.data)
        np.add.at(grad, ids, g)
        return (grad,)

    return Tensor.from_op(out, 'embedding', (weight,), backward)


def gather_last(x: Tensor, index: np.ndarray) -> Tensor:
    '''Pick ``x[..., index[...]]`` along the last axis.'''
    index = np.asarray(index)[..., None]
    if index.shape[:-1] != x.shape[:-1]:
        raise DimensionError(
            f'gather_last: index {index.shape[:-1]} vs values {x.shape}'
        )
    picked = np.take_along_axis(x.data, index, axis=-1)[..., 0]
    out = _finite('gather_last', picked)

    def backward(g: np.ndarray):
        grad = np.zeros_like(x.data)
        np.put_along_axis(grad, index, g[..., None], axis=-1)
        return (grad,)

    return Tensor.from_op(out, 'gather_last', (x,), backward)
