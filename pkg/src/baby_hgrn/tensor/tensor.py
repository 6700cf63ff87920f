'''
Dense tensors with a reverse-mode gradient tape.

A :class:`Tensor` wraps a row-major :class:`numpy.ndarray` (float32 by
default) together with an optional gradient buffer.  Every differentiable
operation in :mod:`baby_hgrn.tensor.ops` attaches a :class:`TapeRecord`
to its output that remembers the op kind, its inputs and a closure over
the activations saved for the backward rule.

:func:`backward` gathers the records reachable from a scalar loss into a
:class:`ComputationTape` and replays them in strict reverse creation
order, accumulating gradients into every tensor that requires them.
'''

import itertools
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from baby_hgrn.errors import UsageError

_ids = itertools.count()
_local = threading.local()
_default_dtype: Any = np.float32

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


def is_grad_enabled() -> bool:
    '''Return ``True`` when ops record onto the tape in this thread.'''
    return getattr(_local, 'grad_enabled', True)


@contextmanager
def no_grad() -> Iterator[None]:
    '''Disable tape recording inside the block (thread-local).'''
    previous = is_grad_enabled()
    _local.grad_enabled = False
    try:
        yield
    finally:
        _local.grad_enabled = previous


def get_default_dtype() -> Any:
    '''Storage dtype used for new tensors (``float32`` unless overridden).'''
    return _default_dtype


@contextmanager
def default_dtype(dtype: Any) -> Iterator[None]:
    '''
    Temporarily switch the storage dtype of newly created tensors.

    Gradient checks run under ``default_dtype(np.float64)`` so that the
    finite-difference oracle is not dominated by single-precision
    rounding.
    '''
    global _default_dtype
    previous = _default_dtype
    _default_dtype = np.dtype(dtype).type
    try:
        yield
    finally:
        _default_dtype = previous


@dataclass(eq=False)
class TapeRecord:
    '''
    One recorded operation.

    Attributes:
        op: Op kind (e.g. ``'matmul'``).
        inputs: Input tensors, in argument order.
        output_id: Creation id of the tensor this record produced.
        backward: Maps the output gradient to one gradient (or ``None``)
            per input.  Saved activations live in its closure.
    '''

    op: str
    inputs: Tuple['Tensor', ...]
    output_id: int
    backward: BackwardFn


class Tensor:
    '''
    Dense n-dimensional array with an optional gradient slot.

    Args:
        data: Anything :func:`numpy.asarray` accepts.
        requires_grad: Whether gradients should be accumulated into
            this tensor by :func:`backward`.
        dtype: Storage dtype; defaults to :func:`get_default_dtype`.
    '''

    __array_priority__ = 100

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        dtype: Any = None,
    ) -> None:
        self.data = np.array(
            data, dtype=_default_dtype if dtype is None else dtype, order='C'
        )
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.id = next(_ids)
        self.record: Optional[TapeRecord] = None

    @classmethod
    def from_op(
        cls,
        data: np.ndarray,
        op: str,
        inputs: Sequence['Tensor'],
        backward_fn: BackwardFn,
    ) -> 'Tensor':
        '''Wrap an op result, recording it when any input needs gradients.'''
        out = cls.__new__(cls)
        out.data = data
        out.grad = None
        out.id = next(_ids)
        out.requires_grad = is_grad_enabled() and any(
            t.requires_grad for t in inputs
        )
        out.record = (
            TapeRecord(op, tuple(inputs), out.id, backward_fn)
            if out.requires_grad
            else None
        )
        return out

    # ------------------------------------------------------------------
    # Introspection
    # ------------------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> Any:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        '''Return a copy of the values.'''
        return self.data.copy()

    def item(self) -> float:
        '''Return the single value of a one-element tensor.'''
        if self.data.size != 1:
            raise UsageError(
                f'item() needs a one-element tensor, got shape {self.shape}'
            )
        return float(self.data.reshape(()))

    def detach(self) -> 'Tensor':
        '''Return a tape-free tensor sharing no state with this one.'''
        return Tensor(self.data, dtype=self.data.dtype)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        flag = ', requires_grad=True' if self.requires_grad else ''
        return f'Tensor({self.data!r}{flag})'

    def __len__(self) -> int:
        return len(self.data)

    # ------------------------------------------------------------------
    # Operator sugar (implemented in baby_hgrn.tensor.ops)
    # ------------------------------------------------------------------

    def __add__(self, other: Any) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.add(self, other)

    def __radd__(self, other: Any) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.add(other, self)

    def __sub__(self, other: Any) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.sub(other, self)

    def __mul__(self, other: Any) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.mul(self, other)

    def __rmul__(self, other: Any) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.mul(other, self)

    def __truediv__(self, other: Any) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.div(self, other)

    def __rtruediv__(self, other: Any) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.div(other, self)

    def __neg__(self) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.neg(self)

    def __pow__(self, exponent: float) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.power(self, exponent)

    def __matmul__(self, other: 'Tensor') -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.matmul(self, other)

    def __getitem__(self, index: Any) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.getitem(self, index)

    def sum(self, axis: Any = None, keepdims: bool = False) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Any = None, keepdims: bool = False) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape: Any) -> 'Tensor':
        from baby_hgrn.tensor import ops

        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes: int) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.transpose(self, axes or None)

    def exp(self) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.exp(self)

    def log(self) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.log(self)

    def sigmoid(self) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.sigmoid(self)

    def tanh(self) -> 'Tensor':
        from baby_hgrn.tensor import ops

        return ops.tanh(self)


class ComputationTape:
    '''
    Ordered view of the records reachable from a tensor.

    ``nodes`` holds every reachable tensor that requires gradients, in
    creation order; ``records`` holds the op records among them.
    '''

    def __init__(self, nodes: List[Tensor]) -> None:
        self.nodes = nodes

    @classmethod
    def from_output(cls, root: Tensor) -> 'ComputationTape':
        seen = {}
        stack = [root]
        while stack:
            node = stack.pop()
            if node.id in seen:
                continue
            seen[node.id] = node
            if node.record is not None:
                for parent in node.record.inputs:
                    if parent.requires_grad and parent.id not in seen:
                        stack.append(parent)
        return cls(sorted(seen.values(), key=lambda t: t.id))

    @property
    def records(self) -> List[TapeRecord]:
        return [n.record for n in self.nodes if n.record is not None]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TapeRecord]:
        return iter(self.records)

    def replay(self, root: Tensor, seed: np.ndarray) -> None:
        '''Propagate ``seed`` from ``root`` back through the tape.'''
        pending = {root.id: seed}
        for node in reversed(self.nodes):
            grad = pending.pop(node.id, None)
            if grad is None:
                continue
            node.grad = grad.copy() if node.grad is None else node.grad + grad
            record = node.record
            if record is None:
                continue
            for parent, parent_grad in zip(record.inputs, record.backward(grad)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                if parent.id in pending:
                    pending[parent.id] = pending[parent.id] + parent_grad
                else:
                    pending[parent.id] = parent_grad


def backward(loss: Tensor) -> None:
    '''
    Accumulate d(loss)/d(t) into ``t.grad`` for every reachable tensor.

    Gradients add onto whatever is already stored, so calling this twice
    without zeroing doubles them.

    Raises:
        UsageError: If ``loss`` is not a scalar or was not produced
            through the tape.
    '''
    if loss.data.size != 1:
        raise UsageError(f'backward() needs a scalar loss, got shape {loss.shape}')
    if not loss.requires_grad:
        raise UsageError('backward() called on a tensor that does not require grad')
    tape = ComputationTape.from_output(loss)
    tape.replay(loss, np.ones_like(loss.data))
