'''
Minimal dense-array kernel with reverse-mode gradients.
'''

from baby_hgrn.tensor.gradcheck import (
    GradCheckResult,
    check_gradients,
    numerical_gradient,
)
from baby_hgrn.tensor.ops import (
    add,
    as_tensor,
    concat,
    cumsum,
    diag_scale,
    div,
    embedding,
    exp,
    gather_last,
    getitem,
    log,
    log_softmax,
    matmul,
    mean,
    mul,
    neg,
    outer_product,
    power,
    reshape,
    sigmoid,
    silu,
    slice_along,
    softmax,
    stack,
    sub,
    swap_last,
    tanh,
    transpose,
)
from baby_hgrn.tensor.ops import sum as sum_
from baby_hgrn.tensor.tensor import (
    ComputationTape,
    TapeRecord,
    Tensor,
    backward,
    default_dtype,
    get_default_dtype,
    is_grad_enabled,
    no_grad,
)

__all__ = [
    'ComputationTape',
    'GradCheckResult',
    'TapeRecord',
    'Tensor',
    'add',
    'as_tensor',
    'backward',
    'check_gradients',
    'concat',
    'cumsum',
    'default_dtype',
    'diag_scale',
    'div',
    'embedding',
    'exp',
    'gather_last',
    'get_default_dtype',
    'getitem',
    'is_grad_enabled',
    'log',
    'log_softmax',
    'matmul',
    'mean',
    'mul',
    'neg',
    'no_grad',
    'numerical_gradient',
    'outer_product',
    'power',
    'reshape',
    'sigmoid',
    'silu',
    'slice_along',
    'softmax',
    'stack',
    'sub',
    'sum_',
    'swap_last',
    'tanh',
    'transpose',
]
