'''
Parameter containers and the small set of layers the language models use.

:class:`Module` registers :class:`Parameter` and sub-module attributes on
assignment, so ``named_parameters`` walks the tree in definition order
and ``state_dict`` keys read like ``layers.0.mixer.q_proj.weight``.
'''

import logging
from collections import OrderedDict
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np

from baby_hgrn.errors import CheckpointError
from baby_hgrn.tensor import Tensor, embedding, matmul, mean, mul, power, silu

logger = logging.getLogger(__name__)


class Parameter(Tensor):
    '''A leaf tensor that always requires gradients.'''

    def __init__(self, data: Any, dtype: Any = None) -> None:
        super().__init__(data, requires_grad=True, dtype=dtype)


class Module:
    '''Base class for everything that owns parameters.'''

    def __init__(self) -> None:
        object.__setattr__(self, '_parameters', OrderedDict())
        object.__setattr__(self, '_modules', OrderedDict())
        object.__setattr__(self, 'training', True)

    def __setattr__(self, name: str, value: Any) -> None:
        if isinstance(value, Parameter):
            self._parameters[name] = value
        elif isinstance(value, Module):
            self._modules[name] = value
        object.__setattr__(self, name, value)

    def __call__(self, *args: Any, **kwargs: Any) -> Any:
        return self.forward(*args, **kwargs)

    def forward(self, *args: Any, **kwargs: Any) -> Any:
        raise NotImplementedError

    # ------------------------------------------------------------------
    # Traversal
    # ------------------------------------------------------------------

    def named_parameters(self, prefix: str = '') -> Iterator[Tuple[str, Parameter]]:
        for name, param in self._parameters.items():
            yield prefix + name, param
        for name, module in self._modules.items():
            yield from module.named_parameters(f'{prefix}{name}.')

    def parameters(self) -> List[Parameter]:
        return [p for _, p in self.named_parameters()]

    def modules(self) -> Iterator['Module']:
        yield self
        for module in self._modules.values():
            yield from module.modules()

    def zero_grad(self) -> None:
        for param in self.parameters():
            param.zero_grad()

    def train(self, mode: bool = True) -> 'Module':
        for module in self.modules():
            object.__setattr__(module, 'training', mode)
        return self

    def eval(self) -> 'Module':
        return self.train(False)

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def state_dict(self) -> 'OrderedDict[str, np.ndarray]':
        return OrderedDict((name, p.data.copy()) for name, p in self.named_parameters())

    def load_state_dict(
        self, state: Mapping[str, np.ndarray], strict: bool = True
    ) -> None:
        '''
        Copy arrays into the parameters, in place.

        Raises:
            CheckpointError: On missing or unexpected names (when
                ``strict``) or shape mismatches.
        '''
        params = dict(self.named_parameters())
        missing = sorted(set(params) - set(state))
        unexpected = sorted(set(state) - set(params))
        if strict and (missing or unexpected):
            raise CheckpointError(
                f'State mismatch: missing {missing[:5]}, unexpected {unexpected[:5]}'
            )
        for name, param in params.items():
            if name not in state:
                continue
            value = np.asarray(state[name])
            if value.shape != param.shape:
                raise CheckpointError(
                    f'Parameter {name!r}: expected shape {param.shape}, '
                    f'got {value.shape}'
                )
            param.data[...] = value.astype(param.dtype)

    def num_parameters(self, by_module: bool = False) -> Union[int, Dict[str, int]]:
        '''
        Count scalar parameters.

        With ``by_module`` the count is broken down by direct child
        (list children expanded one level, e.g. ``layers.0``).
        '''
        if not by_module:
            return int(sum(p.size for p in self.parameters()))
        counts: Dict[str, int] = {}
        for name, param in self._parameters.items():
            counts[name] = int(param.size)
        for name, module in self._modules.items():
            if isinstance(module, ModuleList):
                for index, child in enumerate(module):
                    counts[f'{name}.{index}'] = child.num_parameters()
            else:
                counts[name] = module.num_parameters()
        return counts


class ModuleList(Module):
    '''An indexable list of sub-modules registered as ``"0"``, ``"1"``, ...'''

    def __init__(self, modules: Optional[List[Module]] = None) -> None:
        super().__init__()
        for module in modules or []:
            self.append(module)

    def append(self, module: Module) -> None:
        setattr(self, str(len(self._modules)), module)

    def __getitem__(self, index: int) -> Module:
        return list(self._modules.values())[index]

    def __len__(self) -> int:
        return len(self._modules)

    def __iter__(self) -> Iterator[Module]:
        return iter(self._modules.values())


def uniform_init(
    rng: np.random.Generator, shape: Tuple[int, ...], std: float
) -> np.ndarray:
    '''Zero-mean uniform values with standard deviation ``std``.'''
    bound = std * np.sqrt(3.0)
    return rng.uniform(-bound, bound, size=shape)


class Linear(Module):
    '''``y = x @ W (+ b)`` with ``W`` of shape ``[in, out]``.'''

    def __init__(
        self,
        in_features: int,
        out_features: int,
        rng: np.random.Generator,
        bias: bool = False,
    ) -> None:
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        self.weight = Parameter(
            uniform_init(rng, (in_features, out_features), 1.0 / np.sqrt(in_features))
        )
        self.bias = Parameter(np.zeros(out_features)) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        y = matmul(x, self.weight)
        if self.bias is not None:
            y = y + self.bias
        return y


class Embedding(Module):
    def __init__(self, num_embeddings: int, dim: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.num_embeddings = num_embeddings
        self.weight = Parameter(uniform_init(rng, (num_embeddings, dim), 1.0))

    def forward(self, ids: np.ndarray) -> Tensor:
        return embedding(self.weight, ids)


class RMSNorm(Module):
    '''Root-mean-square normalization with learnable scale and shift.'''

    def __init__(self, dim: int, eps: float = 1e-6) -> None:
        super().__init__()
        self.eps = eps
        self.scale = Parameter(np.ones(dim))
        self.shift = Parameter(np.zeros(dim))

    def forward(self, x: Tensor) -> Tensor:
        inv_rms = power(mean(mul(x, x), axis=-1, keepdims=True) + self.eps, -0.5)
        return x * inv_rms * self.scale + self.shift


class GatedMLP(Module):
    '''Channel mixing: ``down(silu(gate(x)) * up(x))``.'''

    def __init__(self, dim: int, hidden: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.gate_proj = Linear(dim, hidden, rng)
        self.up_proj = Linear(dim, hidden, rng)
        self.down_proj = Linear(hidden, dim, rng)

    def forward(self, x: Tensor) -> Tensor:
        return self.down_proj(silu(self.gate_proj(x)) * self.up_proj(x))


class Dropout(Module):
    '''
    Inverted dropout; the identity in eval mode or when ``p == 0``.

    Masks are drawn from the generator passed in, so a seeded model
    drops the same units on every rerun.
    '''

    def __init__(self, p: float, rng: np.random.Generator) -> None:
        super().__init__()
        self.p = p
        self.rng = rng

    def forward(self, x: Tensor) -> Tensor:
        if not self.training or self.p == 0.0:
            return x
        keep = self.rng.random(x.shape) >= self.p
        return x * Tensor(keep / (1.0 - self.p), dtype=x.dtype)
