'''
Model configuration and the named preset registry.

Presets reproduce the published model configurations (hidden size,
depth, hidden and expand ratios).  Only the HGRN2 and LSTM families are
implemented; the Transformer, Mamba and xLSTM rows are kept as
documentation so ``inspect``-style listings show the whole comparison
set, and building one raises :class:`ConfigError`.
'''

from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Mapping, Optional

from baby_hgrn.errors import ConfigError

ARCHITECTURES = ('hgrn2', 'lstm')


@dataclass
class ModelConfig:
    '''
    Hyperparameters of one language model.

    Attributes:
        architecture: ``"hgrn2"`` or ``"lstm"``.
        vocab_size: Number of token ids.
        hidden_size: Model width ``d`` (LSTM hidden size).
        num_layers: Stacked mixing layers ``L``.
        expand_ratio: HGRN2 state expansion ``e`` (key dim per head).
        hidden_ratio: Channel-mixing width multiplier ``r``.
        num_heads: HGRN2 heads ``h``; ``None`` derives ``hidden_size //
            expand_ratio`` so that the parameter count does not depend
            on ``expand_ratio``.
        block_size: Block length of the chunkwise scan.
        embedding_size: LSTM input embedding width; ``None`` means
            ``hidden_size``.
        dropout: LSTM dropout between stacked layers.
        norm_eps: RMSNorm epsilon.
    '''

    architecture: str = 'hgrn2'
    vocab_size: int = 2_000
    hidden_size: int = 64
    num_layers: int = 4
    expand_ratio: int = 8
    hidden_ratio: int = 4
    num_heads: Optional[int] = None
    block_size: int = 16
    embedding_size: Optional[int] = None
    dropout: float = 0.0
    norm_eps: float = 1e-6

    @property
    def heads(self) -> int:
        '''Resolved head count.'''
        if self.num_heads is None:
            return max(1, self.hidden_size // self.expand_ratio)
        return self.num_heads

    @property
    def head_dim(self) -> int:
        '''Value dimension per head (``d / h``).'''
        return self.hidden_size // self.heads

    @property
    def embed_dim(self) -> int:
        return self.embedding_size or self.hidden_size

    def validate(self) -> 'ModelConfig':
        '''
        Check ranges and divisibility.

        Raises:
            ConfigError: On any invalid field.
        '''
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(
                f'Unknown architecture {self.architecture!r}. '
                f'Available: {list(ARCHITECTURES)}'
            )
        for name in ('vocab_size', 'hidden_size', 'num_layers', 'expand_ratio'):
            if getattr(self, name) < 1:
                raise ConfigError(f'{name} must be >= 1, got {getattr(self, name)}')
        if self.vocab_size < 2:
            raise ConfigError(f'vocab_size must be >= 2, got {self.vocab_size}')
        if self.hidden_ratio < 1 or self.block_size < 1:
            raise ConfigError('hidden_ratio and block_size must be >= 1')
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f'dropout must be in [0, 1), got {self.dropout}')
        if self.architecture == 'hgrn2':
            if self.num_heads is None and self.hidden_size % self.expand_ratio:
                raise ConfigError(
                    f'hidden_size {self.hidden_size} is not divisible by '
                    f'expand_ratio {self.expand_ratio}'
                )
            if self.heads < 1 or self.hidden_size % self.heads:
                raise ConfigError(
                    f'hidden_size {self.hidden_size} is not divisible by '
                    f'num_heads {self.heads}'
                )
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'ModelConfig':
        '''
        Build a config, rejecting unknown keys.

        Raises:
            ConfigError: On unknown keys or invalid values.
        '''
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f'Unknown model config keys: {unknown}')
        return cls(**dict(data)).validate()


# ---------------------------------------------------------------------------
# Preset registry
# ---------------------------------------------------------------------------


class ModelPreset:
    '''
    A named model configuration.

    Args:
        name: Registry key.
        description: Human-readable description.
        settings: Field values; a :class:`ModelConfig` for implemented
            presets, free-form documentation otherwise.
        implemented: Whether :func:`build_model` can instantiate it.
    '''

    def __init__(
        self,
        name: str,
        description: str,
        settings: Dict[str, Any],
        implemented: bool = True,
    ) -> None:
        self.name = name
        self.description = description
        self.settings = settings
        self.implemented = implemented

    def config(self, **overrides: Any) -> ModelConfig:
        '''
        Materialize the preset, applying ``overrides`` on top.

        Raises:
            ConfigError: If the preset is documentation-only.
        '''
        if not self.implemented:
            raise ConfigError(
                f'Preset {self.name!r} documents an architecture '
                'that is not implemented'
            )
        return ModelConfig.from_dict({**self.settings, **overrides})

    def __repr__(self) -> str:
        return f'ModelPreset({self.name!r}, implemented={self.implemented})'


PRESETS: Dict[str, ModelPreset] = {}


def _register(preset: ModelPreset) -> ModelPreset:
    PRESETS[preset.name] = preset
    return preset


# ── Desk scale ────────────────────────────────────────────────────────────
_register(
    ModelPreset(
        name='hgrn2-desk',
        description='Toy HGRN2 for CPU experiments',
        settings=dict(
            architecture='hgrn2',
            vocab_size=2_000,
            hidden_size=64,
            num_layers=4,
            expand_ratio=8,
            hidden_ratio=4,
        ),
    )
)

_register(
    ModelPreset(
        name='lstm-desk',
        description='Toy two-layer LSTM baseline',
        settings=dict(
            architecture='lstm',
            vocab_size=2_000,
            hidden_size=64,
            num_layers=2,
            embedding_size=64,
            dropout=0.1,
        ),
    )
)

# ── Published configurations ──────────────────────────────────────────────
_register(
    ModelPreset(
        name='hgrn2-360m',
        description='HGRN2, hidden 1024, 26 layers, hidden ratio 4, expand ratio 128',
        settings=dict(
            architecture='hgrn2',
            vocab_size=16_000,
            hidden_size=1024,
            num_layers=26,
            expand_ratio=128,
            hidden_ratio=4,
            num_heads=None,
            block_size=64,
        ),
    )
)

_register(
    ModelPreset(
        name='hgrn2-1.2b',
        description='HGRN2, hidden 2048, 18 layers, hidden ratio 4, expand ratio 128',
        settings=dict(
            architecture='hgrn2',
            vocab_size=16_000,
            hidden_size=2048,
            num_layers=18,
            expand_ratio=128,
            hidden_ratio=4,
            num_heads=None,
            block_size=64,
        ),
    )
)

_register(
    ModelPreset(
        name='lstm-appendix',
        description='LSTM, hidden 9120, embedding 512, 2 layers, dropout 0.1',
        settings=dict(
            architecture='lstm',
            vocab_size=16_000,
            hidden_size=9120,
            num_layers=2,
            embedding_size=512,
            dropout=0.1,
        ),
    )
)

# ── Documentation only ────────────────────────────────────────────────────
_register(
    ModelPreset(
        name='transformer-410m',
        description='Transformer, hidden 1024, intermediate 4096, 22 layers, 32 heads',
        settings=dict(
            hidden_size=1024, intermediate_size=4096, num_layers=22, num_heads=32
        ),
        implemented=False,
    )
)

_register(
    ModelPreset(
        name='mamba-360m',
        description='Mamba, hidden 1024, intermediate 2048, 48 layers, state size 8',
        settings=dict(
            hidden_size=1024, intermediate_size=2048, num_layers=48, state_size=8
        ),
        implemented=False,
    )
)

_register(
    ModelPreset(
        name='xlstm-360m',
        description='xLSTM, embedding 1024, 48 blocks, 4 mLSTM heads, ratio 1:0',
        settings=dict(embedding_size=1024, num_blocks=48, mlstm_heads=4, ratio='1:0'),
        implemented=False,
    )
)


def get_preset(name: str) -> ModelPreset:
    '''
    Look up a model preset.

    Raises:
        KeyError: If the name is not registered.
    '''
    if name not in PRESETS:
        available = ', '.join(sorted(PRESETS))
        raise KeyError(f'Unknown model preset {name!r}. Available presets: {available}')
    return PRESETS[name]


def list_presets() -> Dict[str, str]:
    '''Return ``{name: description}``, marking documentation-only entries.'''
    return {
        p.name: p.description if p.implemented else f'{p.description} (not implemented)'
        for p in PRESETS.values()
    }
