'''
Training and distillation hyperparameters.

Defaults follow the published pretraining table: Adam, batch 64,
sequence length 512, gradient clipping at 1.0, linear learning-rate
decay and 3 epochs.
'''

from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Mapping, Optional, Type, TypeVar

from baby_hgrn.errors import ConfigError

SCHEDULERS = ('linear', 'constant')

T = TypeVar('T')


def _from_dict(cls: Type[T], data: Mapping[str, Any]) -> T:
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f'Unknown {cls.__name__} keys: {unknown}')
    try:
        instance = cls(**dict(data))
    except TypeError as exc:
        raise ConfigError(f'Invalid {cls.__name__}: {exc}') from exc
    return instance.validate()


@dataclass
class TrainConfig:
    '''
    Attributes:
        epochs: Passes over the dataset.
        batch_size: Chunks per optimizer step.
        learning_rate: Peak (initial) learning rate.
        beta1, beta2, eps: Adam moments and denominator guard.
        sequence_length: Chunk length; must match the dataset.
        max_grad_norm: Global gradient-norm clip.
        scheduler: ``"linear"`` (decay to 0) or ``"constant"``.
        seed: Shuffling seed.
        log_every: Steps between DEBUG progress lines.
    '''

    epochs: int = 3
    batch_size: int = 64
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    sequence_length: int = 512
    max_grad_norm: float = 1.0
    scheduler: str = 'linear'
    seed: int = 0
    log_every: int = 10

    def validate(self) -> 'TrainConfig':
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError('epochs and batch_size must be >= 1')
        if self.learning_rate <= 0:
            raise ConfigError(f'learning_rate must be > 0, got {self.learning_rate}')
        if self.max_grad_norm <= 0:
            raise ConfigError(f'max_grad_norm must be > 0, got {self.max_grad_norm}')
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0) or self.eps <= 0:
            raise ConfigError('Adam needs beta1, beta2 in [0, 1) and eps > 0')
        if self.sequence_length < 2:
            raise ConfigError(
                f'sequence_length must be >= 2, got {self.sequence_length}'
            )
        if self.scheduler not in SCHEDULERS:
            raise ConfigError(
                f'Unknown scheduler {self.scheduler!r}. Available: {list(SCHEDULERS)}'
            )
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'TrainConfig':
        return _from_dict(cls, data)


@dataclass
class DistillConfig:
    '''
    Attributes:
        alpha: Weight of the KL term in ``(1 - alpha) * CE + alpha * KD``.
        temperature: Softmax temperature applied to both logit sets.
        teacher_checkpoint: Trained teacher; when ``None`` the pipeline
            trains one first.
        student_seed: Seed for the student's initialization and data
            order; ``None`` means the training seed plus one.
    '''

    alpha: float = 0.5
    temperature: float = 1.0
    teacher_checkpoint: Optional[str] = None
    student_seed: Optional[int] = None

    def validate(self) -> 'DistillConfig':
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f'alpha must be in [0, 1], got {self.alpha}')
        if self.temperature <= 0:
            raise ConfigError(f'temperature must be > 0, got {self.temperature}')
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'DistillConfig':
        return _from_dict(cls, data)
