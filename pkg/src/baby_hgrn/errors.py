'''
Categorized exceptions for baby-hgrn.

Every error raised on purpose by the package derives from
:class:`BabyHGRNError` and carries a ``category`` and an ``exit_code``
that the command-line front end maps onto the process exit status.
Each subclass also derives from the closest builtin exception so that
callers can catch either.
'''


class BabyHGRNError(Exception):
    '''Base class for all baby-hgrn errors.'''

    category = 'error'
    exit_code = 1


class UsageError(BabyHGRNError, ValueError):
    '''An operation was called in a way its contract forbids.'''

    category = 'usage'
    exit_code = 2


class DimensionError(BabyHGRNError, ValueError):
    '''Tensor shapes are incompatible for the requested operation.'''

    category = 'dimension'
    exit_code = 3


class NumericError(BabyHGRNError, ArithmeticError):
    '''A computation produced NaN or infinite values.'''

    category = 'numeric'
    exit_code = 4


class ConfigError(BabyHGRNError, ValueError):
    '''A configuration value is missing, unknown, or out of range.'''

    category = 'config'
    exit_code = 5


class PlanError(BabyHGRNError, ValueError):
    '''A sampling or packing plan cannot be satisfied.'''

    category = 'plan'
    exit_code = 6


class IngestionError(BabyHGRNError, OSError):
    '''A source file could not be read or parsed.'''

    category = 'ingestion'
    exit_code = 7


class DataError(BabyHGRNError, ValueError):
    '''Input data violates an invariant (ids out of range, empty text, ...).'''

    category = 'data'
    exit_code = 8


class TrainingError(BabyHGRNError, RuntimeError):
    '''Training aborted (for example on a non-finite loss).'''

    category = 'training'
    exit_code = 9


class CheckpointError(BabyHGRNError, ValueError):
    '''A checkpoint or dataset container is malformed.'''

    category = 'checkpoint'
    exit_code = 10
