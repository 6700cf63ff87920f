'''
Sequence-mixing layers and causal language models.
'''

from baby_hgrn.models.checkpoint import (
    load_checkpoint,
    parse_checkpoint,
    read_checkpoint,
    save_checkpoint,
)
from baby_hgrn.models.config import (
    PRESETS,
    ModelConfig,
    ModelPreset,
    get_preset,
    list_presets,
)
from baby_hgrn.models.hgrn2 import (
    HGRN2Layer,
    HGRN2Mixer,
    RecurrentState,
    hgrn2_forward_scan,
    hgrn2_forward_sequential,
    lower_bounds,
    recurrence_chunkwise,
    recurrence_sequential,
)
from baby_hgrn.models.layers import (
    Dropout,
    Embedding,
    GatedMLP,
    Linear,
    Module,
    ModuleList,
    Parameter,
    RMSNorm,
)
from baby_hgrn.models.lm import HGRN2LM, LSTMLM, CausalLM, build_model, lm_forward
from baby_hgrn.models.lstm import LSTMLayer, lstm_forward

__all__ = [
    'CausalLM',
    'Dropout',
    'Embedding',
    'GatedMLP',
    'HGRN2LM',
    'HGRN2Layer',
    'HGRN2Mixer',
    'LSTMLM',
    'LSTMLayer',
    'Linear',
    'ModelConfig',
    'ModelPreset',
    'Module',
    'ModuleList',
    'PRESETS',
    'Parameter',
    'RMSNorm',
    'RecurrentState',
    'build_model',
    'get_preset',
    'hgrn2_forward_scan',
    'hgrn2_forward_sequential',
    'list_presets',
    'lm_forward',
    'load_checkpoint',
    'lower_bounds',
    'lstm_forward',
    'parse_checkpoint',
    'read_checkpoint',
    'recurrence_chunkwise',
    'recurrence_sequential',
    'save_checkpoint',
]
