from .mlp import (
    AdamState,
    Gradient,
    NetParams,
    Tape,
    backward,
    forward,
    init,
    input_gradient,
    input_gradient_backward,
    mlp_sizes,
)
from .optim import adam_step, polyak_update

__all__ = [
    'AdamState',
    'Gradient',
    'NetParams',
    'Tape',
    'adam_step',
    'backward',
    'forward',
    'init',
    'input_gradient',
    'input_gradient_backward',
    'mlp_sizes',
    'polyak_update',
]
