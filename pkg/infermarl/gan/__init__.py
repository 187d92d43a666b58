from .buffer import ObsReplayBuffer
from .ccwgan import (
    CCWGAN,
    GanConfig,
    GanMetrics,
    GanNets,
    d_loss,
    d_loss_and_grad,
    g_loss,
    g_loss_and_grad,
    generate,
    gradient_penalty,
    gradient_penalty_and_grad,
    infer,
    train_step,
)
from .masking import MaskedSample, combine, mask_random, mask_random_batch, masked_mse, reconstruction_mse

__all__ = [
    'CCWGAN',
    'GanConfig',
    'GanMetrics',
    'GanNets',
    'MaskedSample',
    'ObsReplayBuffer',
    'combine',
    'd_loss',
    'd_loss_and_grad',
    'g_loss',
    'g_loss_and_grad',
    'generate',
    'gradient_penalty',
    'gradient_penalty_and_grad',
    'infer',
    'mask_random',
    'mask_random_batch',
    'masked_mse',
    'reconstruction_mse',
    'train_step',
]
