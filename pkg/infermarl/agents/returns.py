from typing import Sequence

import numpy as np


def compute_return(rewards: Sequence[float], gamma: float) -> float:
    """sum_t gamma^t r_t (0.0 for an empty sequence)"""
    rewards = np.asarray(rewards, dtype=float)
    if rewards.size == 0:
        return 0.0
    return float(np.sum(gamma ** np.arange(rewards.size) * rewards))
