import logging
from typing import List

import numpy as np

from ..exceptions import ContractViolation

logger = logging.getLogger(__name__)


class ObsReplayBuffer:
    """
    Ring buffer of flattened joint observations, sampled uniformly.

    Args:
        capacity: Maximum number of stored observations
        dim: Flattened joint observation length
    """

    def __init__(self, capacity: int, dim: int):
        if capacity < 1:
            raise ContractViolation(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.dim = dim
        self.cursor = 0
        self._storage: List[np.ndarray] = []

    def __len__(self) -> int:
        return len(self._storage)

    def push(self, joint_obs: np.ndarray) -> None:
        flat = np.array(joint_obs, dtype=float).reshape(-1)
        if flat.shape != (self.dim,):
            raise ContractViolation(f"observation length {flat.shape[0]}, buffer holds {self.dim}")
        if len(self._storage) < self.capacity:
            self._storage.append(flat)
        else:
            self._storage[self.cursor] = flat
        self.cursor = (self.cursor + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if not self._storage:
            raise ContractViolation("cannot sample from an empty buffer")
        idx = rng.integers(0, len(self._storage), size=batch_size)
        return np.stack([self._storage[k] for k in idx])

    def copy(self) -> "ObsReplayBuffer":
        """New buffer over the same stored rows; rows are never modified in place"""
        clone = ObsReplayBuffer(self.capacity, self.dim)
        clone.cursor = self.cursor
        clone._storage = list(self._storage)
        return clone
