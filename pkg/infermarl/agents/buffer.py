from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..exceptions import ContractViolation


@dataclass
class Transition:
    """
    One environment step as seen by the learners.

    Each connected group of agents may hold its own (possibly inferred) joint observation, so
    the record keeps the distinct views plus ``view_index[i]``, the view agent ``i`` used.
    ``masks[k]`` marks which entries of view ``k`` were real (1) or inferred (0).
    """

    obs_views: np.ndarray
    view_index: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs_views: np.ndarray
    next_view_index: np.ndarray
    masks: Optional[np.ndarray] = None
    next_masks: Optional[np.ndarray] = None

    def __post_init__(self):
        self.obs_views = np.atleast_2d(np.asarray(self.obs_views, dtype=float))
        self.next_obs_views = np.atleast_2d(np.asarray(self.next_obs_views, dtype=float))
        self.actions = np.asarray(self.actions, dtype=float).reshape(-1, 2)
        self.rewards = np.asarray(self.rewards, dtype=float).reshape(-1)
        self.view_index = np.asarray(self.view_index, dtype=int)
        self.next_view_index = np.asarray(self.next_view_index, dtype=int)
        if self.masks is None:
            self.masks = np.ones_like(self.obs_views)
        if self.next_masks is None:
            self.next_masks = np.ones_like(self.next_obs_views)
        n = self.actions.shape[0]
        if self.rewards.shape != (n,) or self.view_index.shape != (n,) or self.next_view_index.shape != (n,):
            raise ContractViolation("actions, rewards and view indices must cover the same agents")
        if np.any(np.abs(self.actions) > 1.0):
            raise ContractViolation("stored actions must lie in [-1, 1]")
        for arr in (self.obs_views, self.next_obs_views, self.rewards):
            if not np.all(np.isfinite(arr)):
                raise ContractViolation("transition contains non-finite values")

    @classmethod
    def shared(cls, joint_obs, actions, rewards, next_joint_obs, mask=None, next_mask=None) -> "Transition":
        """Every agent sees the same joint observation"""
        n = np.asarray(actions).reshape(-1, 2).shape[0]
        index = np.zeros(n, dtype=int)
        return cls(
            np.asarray(joint_obs, dtype=float).reshape(1, -1),
            index,
            actions,
            rewards,
            np.asarray(next_joint_obs, dtype=float).reshape(1, -1),
            index.copy(),
            None if mask is None else np.asarray(mask, dtype=float).reshape(1, -1),
            None if next_mask is None else np.asarray(next_mask, dtype=float).reshape(1, -1),
        )

    @property
    def n_agents(self) -> int:
        return self.actions.shape[0]

    def view(self, agent: int) -> np.ndarray:
        return self.obs_views[self.view_index[agent]]

    def next_view(self, agent: int) -> np.ndarray:
        return self.next_obs_views[self.next_view_index[agent]]


@dataclass
class TransitionBatch:
    """Sampled transitions; ``obs[:, i]`` is the joint observation agent i used"""

    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray

    def __len__(self) -> int:
        return self.obs.shape[0]

    @classmethod
    def from_transitions(cls, transitions: List[Transition]) -> "TransitionBatch":
        if not transitions:
            raise ContractViolation("empty batch")
        return cls(
            obs=np.stack([t.obs_views[t.view_index] for t in transitions]),
            actions=np.stack([t.actions for t in transitions]),
            rewards=np.stack([t.rewards for t in transitions]),
            next_obs=np.stack([t.next_obs_views[t.next_view_index] for t in transitions]),
        )


class RlReplayBuffer:
    """
    Ring buffer of transitions with uniform sampling.

    Args:
        capacity: Maximum number of stored transitions
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ContractViolation(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.cursor = 0
        self._storage: List[Transition] = []

    def __len__(self) -> int:
        return len(self._storage)

    def __iter__(self):
        return iter(self._storage)

    def push(self, transition: Transition) -> None:
        if len(self._storage) < self.capacity:
            self._storage.append(transition)
        else:
            self._storage[self.cursor] = transition
        self.cursor = (self.cursor + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> TransitionBatch:
        if not self._storage:
            raise ContractViolation("cannot sample from an empty buffer")
        idx = rng.integers(0, len(self._storage), size=batch_size)
        return TransitionBatch.from_transitions([self._storage[k] for k in idx])
