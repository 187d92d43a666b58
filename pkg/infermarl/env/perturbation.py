from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ..exceptions import ContractViolation
from .observation import JointObservation


@dataclass
class DynamicsPerturbation:
    """
    Scaled normal noise plus a fixed translation on actions and observations.

    Args:
        action_noise_scale: Standard deviation of action noise
        obs_noise_scale: Standard deviation of observation noise
        action_translation: Offset added to every agent's 2-D action
        obs_translation: Per-element offset added to every agent's observation vector
        enabled: When false, perturb is the identity
    """

    action_noise_scale: float = 0.0
    obs_noise_scale: float = 0.0
    action_translation: np.ndarray = field(default_factory=lambda: np.zeros(2))
    obs_translation: Union[np.ndarray, float] = 0.0
    enabled: bool = False

    def __post_init__(self):
        if self.action_noise_scale < 0 or self.obs_noise_scale < 0:
            raise ContractViolation("perturbation noise scales must be non-negative")
        self.action_translation = np.asarray(self.action_translation, dtype=float)
        self.obs_translation = np.asarray(self.obs_translation, dtype=float)

    @classmethod
    def sample(
        cls,
        obs_dim: int,
        rng: np.random.Generator,
        action_sigma: float = 0.05,
        obs_sigma: float = 0.05,
        translation: float = 0.1,
    ) -> "DynamicsPerturbation":
        """Draw the per-trial translations uniformly from [-translation, translation]"""
        return cls(
            action_noise_scale=action_sigma,
            obs_noise_scale=obs_sigma,
            action_translation=rng.uniform(-translation, translation, size=2),
            obs_translation=rng.uniform(-translation, translation, size=obs_dim),
            enabled=True,
        )


def perturb(value, perturbation: DynamicsPerturbation, rng: np.random.Generator):
    """
    value + translation + scale * z, z ~ N(0, 1) elementwise.

    ``value`` is either a JointObservation or an action array whose last axis has length 2.
    """
    if isinstance(value, JointObservation):
        if not perturbation.enabled:
            return value.copy()
        noise = perturbation.obs_noise_scale * rng.standard_normal(value.per_agent.shape)
        return JointObservation(value.per_agent + perturbation.obs_translation + noise, value.spec)

    actions = np.asarray(value, dtype=float)
    if not perturbation.enabled:
        return actions.copy()
    if actions.shape[-1] != 2:
        raise ContractViolation(f"actions must be 2-D per agent, got shape {actions.shape}")
    noise = perturbation.action_noise_scale * rng.standard_normal(actions.shape)
    return actions + perturbation.action_translation + noise
