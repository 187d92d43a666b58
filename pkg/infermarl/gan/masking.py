from dataclasses import dataclass
from typing import Callable, Iterable, Tuple, Union

import numpy as np

from ..env.observation import JointObservation, agent_mask, fill_masked
from ..env.scenarios import ScenarioSpec
from ..exceptions import ContractViolation

MaskingRule = Callable[[ScenarioSpec, Iterable[int]], np.ndarray]


@dataclass
class MaskedSample:
    """A full joint observation, its noise-filled partial version and the binary mask"""

    o: np.ndarray
    o_tilde: np.ndarray
    m: np.ndarray
    masked_agents: Tuple[int, ...]


def mask_random(
    o: Union[JointObservation, np.ndarray],
    spec: ScenarioSpec,
    rng: np.random.Generator,
    masking_rule: MaskingRule = agent_mask,
) -> MaskedSample:
    """
    Hide a random set of 1 <= x <= n-1 agents.

    ``x`` is uniform over [1, n-1], the agents are drawn without replacement, and hidden
    entries are replaced by N(0, 1) noise.
    """
    n = spec.n_agents
    if n < 2:
        raise ContractViolation("random masking needs at least two agents")
    flat = o.flat() if isinstance(o, JointObservation) else np.asarray(o, dtype=float).reshape(-1)
    if flat.shape != (spec.joint_dim,):
        raise ContractViolation(f"observation length {flat.shape[0]}, expected {spec.joint_dim}")
    x = int(rng.integers(1, n))
    agents = tuple(sorted(int(j) for j in rng.choice(n, size=x, replace=False)))
    m = masking_rule(spec, agents)
    return MaskedSample(flat.copy(), fill_masked(flat, m, rng), m, agents)


def mask_random_batch(
    batch: np.ndarray,
    spec: ScenarioSpec,
    rng: np.random.Generator,
    masking_rule: MaskingRule = agent_mask,
) -> Tuple[np.ndarray, np.ndarray]:
    """Random masks for every row of ``batch``; returns (o_tilde, m) arrays"""
    samples = [mask_random(row, spec, rng, masking_rule) for row in batch]
    return np.stack([s.o_tilde for s in samples]), np.stack([s.m for s in samples])


def combine(o: np.ndarray, m: np.ndarray, o_g: np.ndarray) -> np.ndarray:
    """m * o + (1 - m) * o_G"""
    o, m, o_g = np.asarray(o, dtype=float), np.asarray(m, dtype=float), np.asarray(o_g, dtype=float)
    if not (o.shape == m.shape == o_g.shape):
        raise ContractViolation(f"combine shapes differ: {o.shape}, {m.shape}, {o_g.shape}")
    return np.where(m > 0.0, o, o_g)


def reconstruction_mse(o: Union[JointObservation, np.ndarray], o_hat: np.ndarray) -> float:
    """Mean squared error over the full flattened vectors"""
    a = o.flat() if isinstance(o, JointObservation) else np.asarray(o, dtype=float)
    b = np.asarray(o_hat, dtype=float)
    if a.shape != b.shape:
        raise ContractViolation(f"shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def masked_mse(o: np.ndarray, o_hat: np.ndarray, m: np.ndarray) -> float:
    """Mean squared error over the hidden entries only (0.0 when nothing is hidden)"""
    hidden = np.asarray(m) == 0.0
    if not hidden.any():
        return 0.0
    diff = np.asarray(o, dtype=float) - np.asarray(o_hat, dtype=float)
    return float(np.mean(diff[hidden] ** 2))
