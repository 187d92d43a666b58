"""Scripted reference controllers used as learning baselines"""
from typing import Callable

import numpy as np

from ..env.observation import JointObservation
from ..env.scenarios import LANDMARK, ScenarioSpec
from ..env.world import reset, step

Policy = Callable[[JointObservation, np.random.Generator], np.ndarray]


def random_policy(obs: JointObservation, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=(obs.spec.n_agents, 2))


def nearest_landmark_policy(obs: JointObservation, rng: np.random.Generator, gain: float = 2.0) -> np.ndarray:
    """Each agent accelerates toward its closest landmark, braking with its own velocity"""
    spec = obs.spec
    actions = np.zeros((spec.n_agents, 2))
    for i in range(spec.n_agents):
        rel = np.stack([obs.field(i, f.name) for f in spec.obs_layouts[i] if f.kind == LANDMARK])
        target = rel[np.argmin(np.linalg.norm(rel, axis=1))]
        actions[i] = gain * target - obs.field(i, "self_vel")
    return np.clip(actions, -1.0, 1.0)


def evaluate_policy(spec: ScenarioSpec, policy: Policy, episodes: int, rng: np.random.Generator) -> float:
    """Mean over episodes of the per-step reward summed over the episode and averaged over agents"""
    totals = []
    for _ in range(episodes):
        state, obs = reset(spec, rng)
        total = 0.0
        while not state.done:
            state, obs, rewards = step(state, policy(obs, rng))
            total += float(np.mean(rewards))
        totals.append(total)
    return float(np.mean(totals))
