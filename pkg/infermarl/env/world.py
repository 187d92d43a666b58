import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from ..exceptions import ContractViolation
from .observation import JointObservation, observe
from .perturbation import DynamicsPerturbation, perturb
from .rewards import compute_rewards
from .scenarios import ScenarioSpec, build_scenario

# contact forces beyond this many margins of separation are exactly zero
_CONTACT_CUTOFF_MARGINS = 50.0


@dataclass
class WorldState:
    spec: ScenarioSpec
    positions: np.ndarray
    velocities: np.ndarray
    landmarks: np.ndarray
    goal_index: Optional[int] = None
    t: int = 0

    @property
    def done(self) -> bool:
        return self.t >= self.spec.episode_length

    def copy(self) -> "WorldState":
        return WorldState(
            self.spec,
            self.positions.copy(),
            self.velocities.copy(),
            self.landmarks.copy(),
            self.goal_index,
            self.t,
        )

    def to_record(self, rewards: Optional[np.ndarray] = None, mask: Optional[np.ndarray] = None) -> Dict:
        record = {
            "t": self.t,
            "positions": self.positions.tolist(),
            "velocities": self.velocities.tolist(),
            "landmarks": self.landmarks.tolist(),
        }
        if self.goal_index is not None:
            record["goal_index"] = self.goal_index
        if rewards is not None:
            record["rewards"] = np.asarray(rewards).tolist()
        if mask is not None:
            record["mask"] = np.asarray(mask).astype(int).tolist()
        return record


def reset(spec: ScenarioSpec, rng: np.random.Generator) -> Tuple[WorldState, JointObservation]:
    """Place agents and landmarks uniformly in the arena with zero velocity"""
    w = spec.world_half_width
    positions = rng.uniform(-w, w, size=(spec.n_agents, 2))
    landmarks = rng.uniform(-w, w, size=(spec.n_landmarks, 2))
    goal_index = int(rng.integers(spec.n_landmarks)) if spec.name == "physical_deception" else None
    state = WorldState(spec, positions, np.zeros((spec.n_agents, 2)), landmarks, goal_index)
    return state, observe(state)


def contact_forces(state: WorldState) -> np.ndarray:
    """Soft penetration forces on every agent from colliding agents and landmarks"""
    spec = state.spec
    pos = np.vstack([state.positions, state.landmarks])
    sizes = np.array([a.size for a in spec.agents] + [l.size for l in spec.landmarks])
    collide = np.array([a.collide for a in spec.agents] + [l.collide for l in spec.landmarks])
    delta = pos[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(delta, axis=-1)
    gap = dist - (sizes[:, None] + sizes[None, :])
    k = spec.contact_margin
    penetration = np.logaddexp(0.0, -gap / k) * k
    active = collide[:, None] & collide[None, :] & (gap <= _CONTACT_CUTOFF_MARGINS * k)
    np.fill_diagonal(active, False)
    active &= dist > 0.0
    scale = np.where(active, spec.contact_force * penetration / np.where(dist > 0.0, dist, 1.0), 0.0)
    forces = (delta * scale[..., None]).sum(axis=1)
    return forces[: spec.n_agents]


def step(state: WorldState, joint_action: np.ndarray) -> Tuple[WorldState, JointObservation, np.ndarray]:
    """
    Advance the double integrator by one step.

    ``v <- (1 - damping) * v + (accel * a + contact) * dt``, speed clipped to ``max_speed``,
    then ``p <- p + v * dt``. The input state is not modified.
    """
    spec = state.spec
    if state.done:
        raise ContractViolation(f"episode already has {spec.episode_length} steps")
    actions = np.clip(np.asarray(joint_action, dtype=float).reshape(spec.n_agents, 2), -1.0, 1.0)
    accel = np.array([a.accel for a in spec.agents])[:, None]
    force = accel * actions + contact_forces(state)

    nxt = state.copy()
    nxt.velocities = nxt.velocities * (1.0 - spec.damping) + force * spec.dt
    for i, agent in enumerate(spec.agents):
        if agent.max_speed is not None:
            speed = np.linalg.norm(nxt.velocities[i])
            if speed > agent.max_speed:
                nxt.velocities[i] *= agent.max_speed / speed
    nxt.positions = nxt.positions + nxt.velocities * spec.dt
    nxt.t += 1
    return nxt, observe(nxt), compute_rewards(nxt)


class StateRecorder:
    """Appends one JSON line per step (positions, velocities, rewards, mask)"""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._handle = self.path.open("a", encoding="utf-8")

    def record(self, state: WorldState, rewards=None, mask=None, **extra) -> None:
        row = state.to_record(rewards, mask)
        row.update(extra)
        self._handle.write(json.dumps(row, sort_keys=True) + "\n")

    def close(self) -> None:
        self._handle.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class ParticleEnv:
    """
    Stateful wrapper around the functional world ops.

    Actions are perturbed before physics and observations after ``observe`` whenever
    ``perturbation.enabled`` is set; the harness switches it on for the decentralized phase.
    """

    def __init__(
        self,
        scenario: Union[str, ScenarioSpec],
        rng: np.random.Generator,
        perturbation: Optional[DynamicsPerturbation] = None,
    ):
        self.spec = build_scenario(scenario) if isinstance(scenario, str) else scenario
        self.rng = rng
        self.perturbation = perturbation or DynamicsPerturbation()
        self.state: Optional[WorldState] = None

    @property
    def positions(self) -> np.ndarray:
        return self.state.positions

    @property
    def done(self) -> bool:
        return self.state is not None and self.state.done

    def reset(self) -> JointObservation:
        self.state, obs = reset(self.spec, self.rng)
        return perturb(obs, self.perturbation, self.rng)

    def step(self, joint_action: np.ndarray) -> Tuple[JointObservation, np.ndarray]:
        if self.state is None:
            raise ContractViolation("reset() must be called before step()")
        actions = perturb(np.asarray(joint_action, dtype=float), self.perturbation, self.rng)
        self.state, obs, rewards = step(self.state, actions)
        return perturb(obs, self.perturbation, self.rng), rewards
