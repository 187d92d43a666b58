from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..exceptions import ContractViolation
from .scenarios import AGENT_POS, AGENT_VEL, GOAL, LANDMARK, SELF_POS, SELF_VEL, ScenarioSpec


@dataclass
class JointObservation:
    """
    Per-agent observation vectors of one time step, stacked as an (n_agents, obs_dim) array.
    """

    per_agent: np.ndarray
    spec: ScenarioSpec

    def __post_init__(self):
        self.per_agent = np.asarray(self.per_agent, dtype=float)
        expected = (self.spec.n_agents, self.spec.obs_dim)
        if self.per_agent.shape != expected:
            raise ContractViolation(f"joint observation shape {self.per_agent.shape}, expected {expected}")

    @classmethod
    def from_flat(cls, flat: np.ndarray, spec: ScenarioSpec) -> "JointObservation":
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (spec.joint_dim,):
            raise ContractViolation(f"flat observation length {flat.shape}, expected ({spec.joint_dim},)")
        return cls(flat.reshape(spec.n_agents, spec.obs_dim).copy(), spec)

    @property
    def layout(self):
        return self.spec.obs_layouts

    def flat(self) -> np.ndarray:
        return self.per_agent.reshape(-1).copy()

    def agent(self, i: int) -> np.ndarray:
        return self.per_agent[i]

    def field(self, i: int, name: str) -> np.ndarray:
        return self.per_agent[i, self.spec.field_slices[i][name]]

    def copy(self) -> "JointObservation":
        return JointObservation(self.per_agent.copy(), self.spec)


@dataclass
class VisibilityGraph:
    """Symmetric in-range relation between agents (diagonal always true)"""

    adjacency: np.ndarray

    @property
    def n_agents(self) -> int:
        return self.adjacency.shape[0]

    @property
    def labels(self) -> np.ndarray:
        _, labels = connected_components(csr_matrix(self.adjacency.astype(int)), directed=False)
        return labels

    def components(self) -> List[Tuple[int, ...]]:
        """Connected components (agents reachable through in-range relays), ordered by first member"""
        labels = self.labels
        groups = {}
        for agent, label in enumerate(labels):
            groups.setdefault(label, []).append(agent)
        return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])

    def component_of(self, agent: int) -> Tuple[int, ...]:
        for comp in self.components():
            if agent in comp:
                return comp
        raise ContractViolation(f"agent {agent} not in graph")

    def visible(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i, j])

    @property
    def fully_connected(self) -> bool:
        return bool(self.adjacency.all())


def observe(state, spec: Optional[ScenarioSpec] = None) -> JointObservation:
    """
    Build every agent's observation from the world state.

    Per agent: own velocity, own position, (deception) goal relative position for cooperators,
    landmark positions relative to the agent, other agents' relative positions and
    (predator-prey) other agents' velocities, in ``obs_layouts`` order.
    """
    spec = spec or state.spec
    obs = np.zeros((spec.n_agents, spec.obs_dim))
    for i, layout in enumerate(spec.obs_layouts):
        p_i = state.positions[i]
        for f, s in zip(layout, spec.field_slices[i].values()):
            if f.kind == SELF_VEL:
                obs[i, s] = state.velocities[i]
            elif f.kind == SELF_POS:
                obs[i, s] = p_i
            elif f.kind == GOAL:
                if not spec.agents[i].is_adversary:
                    obs[i, s] = state.landmarks[state.goal_index] - p_i
            elif f.kind == LANDMARK:
                obs[i, s] = state.landmarks[int(f.name.rsplit("_", 1)[1])] - p_i
            elif f.kind == AGENT_POS:
                obs[i, s] = state.positions[f.ref] - p_i
            elif f.kind == AGENT_VEL:
                obs[i, s] = state.velocities[f.ref]
    return JointObservation(obs, spec)


def agent_mask(spec: ScenarioSpec, missing: Iterable[int]) -> np.ndarray:
    """
    Joint binary mask for a set of missing agents.

    A missing agent ``j`` loses its whole own vector and every field of the present agents'
    vectors that describes ``j``.
    """
    missing = sorted(set(int(j) for j in missing))
    m = np.ones(spec.joint_dim)
    present = [k for k in range(spec.n_agents) if k not in missing]
    for j in missing:
        if not 0 <= j < spec.n_agents:
            raise ContractViolation(f"agent index {j} out of range")
        m[spec.agent_slice(j)] = 0.0
        for k in present:
            m[spec.pair_indices[(k, j)]] = 0.0
    return m


def distance_mask(spec: ScenarioSpec, positions: np.ndarray, d_p: float) -> Tuple[np.ndarray, VisibilityGraph]:
    """Joint mask hiding, for each ordered pair farther apart than d_p, i's entries about j"""
    if d_p < 0:
        raise ContractViolation(f"d_P must be non-negative, got {d_p}")
    positions = np.asarray(positions, dtype=float)
    dist = np.linalg.norm(positions[:, None, :] - positions[None, :, :], axis=-1)
    adjacency = dist <= d_p
    np.fill_diagonal(adjacency, True)
    m = np.ones(spec.joint_dim)
    for (i, j), idx in spec.pair_indices.items():
        if not adjacency[i, j]:
            m[idx] = 0.0
    return m, VisibilityGraph(adjacency)


def fill_masked(flat: np.ndarray, m: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """m * o + (1 - m) * z with z ~ N(0, 1)"""
    z = rng.standard_normal(flat.shape)
    return np.where(m > 0.0, flat, z)


def mask_by_distance(
    joint_obs: JointObservation,
    positions: np.ndarray,
    d_p: float,
    rng: np.random.Generator,
) -> Tuple[JointObservation, np.ndarray, VisibilityGraph]:
    """
    Hide out-of-range agents from each other.

    Returns the noise-filled partial observation, the joint binary mask and the visibility
    graph. Own-state, goal and landmark entries are always visible.
    """
    m, graph = distance_mask(joint_obs.spec, positions, d_p)
    partial = fill_masked(joint_obs.flat(), m, rng)
    return JointObservation.from_flat(partial, joint_obs.spec), m, graph
