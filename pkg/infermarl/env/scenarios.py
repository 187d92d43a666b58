from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..exceptions import ContractViolation

SCENARIOS = ("physical_deception", "predator_prey", "cooperative_navigation")

# Observation field kinds. Only agent_pos / agent_vel reference another agent.
SELF_VEL = "self_vel"
SELF_POS = "self_pos"
GOAL = "goal"
LANDMARK = "landmark"
AGENT_POS = "agent_pos"
AGENT_VEL = "agent_vel"


@dataclass(frozen=True)
class AgentSpec:
    size: float = 0.05
    accel: float = 1.0
    max_speed: Optional[float] = None
    is_adversary: bool = False
    collide: bool = True


@dataclass(frozen=True)
class LandmarkSpec:
    size: float = 0.05
    collide: bool = False


@dataclass(frozen=True)
class ObsField:
    """One labeled slice of a per-agent observation vector"""

    name: str
    dim: int
    kind: str
    ref: Optional[int] = None


@dataclass(frozen=True)
class ScenarioSpec:
    """
    Static description of one particle-world task.

    ``obs_layouts[i]`` is the ordered field list of agent ``i``; every agent's vector has the
    same length so the joint observation is an (n_agents, obs_dim) array.
    """

    name: str
    agents: Tuple[AgentSpec, ...]
    landmarks: Tuple[LandmarkSpec, ...]
    obs_layouts: Tuple[Tuple[ObsField, ...], ...]
    world_half_width: float = 1.0
    dt: float = 0.1
    damping: float = 0.25
    contact_force: float = 1e2
    contact_margin: float = 1e-3
    episode_length: int = 200
    collision_reward: float = 10.0
    collision_penalty: float = 1.0

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ContractViolation(f"unknown scenario {self.name!r}; valid names: {', '.join(SCENARIOS)}")
        if len(self.obs_layouts) != self.n_agents:
            raise ContractViolation("one observation layout per agent is required")
        lengths = {sum(f.dim for f in layout) for layout in self.obs_layouts}
        if len(lengths) != 1:
            raise ContractViolation(f"per-agent observation lengths differ: {sorted(lengths)}")
        for i, layout in enumerate(self.obs_layouts):
            for f in layout:
                if f.ref is not None and not (0 <= f.ref < self.n_agents and f.ref != i):
                    raise ContractViolation(f"agent {i} field {f.name} references invalid agent {f.ref}")
        if self.world_half_width != 1.0:
            raise ContractViolation("the arena is the [-1, 1] square")

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def n_landmarks(self) -> int:
        return len(self.landmarks)

    @property
    def adversary_indices(self) -> Tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.agents) if a.is_adversary)

    @property
    def good_indices(self) -> Tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.agents) if not a.is_adversary)

    @property
    def obs_dim(self) -> int:
        return sum(f.dim for f in self.obs_layouts[0])

    @property
    def joint_dim(self) -> int:
        return self.n_agents * self.obs_dim

    def obs_layout(self, agent: int) -> List[Tuple[str, int]]:
        return [(f.name, f.dim) for f in self.obs_layouts[agent]]

    @cached_property
    def field_slices(self) -> Tuple[Dict[str, slice], ...]:
        """Per agent, field name -> slice within that agent's own vector"""
        out = []
        for layout in self.obs_layouts:
            offset, slices = 0, {}
            for f in layout:
                slices[f.name] = slice(offset, offset + f.dim)
                offset += f.dim
            out.append(slices)
        return tuple(out)

    def agent_slice(self, agent: int) -> slice:
        return slice(agent * self.obs_dim, (agent + 1) * self.obs_dim)

    @cached_property
    def pair_indices(self) -> Dict[Tuple[int, int], np.ndarray]:
        """(i, j) -> joint indices of agent i's entries that describe agent j"""
        out = {}
        for i, layout in enumerate(self.obs_layouts):
            base = i * self.obs_dim
            for j in range(self.n_agents):
                if i == j:
                    continue
                idx = [
                    np.arange(base + s.start, base + s.stop)
                    for f, s in zip(layout, self.field_slices[i].values())
                    if f.ref == j
                ]
                out[(i, j)] = np.concatenate(idx) if idx else np.zeros(0, dtype=int)
        return out


def _layout(name: str, agent: int, n_agents: int, n_landmarks: int) -> Tuple[ObsField, ...]:
    fields = [ObsField("self_vel", 2, SELF_VEL), ObsField("self_pos", 2, SELF_POS)]
    if name == "physical_deception":
        fields.append(ObsField("goal", 2, GOAL))
    fields.extend(ObsField(f"landmark_{k}", 2, LANDMARK) for k in range(n_landmarks))
    others = [j for j in range(n_agents) if j != agent]
    fields.extend(ObsField(f"agent_{j}_pos", 2, AGENT_POS, j) for j in others)
    if name == "predator_prey":
        fields.extend(ObsField(f"agent_{j}_vel", 2, AGENT_VEL, j) for j in others)
    return tuple(fields)


def build_scenario(name: str) -> ScenarioSpec:
    """
    Build one of the three particle-world tasks by name.

    Entity counts and physical constants follow the multi-agent particle environment:

    - physical_deception: 1 adversary + 2 cooperators, 2 landmarks (one secret goal)
    - predator_prey: 3 predators (adversaries) + 1 faster prey, 2 obstacle landmarks
    - cooperative_navigation: 3 agents, 3 landmarks, shared reward
    """
    if name == "physical_deception":
        agents = (AgentSpec(size=0.15, is_adversary=True, collide=False),) + (AgentSpec(size=0.15, collide=False),) * 2
        landmarks = (LandmarkSpec(size=0.08),) * 2
    elif name == "predator_prey":
        predator = AgentSpec(size=0.075, accel=3.0, max_speed=1.0, is_adversary=True)
        prey = AgentSpec(size=0.05, accel=4.0, max_speed=1.3)
        agents = (predator,) * 3 + (prey,)
        landmarks = (LandmarkSpec(size=0.2, collide=True),) * 2
    elif name == "cooperative_navigation":
        agents = (AgentSpec(size=0.15),) * 3
        landmarks = (LandmarkSpec(size=0.05),) * 3
    else:
        raise ContractViolation(f"unknown scenario {name!r}; valid names: {', '.join(SCENARIOS)}")
    layouts = tuple(_layout(name, i, len(agents), len(landmarks)) for i in range(len(agents)))
    return ScenarioSpec(name=name, agents=agents, landmarks=landmarks, obs_layouts=layouts)
