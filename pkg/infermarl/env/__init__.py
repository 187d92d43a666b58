from .observation import (
    JointObservation,
    VisibilityGraph,
    agent_mask,
    distance_mask,
    fill_masked,
    mask_by_distance,
    observe,
)
from .perturbation import DynamicsPerturbation, perturb
from .rewards import (
    compute_rewards,
    navigation_distance_term,
    reward_cooperative_navigation,
    reward_physical_deception,
    reward_predator_prey,
)
from .scenarios import SCENARIOS, AgentSpec, LandmarkSpec, ObsField, ScenarioSpec, build_scenario
from .world import ParticleEnv, StateRecorder, WorldState, reset, step

__all__ = [
    'SCENARIOS',
    'AgentSpec',
    'DynamicsPerturbation',
    'JointObservation',
    'LandmarkSpec',
    'ObsField',
    'ParticleEnv',
    'ScenarioSpec',
    'StateRecorder',
    'VisibilityGraph',
    'WorldState',
    'agent_mask',
    'build_scenario',
    'compute_rewards',
    'distance_mask',
    'fill_masked',
    'mask_by_distance',
    'navigation_distance_term',
    'observe',
    'perturb',
    'reset',
    'reward_cooperative_navigation',
    'reward_physical_deception',
    'reward_predator_prey',
    'step',
]
