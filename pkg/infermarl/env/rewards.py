import numpy as np

from ..exceptions import ContractViolation


def _require(state, name: str) -> None:
    if state.spec.name != name:
        raise ContractViolation(f"{name} reward called on a {state.spec.name} world")


def _pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)


def is_collision(state, i: int, j: int) -> bool:
    agents = state.spec.agents
    dist = np.linalg.norm(state.positions[i] - state.positions[j])
    return bool(dist < agents[i].size + agents[j].size)


def reward_physical_deception(state) -> np.ndarray:
    """
    Cooperators share ``sum_adv |adv - goal| - min_coop |coop - goal|``; the adversary gets
    ``-|adv - goal|``.
    """
    _require(state, "physical_deception")
    spec = state.spec
    goal = state.landmarks[state.goal_index]
    dist = np.linalg.norm(state.positions - goal, axis=1)
    adv = list(spec.adversary_indices)
    good = list(spec.good_indices)
    team = dist[adv].sum() - dist[good].min()
    rewards = np.empty(spec.n_agents)
    rewards[good] = team
    rewards[adv] = -dist[adv]
    return rewards


def boundary_penalty(x: float) -> float:
    """Ramp from 0.9 to the wall, then exponential outside, capped at 10"""
    x = abs(x)
    if x < 0.9:
        return 0.0
    if x < 1.0:
        return (x - 0.9) * 10.0
    return float(min(np.exp(2.0 * x - 2.0), 10.0))


def reward_predator_prey(state) -> np.ndarray:
    """
    Each predator earns ``collision_reward`` per contact with the prey; the prey pays the same
    per contact and is penalized for leaving the arena.
    """
    _require(state, "predator_prey")
    spec = state.spec
    rewards = np.zeros(spec.n_agents)
    for prey in spec.good_indices:
        for predator in spec.adversary_indices:
            if is_collision(state, predator, prey):
                rewards[predator] += spec.collision_reward
                rewards[prey] -= spec.collision_reward
        rewards[prey] -= sum(boundary_penalty(x) for x in state.positions[prey])
    return rewards


def navigation_distance_term(state) -> float:
    """-sum over landmarks of the distance to the closest agent"""
    return float(-_pairwise_distances(state.landmarks, state.positions).min(axis=1).sum())


def reward_cooperative_navigation(state) -> np.ndarray:
    """Shared reward: landmark coverage term minus ``collision_penalty`` per colliding pair"""
    _require(state, "cooperative_navigation")
    spec = state.spec
    collisions = sum(
        is_collision(state, i, j) for i in range(spec.n_agents) for j in range(i + 1, spec.n_agents)
    )
    shared = navigation_distance_term(state) - spec.collision_penalty * collisions
    return np.full(spec.n_agents, shared)


REWARD_FUNCTIONS = {
    "physical_deception": reward_physical_deception,
    "predator_prey": reward_predator_prey,
    "cooperative_navigation": reward_cooperative_navigation,
}


def compute_rewards(state) -> np.ndarray:
    return REWARD_FUNCTIONS[state.spec.name](state)
