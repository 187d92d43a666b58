from .buffer import RlReplayBuffer, Transition, TransitionBatch
from .ddpg import DdpgAgent, ddpg_update
from .heuristics import evaluate_policy, nearest_landmark_policy, random_policy
from .inference import (
    InferredObservation,
    infer_joint_observation,
    pooled_partial_observation,
    raw_partial_observation,
)
from .maddpg import (
    MaddpgAgent,
    MaddpgConfig,
    UpdateMetrics,
    approx_loss_and_grad,
    critic_loss_and_grad,
    maddpg_update,
    policy_objective_and_grad,
    select_action,
    update_approx_policy,
    update_critic,
    update_policy,
)
from .returns import compute_return

__all__ = [
    'DdpgAgent',
    'InferredObservation',
    'MaddpgAgent',
    'MaddpgConfig',
    'RlReplayBuffer',
    'Transition',
    'TransitionBatch',
    'UpdateMetrics',
    'approx_loss_and_grad',
    'compute_return',
    'critic_loss_and_grad',
    'ddpg_update',
    'evaluate_policy',
    'infer_joint_observation',
    'maddpg_update',
    'nearest_landmark_policy',
    'policy_objective_and_grad',
    'pooled_partial_observation',
    'random_policy',
    'raw_partial_observation',
    'select_action',
    'update_approx_policy',
    'update_critic',
    'update_policy',
]
