import logging
from typing import Dict, Optional, Tuple

import numpy as np

from ..exceptions import ContractViolation
from ..nn import Gradient, NetParams, adam_step, backward, forward, init, mlp_sizes, polyak_update
from .buffer import RlReplayBuffer, Transition, TransitionBatch
from .maddpg import MaddpgConfig, UpdateMetrics

logger = logging.getLogger(__name__)


class DdpgAgent:
    """
    Independent learner: policy and critic see only the agent's own observation and action.

    Args:
        index: Agent index (used for logging and metric keys)
        obs_dim: Length of the agent's own observation
        rng: Seeded random stream for initialization
        config: Learning constants shared with MADDPG
        capacity: Local replay buffer capacity
    """

    def __init__(
        self,
        index: int,
        obs_dim: int,
        rng: np.random.Generator,
        config: Optional[MaddpgConfig] = None,
        capacity: int = 1_000_000,
    ):
        self.index = index
        self.obs_dim = obs_dim
        self.config = config or MaddpgConfig()
        hidden = self.config.hidden_units
        self.policy = init(mlp_sizes(obs_dim, 2, hidden), rng, output_activation="tanh")
        self.critic = init(mlp_sizes(obs_dim + 2, 1, hidden), rng)
        self.target_policy = self.policy.copy()
        self.target_critic = self.critic.copy()
        self.buffer = RlReplayBuffer(capacity)

    @property
    def critic_input_dim(self) -> int:
        return self.critic.n_inputs

    def remember(self, obs: np.ndarray, action: np.ndarray, reward: float, next_obs: np.ndarray) -> None:
        self.buffer.push(Transition.shared(obs, np.reshape(action, (1, 2)), [reward], next_obs))

    def nets(self) -> Dict[str, NetParams]:
        return {
            "policy": self.policy,
            "critic": self.critic,
            "target_policy": self.target_policy,
            "target_critic": self.target_critic,
        }

    def online_nets(self):
        return [self.policy, self.critic]


def _local(batch: TransitionBatch) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if batch.obs.shape[1] != 1:
        raise ContractViolation("DDPG batches hold a single agent")
    return batch.obs[:, 0], batch.actions[:, 0], batch.rewards[:, 0], batch.next_obs[:, 0]


def ddpg_critic_loss_and_grad(agent: DdpgAgent, batch: TransitionBatch) -> Tuple[float, Gradient]:
    obs, actions, rewards, next_obs = _local(batch)
    next_actions, _ = forward(agent.target_policy, next_obs)
    q_next, _ = forward(agent.target_critic, np.concatenate([next_obs, next_actions], axis=1))
    y = rewards + agent.config.gamma * q_next[:, 0]
    q, tape = forward(agent.critic, np.concatenate([obs, actions], axis=1))
    err = q[:, 0] - y
    grad = backward(agent.critic, tape, (2.0 * err / len(batch))[:, None])
    return float(np.mean(err ** 2)), Gradient(grad.weights, grad.biases)


def ddpg_policy_objective_and_grad(agent: DdpgAgent, batch: TransitionBatch) -> Tuple[float, Gradient]:
    """mean Q(o, pi(o)) and the gradient of its negation"""
    obs = _local(batch)[0]
    actions, policy_tape = forward(agent.policy, obs)
    q, critic_tape = forward(agent.critic, np.concatenate([obs, actions], axis=1))
    critic_grad = backward(agent.critic, critic_tape, np.full_like(q, -1.0 / len(batch)))
    grad = backward(agent.policy, policy_tape, critic_grad.inputs[:, agent.obs_dim :])
    return float(np.mean(q)), Gradient(grad.weights, grad.biases)


def ddpg_update(agent: DdpgAgent, rng: np.random.Generator, buffer: Optional[RlReplayBuffer] = None) -> UpdateMetrics:
    """Critic step, policy step and soft target update from the agent's local buffer"""
    buffer = buffer if buffer is not None else agent.buffer
    cfg = agent.config
    metrics = UpdateMetrics()
    if len(buffer) < cfg.batch_size:
        return metrics
    batch = buffer.sample(cfg.batch_size, rng)
    rejected_before = agent.policy.rejected_steps + agent.critic.rejected_steps

    loss, grad = ddpg_critic_loss_and_grad(agent, batch)
    if np.isfinite(loss):
        adam_step(agent.critic, grad, cfg.lr_critic)
    else:
        logger.warning("DDPG agent %d: non-finite critic loss, skipping update", agent.index)
        agent.critic.rejected_steps += 1
    metrics.critic_loss[agent.index] = loss

    objective, grad = ddpg_policy_objective_and_grad(agent, batch)
    if np.isfinite(objective) and grad.is_finite():
        adam_step(agent.policy, grad, cfg.lr_actor)
    else:
        logger.warning("DDPG agent %d: non-finite policy gradient, skipping update", agent.index)
        agent.policy.rejected_steps += 1
    metrics.policy_objective[agent.index] = objective

    polyak_update(agent.target_policy, agent.policy, cfg.tau)
    polyak_update(agent.target_critic, agent.critic, cfg.tau)
    metrics.skipped_updates = agent.policy.rejected_steps + agent.critic.rejected_steps - rejected_before
    metrics.ran = True
    return metrics
