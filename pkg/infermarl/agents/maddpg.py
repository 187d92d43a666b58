import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..env.scenarios import ScenarioSpec
from ..exceptions import ContractViolation
from ..nn import Gradient, NetParams, adam_step, backward, forward, init, mlp_sizes, polyak_update
from .buffer import RlReplayBuffer, TransitionBatch

logger = logging.getLogger(__name__)

LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class MaddpgConfig:
    gamma: float = 0.95
    tau: float = 0.01
    lr_actor: float = 1e-2
    lr_critic: float = 1e-2
    lr_approx: float = 1e-2
    entropy_weight: float = 0.001
    approx_log_std: float = -1.0
    batch_size: int = 1024
    hidden_units: int = 64


@dataclass
class UpdateMetrics:
    critic_loss: Dict[int, float] = field(default_factory=dict)
    policy_objective: Dict[int, float] = field(default_factory=dict)
    approx_loss: Dict[Tuple[int, int], float] = field(default_factory=dict)
    skipped_updates: int = 0
    ran: bool = False

    def mean_critic_loss(self) -> float:
        return float(np.mean(list(self.critic_loss.values()))) if self.critic_loss else 0.0

    def mean_policy_objective(self) -> float:
        return float(np.mean(list(self.policy_objective.values()))) if self.policy_objective else 0.0


class MaddpgAgent:
    """
    Deterministic policy, centralized critic and approximate policies of the other agents.

    Args:
        index: Position of this agent in the joint observation
        spec: Scenario the agent lives in
        rng: Seeded random stream for initialization
        config: Learning constants
    """

    def __init__(self, index: int, spec: ScenarioSpec, rng: np.random.Generator, config: Optional[MaddpgConfig] = None):
        self.index = index
        self.spec = spec
        self.config = config or MaddpgConfig()
        hidden = self.config.hidden_units
        n = spec.n_agents
        self.policy = init(mlp_sizes(spec.obs_dim, 2, hidden), rng, output_activation="tanh")
        self.critic = init(mlp_sizes(spec.joint_dim + 2 * n, 1, hidden), rng)
        self.approx: Dict[int, NetParams] = {
            j: init(mlp_sizes(spec.obs_dim, 2, hidden), rng, output_activation="tanh") for j in range(n) if j != index
        }
        self.target_policy = self.policy.copy()
        self.target_critic = self.critic.copy()
        self.target_approx = {j: net.copy() for j, net in self.approx.items()}

    @property
    def critic_input_dim(self) -> int:
        return self.critic.n_inputs

    def own_obs(self, joint: np.ndarray) -> np.ndarray:
        return joint[..., self.spec.agent_slice(self.index)]

    def nets(self) -> Dict[str, NetParams]:
        out = {
            "policy": self.policy,
            "critic": self.critic,
            "target_policy": self.target_policy,
            "target_critic": self.target_critic,
        }
        for j in self.approx:
            out[f"approx_{j}"] = self.approx[j]
            out[f"target_approx_{j}"] = self.target_approx[j]
        return out

    def online_nets(self) -> List[NetParams]:
        return [self.policy, self.critic] + [self.approx[j] for j in sorted(self.approx)]

    def sync_targets(self, tau: float) -> None:
        polyak_update(self.target_policy, self.policy, tau)
        polyak_update(self.target_critic, self.critic, tau)
        for j in self.approx:
            polyak_update(self.target_approx[j], self.approx[j], tau)


def select_action(
    agent,
    obs: np.ndarray,
    explore: bool,
    rng: np.random.Generator,
    sigma: float = 0.1,
) -> np.ndarray:
    """clamp(pi(o_i) + explore * N(0, sigma^2), -1, 1)"""
    obs = np.asarray(obs, dtype=float)
    if obs.shape != (agent.policy.n_inputs,):
        raise ContractViolation(f"observation length {obs.shape}, policy expects {agent.policy.n_inputs}")
    action, _ = forward(agent.policy, obs)
    if explore and sigma > 0.0:
        action = action + sigma * rng.standard_normal(action.shape)
    return np.clip(action, -1.0, 1.0)


def gaussian_log_likelihood(actions: np.ndarray, mean: np.ndarray, log_std: float) -> np.ndarray:
    """Per-row log density of a diagonal Gaussian with a fixed log standard deviation"""
    var = np.exp(2.0 * log_std)
    return np.sum(-((actions - mean) ** 2) / (2.0 * var) - log_std - 0.5 * LOG_2PI, axis=-1)


def gaussian_entropy(log_std: float, dim: int = 2) -> float:
    return float(dim * (0.5 * (LOG_2PI + 1.0) + log_std))


def _critic_input(joint: np.ndarray, actions: np.ndarray) -> np.ndarray:
    return np.concatenate([joint, actions.reshape(actions.shape[0], -1)], axis=1)


def _check_batch(batch: TransitionBatch) -> None:
    if len(batch) < 1:
        raise ContractViolation("empty batch")


def critic_loss_and_grad(agent: MaddpgAgent, batch: TransitionBatch) -> Tuple[float, Gradient]:
    """
    Mean squared TD error of Q_i and its gradient.

    ``y = r_i + gamma * Q_i'(o', a')`` with a'_j from the target approximate policies and a'_i
    from the agent's own target policy.
    """
    _check_batch(batch)
    spec, i, cfg = agent.spec, agent.index, agent.config
    obs, next_obs = batch.obs[:, i], batch.next_obs[:, i]
    next_actions = np.empty_like(batch.actions)
    for j in range(spec.n_agents):
        net = agent.target_policy if j == i else agent.target_approx[j]
        next_actions[:, j], _ = forward(net, next_obs[:, spec.agent_slice(j)])
    q_next, _ = forward(agent.target_critic, _critic_input(next_obs, next_actions))
    y = batch.rewards[:, i] + cfg.gamma * q_next[:, 0]

    q, tape = forward(agent.critic, _critic_input(obs, batch.actions))
    err = q[:, 0] - y
    loss = float(np.mean(err ** 2))
    grad = backward(agent.critic, tape, (2.0 * err / len(batch))[:, None])
    return loss, Gradient(grad.weights, grad.biases)


def update_critic(agent: MaddpgAgent, batch: TransitionBatch) -> float:
    """One Adam step on the centralized critic; returns the pre-step loss"""
    loss, grad = critic_loss_and_grad(agent, batch)
    if not np.isfinite(loss):
        logger.warning("Agent %d: non-finite critic loss, skipping update", agent.index)
        agent.critic.rejected_steps += 1
        return loss
    adam_step(agent.critic, grad, agent.config.lr_critic)
    return loss


def policy_objective_and_grad(agent: MaddpgAgent, batch: TransitionBatch) -> Tuple[float, Gradient]:
    """
    Objective ``mean Q_i(o, a)`` with ``a_i = pi_i(o_i)`` and ``a_j = mu_i^j(o_j)`` held fixed.

    Returns the objective and the gradient of its negation (the quantity Adam descends).
    """
    _check_batch(batch)
    spec, i = agent.spec, agent.index
    obs = batch.obs[:, i]
    own_action, policy_tape = forward(agent.policy, obs[:, spec.agent_slice(i)])
    actions = np.empty_like(batch.actions)
    for j in range(spec.n_agents):
        if j == i:
            actions[:, j] = own_action
        else:
            actions[:, j], _ = forward(agent.approx[j], obs[:, spec.agent_slice(j)])
    q, critic_tape = forward(agent.critic, _critic_input(obs, actions))
    objective = float(np.mean(q))
    critic_grad = backward(agent.critic, critic_tape, np.full_like(q, -1.0 / len(batch)))
    start = spec.joint_dim + 2 * i
    grad = backward(agent.policy, policy_tape, critic_grad.inputs[:, start : start + 2])
    return objective, Gradient(grad.weights, grad.biases)


def update_policy(agent: MaddpgAgent, batch: TransitionBatch) -> float:
    """One Adam step ascending the critic through the policy's own action"""
    objective, grad = policy_objective_and_grad(agent, batch)
    if not (np.isfinite(objective) and grad.is_finite()):
        logger.warning("Agent %d: non-finite policy gradient, skipping update", agent.index)
        agent.policy.rejected_steps += 1
        return objective
    adam_step(agent.policy, grad, agent.config.lr_actor)
    return objective


def approx_loss_and_grad(agent: MaddpgAgent, j: int, batch: TransitionBatch) -> Tuple[float, Gradient]:
    """
    ``-mean log N(a_j; mu_i^j(o_j), sigma^2) - entropy_weight * H`` with a fixed log-std.
    """
    _check_batch(batch)
    if j == agent.index or j not in agent.approx:
        raise ContractViolation(f"agent {agent.index} has no approximate policy for agent {j}")
    cfg = agent.config
    obs_j = batch.obs[:, agent.index][:, agent.spec.agent_slice(j)]
    target = batch.actions[:, j]
    mean, tape = forward(agent.approx[j], obs_j)
    log_lik = gaussian_log_likelihood(target, mean, cfg.approx_log_std)
    loss = float(-np.mean(log_lik) - cfg.entropy_weight * gaussian_entropy(cfg.approx_log_std))
    var = np.exp(2.0 * cfg.approx_log_std)
    grad = backward(agent.approx[j], tape, -(target - mean) / (var * len(batch)))
    return loss, Gradient(grad.weights, grad.biases)


def update_approx_policy(agent: MaddpgAgent, j: int, batch: TransitionBatch) -> float:
    loss, grad = approx_loss_and_grad(agent, j, batch)
    if not np.isfinite(loss):
        logger.warning("Agent %d: non-finite approximate-policy loss for agent %d", agent.index, j)
        agent.approx[j].rejected_steps += 1
        return loss
    adam_step(agent.approx[j], grad, agent.config.lr_approx)
    return loss


def _rejected_steps(agents) -> int:
    return sum(net.rejected_steps for a in agents for net in a.online_nets())


def maddpg_update(
    agents: Sequence[MaddpgAgent],
    buffer: RlReplayBuffer,
    rng: np.random.Generator,
    config: Optional[MaddpgConfig] = None,
) -> UpdateMetrics:
    """
    Approximate policies, critic and policy of every agent, then soft target updates.

    No-op (``metrics.ran`` false) while the buffer holds fewer than ``batch_size`` transitions.
    """
    config = config or agents[0].config
    metrics = UpdateMetrics()
    if len(buffer) < config.batch_size:
        return metrics
    batch = buffer.sample(config.batch_size, rng)
    rejected_before = _rejected_steps(agents)
    for agent in agents:
        for j in sorted(agent.approx):
            metrics.approx_loss[(agent.index, j)] = update_approx_policy(agent, j, batch)
        metrics.critic_loss[agent.index] = update_critic(agent, batch)
        metrics.policy_objective[agent.index] = update_policy(agent, batch)
    for agent in agents:
        agent.sync_targets(config.tau)
    metrics.skipped_updates = _rejected_steps(agents) - rejected_before
    metrics.ran = True
    return metrics
