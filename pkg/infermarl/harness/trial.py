import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..agents.buffer import RlReplayBuffer, Transition
from ..agents.ddpg import DdpgAgent, ddpg_update
from ..agents.inference import (
    InferredObservation,
    infer_joint_observation,
    pooled_partial_observation,
    raw_partial_observation,
)
from ..agents.maddpg import MaddpgAgent, UpdateMetrics, maddpg_update, select_action
from ..env.observation import JointObservation, mask_by_distance
from ..env.perturbation import DynamicsPerturbation
from ..env.scenarios import ScenarioSpec, build_scenario
from ..env.world import ParticleEnv, StateRecorder
from ..gan.ccwgan import CCWGAN, GanMetrics
from ..gan.masking import reconstruction_mse
from ..nn import NetParams
from ..nn.checkpoint import save_bundle
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

CENTRALIZED = 1
DECENTRALIZED = 2

GAN_COLUMNS = (
    "episode",
    "step",
    "model",
    "d_loss",
    "g_loss",
    "wasserstein",
    "gradient_penalty",
    "reconstruction_mse",
    "d_updates",
    "g_updates",
    "skipped",
)


def episode_columns(spec: ScenarioSpec) -> List[str]:
    """Fixed column order of a per-trial episode CSV"""
    columns = ["episode", "phase", "reward_mean"]
    if spec.adversary_indices:
        columns += ["reward_good", "reward_adversary"]
    columns += [f"reward_agent_{i}" for i in range(spec.n_agents)]
    columns += [
        "critic_loss",
        "policy_objective",
        "approx_loss",
        "updates",
        "d_loss",
        "g_loss",
        "gan_mse",
        "inference_mse",
        "masked_fraction",
    ]
    return columns


def write_csv(path: Path, fieldnames: Sequence[str], rows: Sequence[Dict]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def _mean(values: Sequence[float]) -> float:
    return float(np.mean(values)) if len(values) else 0.0


@dataclass
class TrialResult:
    """Everything one trial emits; ``rows`` holds one dict per episode in ``columns`` order"""

    trial_index: int
    seed: int
    columns: List[str]
    rows: List[Dict]
    phase_boundary: int
    gan_rows: List[Dict] = field(default_factory=list)
    fingerprints: Dict[str, Dict[str, str]] = field(default_factory=dict)
    checkpoint: Optional[Path] = None

    def series(self, column: str) -> np.ndarray:
        return np.array([row[column] for row in self.rows], dtype=float)

    def phase_rows(self, phase: int) -> List[Dict]:
        return [row for row in self.rows if row["phase"] == phase]


@dataclass
class Frame:
    """What the learners see at one time step"""

    view: InferredObservation
    mask: np.ndarray
    inference_mse: float = 0.0


class LearnerGroup:
    """The trial's agents and their replay memory"""

    def __init__(self, runner: "TrialRunner"):
        self._runner = runner
        cfg, spec = runner.config, runner.spec
        learner_config = cfg.maddpg_config()
        rng = runner.agent_rng
        self.buffer: Optional[RlReplayBuffer] = None
        if cfg.algorithm == "ddpg":
            self.agents = [
                DdpgAgent(i, spec.obs_dim, rng, learner_config, cfg.buffer_capacity) for i in range(spec.n_agents)
            ]
        else:
            self.agents = [MaddpgAgent(i, spec, rng, learner_config) for i in range(spec.n_agents)]
            self.buffer = RlReplayBuffer(cfg.buffer_capacity)

    def act(self, view: InferredObservation, sigma: float) -> np.ndarray:
        rng = self._runner.agent_rng
        return np.stack(
            [select_action(agent, view.own_obs(agent.index), sigma > 0.0, rng, sigma) for agent in self.agents]
        )

    def remember(self, frame: Frame, actions: np.ndarray, rewards: np.ndarray, next_frame: Frame) -> None:
        view, nxt = frame.view, next_frame.view
        if self.buffer is None:
            for agent in self.agents:
                i = agent.index
                agent.remember(view.own_obs(i), actions[i], rewards[i], nxt.own_obs(i))
            return
        self.buffer.push(
            Transition(view.views, view.view_index, actions, rewards, nxt.views, nxt.view_index, view.masks, nxt.masks)
        )

    def update(self) -> UpdateMetrics:
        rng = self._runner.agent_rng
        if self.buffer is not None:
            return maddpg_update(self.agents, self.buffer, rng)
        combined = UpdateMetrics()
        for agent in self.agents:
            metrics = ddpg_update(agent, rng)
            combined.critic_loss.update(metrics.critic_loss)
            combined.policy_objective.update(metrics.policy_objective)
            combined.skipped_updates += metrics.skipped_updates
            combined.ran = combined.ran or metrics.ran
        return combined

    def nets(self) -> Dict[str, NetParams]:
        return {f"agent_{a.index}/{name}": net for a in self.agents for name, net in a.nets().items()}


class ObservationPipeline:
    """
    Turns the environment's joint observation into the learners' views.

    Centralized: the full joint observation, also collected into B_G. Decentralized: distance
    masking and per-component pooling, then GAN inference (``maddpg_infer``) or nothing.
    """

    def __init__(self, runner: "TrialRunner"):
        self._runner = runner
        cfg = runner.config
        self.gan: Optional[CCWGAN] = None
        self.per_agent: Optional[List[CCWGAN]] = None
        if cfg.algorithm == "maddpg_infer":
            self.gan = CCWGAN(
                runner.spec, runner.gan_rng, cfg.gan_config(), cfg.gan_buffer_capacity, cfg.hidden_units
            )

    @property
    def models(self) -> List[CCWGAN]:
        if self.per_agent is not None:
            return self.per_agent
        return [self.gan] if self.gan is not None else []

    def begin_decentralized(self) -> None:
        if self.gan is not None and not self._runner.config.shared_gan:
            self.per_agent = [self.gan.fork() for _ in range(self._runner.spec.n_agents)]

    def observe(self, obs: JointObservation, phase: int) -> Frame:
        spec = self._runner.spec
        if phase == CENTRALIZED:
            if self.gan is not None:
                self.gan.push(obs.flat())
            full = raw_partial_observation(obs, np.ones(spec.joint_dim))
            return Frame(full, full.masks[0])

        cfg, rng = self._runner.config, self._runner.gan_rng
        truth = obs.flat()
        partial, m, graph = mask_by_distance(obs, self._runner.env.positions, cfg.d_p, rng)
        if self.gan is None:
            view = pooled_partial_observation(partial, m, graph, rng, relay=cfg.algorithm != "ddpg")
            return Frame(view, m, self._view_error(truth, view))

        view = infer_joint_observation(self.per_agent or self.gan, partial, m, graph, rng)
        if cfg.gan_buffer_inferred:
            for k, comp in enumerate(view.components):
                owners = [self.per_agent[i] for i in comp] if self.per_agent else [self.gan]
                for model in owners:
                    model.push(view.views[k])
        return Frame(view, m, self._view_error(truth, view))

    @staticmethod
    def _view_error(truth: np.ndarray, view: InferredObservation) -> float:
        # per agent, over the whole joint vector it acts on
        return _mean([reconstruction_mse(truth, view.view(i)) for i in range(len(view.view_index))])

    def train(self, phase: int) -> List[Tuple[int, GanMetrics]]:
        cfg = self._runner.config
        if not self.models or (phase == DECENTRALIZED and not cfg.gan_updates):
            return []
        rng = self._runner.gan_rng
        return [(k, model.train_step(rng)) for k, model in enumerate(self.models) for _ in range(cfg.gan_train_steps)]

    def nets(self) -> Dict[str, NetParams]:
        if self.per_agent is not None:
            return {f"gan_{i}/{k}": net for i, m in enumerate(self.per_agent) for k, net in m.state_dict().items()}
        if self.gan is not None:
            return {f"gan/{k}": net for k, net in self.gan.state_dict().items()}
        return {}


class TrialRunner:
    """
    One seeded trial: a centralized phase followed by a decentralized phase.

    Args:
        config: Validated experiment configuration
        trial_index: Offset added to ``config.seed``
        out_dir: Run directory; the trial writes into ``trial_<index>/`` below it when given
    """

    def __init__(self, config: ExperimentConfig, trial_index: int, out_dir: Optional[Union[str, Path]] = None):
        self.config = config.validate()
        self.trial_index = trial_index
        self.seed = config.seed + trial_index
        env_seq, agent_seq, gan_seq, shift_seq = np.random.SeedSequence(self.seed).spawn(4)
        self.env_rng = np.random.default_rng(env_seq)
        self.agent_rng = np.random.default_rng(agent_seq)
        self.gan_rng = np.random.default_rng(gan_seq)
        self.spec = build_scenario(config.scenario)
        self.shift = config.sample_perturbation(self.spec.obs_dim, np.random.default_rng(shift_seq))
        self.env = ParticleEnv(self.spec, self.env_rng, DynamicsPerturbation())
        self.trial_dir = Path(out_dir) / f"trial_{trial_index:03d}" if out_dir is not None else None

        self.learners = LearnerGroup(self)
        self.observations = ObservationPipeline(self)
        self.total_steps = 0
        self.fingerprints: Dict[str, Dict[str, str]] = {}
        self.gan_rows: List[Dict] = []
        self._recorder: Optional[StateRecorder] = None

    def phase(self, episode: int) -> int:
        return CENTRALIZED if episode < self.config.episodes_centralized else DECENTRALIZED

    def exploration_sigma(self, episode: int) -> float:
        """Linear decay over the centralized phase, final value afterwards"""
        cfg = self.config
        if episode >= cfg.episodes_centralized:
            return cfg.explore_sigma_final
        if cfg.episodes_centralized == 1:
            return cfg.explore_sigma
        frac = episode / (cfg.episodes_centralized - 1)
        return cfg.explore_sigma + frac * (cfg.explore_sigma_final - cfg.explore_sigma)

    def nets(self) -> Dict[str, NetParams]:
        nets = self.learners.nets()
        nets.update(self.observations.nets())
        return nets

    def parameter_fingerprints(self) -> Dict[str, str]:
        return {name: net.fingerprint() for name, net in sorted(self.nets().items())}

    def begin_decentralized(self, episode: int) -> None:
        self.fingerprints["phase_boundary"] = self.parameter_fingerprints()
        self.env.perturbation = self.shift
        self.observations.begin_decentralized()
        logger.info(
            "Trial %d: decentralized execution from episode %d (d_P=%s, perturb=%s)",
            self.trial_index,
            episode,
            self.config.d_p,
            self.shift.enabled,
        )

    def run_episode(self, episode: int) -> Dict:
        cfg, spec = self.config, self.spec
        phase = self.phase(episode)
        learning = phase == CENTRALIZED or cfg.policy_updates
        sigma = self.exploration_sigma(episode)

        frame = self.observations.observe(self.env.reset(), phase)
        totals = np.zeros(spec.n_agents)
        updates: List[UpdateMetrics] = []
        gan_metrics: List[GanMetrics] = []
        masked, inference = [], []
        while not self.env.done:
            actions = self.learners.act(frame.view, sigma)
            obs, rewards = self.env.step(actions)
            next_frame = self.observations.observe(obs, phase)
            self.learners.remember(frame, actions, rewards, next_frame)
            if self._recorder is not None:
                self._recorder.record(self.env.state, rewards, next_frame.mask, episode=episode)
            totals += rewards
            if phase == DECENTRALIZED:
                masked.append(1.0 - float(np.mean(next_frame.mask)))
                inference.append(next_frame.inference_mse)
            self.total_steps += 1
            if self.total_steps % cfg.update_every == 0:
                if learning:
                    metrics = self.learners.update()
                    if metrics.ran:
                        updates.append(metrics)
                for k, m in self.observations.train(phase):
                    gan_metrics.append(m)
                    self.gan_rows.append({"episode": episode, "step": self.total_steps, "model": k, **m.as_row()})
            frame = next_frame

        trained = [m for m in gan_metrics if not m.skipped]
        row = {"episode": episode, "phase": phase, "reward_mean": float(np.mean(totals))}
        if spec.adversary_indices:
            row["reward_good"] = float(np.mean(totals[list(spec.good_indices)]))
            row["reward_adversary"] = float(np.mean(totals[list(spec.adversary_indices)]))
        row.update({f"reward_agent_{i}": float(totals[i]) for i in range(spec.n_agents)})
        row.update(
            {
                "critic_loss": _mean([u.mean_critic_loss() for u in updates]),
                "policy_objective": _mean([u.mean_policy_objective() for u in updates]),
                "approx_loss": _mean([v for u in updates for v in u.approx_loss.values()]),
                "updates": len(updates),
                "d_loss": _mean([m.d_loss for m in trained]),
                "g_loss": _mean([m.g_loss for m in trained]),
                "gan_mse": _mean([m.reconstruction_mse for m in trained]),
                "inference_mse": _mean(inference),
                "masked_fraction": _mean(masked),
            }
        )
        return row

    def run(self) -> TrialResult:
        cfg = self.config
        if self.trial_dir is not None:
            self.trial_dir.mkdir(parents=True, exist_ok=True)
            if cfg.record_states:
                self._recorder = StateRecorder(self.trial_dir / "states.jsonl")
        logger.info("Trial %d: seed %d, %s on %s", self.trial_index, self.seed, cfg.algorithm, cfg.scenario)
        rows = []
        try:
            for episode in range(cfg.total_episodes):
                if episode == cfg.episodes_centralized:
                    self.begin_decentralized(episode)
                rows.append(self.run_episode(episode))
                if (episode + 1) % cfg.log_every == 0:
                    logger.info(
                        "Trial %d episode %d: reward %.3f, critic loss %.4f",
                        self.trial_index,
                        episode + 1,
                        rows[-1]["reward_mean"],
                        rows[-1]["critic_loss"],
                    )
        finally:
            if self._recorder is not None:
                self._recorder.close()
        if "phase_boundary" not in self.fingerprints:
            self.fingerprints["phase_boundary"] = self.parameter_fingerprints()
        self.fingerprints["final"] = self.parameter_fingerprints()

        result = TrialResult(
            trial_index=self.trial_index,
            seed=self.seed,
            columns=episode_columns(self.spec),
            rows=rows,
            phase_boundary=cfg.episodes_centralized,
            gan_rows=self.gan_rows,
            fingerprints=self.fingerprints,
        )
        if self.trial_dir is not None:
            self.write(result)
        return result

    def write(self, result: TrialResult) -> None:
        write_csv(self.trial_dir / "episodes.csv", result.columns, result.rows)
        write_csv(self.trial_dir / "gan_metrics.csv", GAN_COLUMNS, result.gan_rows)
        (self.trial_dir / "fingerprints.json").write_text(
            json.dumps(result.fingerprints, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        if self.config.checkpoint:
            result.checkpoint = self.trial_dir / "checkpoint.json"
            save_bundle(result.checkpoint, self.nets())


def run_trial(
    config: ExperimentConfig,
    trial_index: int,
    out_dir: Optional[Union[str, Path]] = None,
) -> TrialResult:
    """Run one trial with seed ``config.seed + trial_index``"""
    return TrialRunner(config, trial_index, out_dir).run()
