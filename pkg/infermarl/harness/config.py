import dataclasses
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from ..agents.maddpg import MaddpgConfig
from ..env.perturbation import DynamicsPerturbation
from ..env.scenarios import SCENARIOS
from ..exceptions import ConfigError
from ..gan.ccwgan import GanConfig

logger = logging.getLogger(__name__)

ALGORITHMS = ("maddpg_infer", "maddpg", "ddpg")
EPISODE_LENGTH = 200

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}


@dataclass
class ExperimentConfig:
    """
    Every knob of one experiment. Defaults reproduce the full-scale protocol.

    The decentralized phase masks observations by distance ``d_p`` and, when ``perturb`` is set,
    shifts the dynamics with noise plus a per-trial translation.
    """

    scenario: str = "cooperative_navigation"
    algorithm: str = "maddpg_infer"
    episodes_centralized: int = 2000
    episodes_decentralized: int = 1000
    episode_length: int = EPISODE_LENGTH
    update_every: int = 100

    batch_size: int = 1024
    buffer_capacity: int = 1_000_000
    gamma: float = 0.95
    tau: float = 0.01
    lr_actor: float = 1e-2
    lr_critic: float = 1e-2
    lr_approx: float = 1e-2
    entropy_weight: float = 0.001
    approx_log_std: float = -1.0
    hidden_units: int = 64
    explore_sigma: float = 0.1
    explore_sigma_final: float = 0.0

    lr_gan: float = 1e-4
    gan_betas: Tuple[float, float] = (0.5, 0.9)
    gp_lambda: float = 10.0
    n_critic: int = 5
    gan_batch_size: int = 256
    gan_buffer_capacity: int = 1_000_000
    gan_train_steps: int = 1

    d_p: float = 1.0
    perturb: bool = False
    perturb_action_sigma: float = 0.05
    perturb_obs_sigma: float = 0.05
    perturb_translation: float = 0.1

    policy_updates: bool = True
    gan_updates: bool = True
    gan_buffer_inferred: bool = True
    shared_gan: bool = True

    trials: int = 30
    seed: int = 0
    workers: int = 1
    checkpoint: bool = True
    record_states: bool = False
    log_every: int = 50

    @property
    def total_episodes(self) -> int:
        return self.episodes_centralized + self.episodes_decentralized

    def validate(self) -> "ExperimentConfig":
        """Raise ConfigError naming the first offending key"""
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"unknown scenario {self.scenario!r}, expected one of {', '.join(SCENARIOS)}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError("algorithm", f"unknown algorithm {self.algorithm!r}, expected one of {', '.join(ALGORITHMS)}")
        if self.episode_length != EPISODE_LENGTH:
            raise ConfigError("episode_length", f"episodes are fixed at {EPISODE_LENGTH} steps")
        for key in ("trials", "update_every", "batch_size", "buffer_capacity", "hidden_units", "n_critic",
                    "gan_batch_size", "gan_buffer_capacity", "workers", "log_every"):
            if getattr(self, key) < 1:
                raise ConfigError(key, f"must be at least 1, got {getattr(self, key)}")
        for key in ("episodes_centralized", "episodes_decentralized", "gan_train_steps"):
            if getattr(self, key) < 0:
                raise ConfigError(key, f"must be non-negative, got {getattr(self, key)}")
        if self.total_episodes < 1:
            raise ConfigError("episodes_centralized", "at least one episode is required")
        if self.d_p < 0:
            raise ConfigError("d_p", f"must be non-negative, got {self.d_p}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError("gamma", f"must lie in [0, 1], got {self.gamma}")
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError("tau", f"must lie in (0, 1], got {self.tau}")
        for key in ("lr_actor", "lr_critic", "lr_approx", "lr_gan"):
            if getattr(self, key) <= 0:
                raise ConfigError(key, f"must be positive, got {getattr(self, key)}")
        for key in ("explore_sigma", "explore_sigma_final", "perturb_action_sigma", "perturb_obs_sigma",
                    "perturb_translation", "gp_lambda", "entropy_weight"):
            if getattr(self, key) < 0:
                raise ConfigError(key, f"must be non-negative, got {getattr(self, key)}")
        if len(self.gan_betas) != 2 or not all(0.0 <= b < 1.0 for b in self.gan_betas):
            raise ConfigError("gan_betas", f"expected two values in [0, 1), got {self.gan_betas}")
        return self

    def maddpg_config(self) -> MaddpgConfig:
        return MaddpgConfig(
            gamma=self.gamma,
            tau=self.tau,
            lr_actor=self.lr_actor,
            lr_critic=self.lr_critic,
            lr_approx=self.lr_approx,
            entropy_weight=self.entropy_weight,
            approx_log_std=self.approx_log_std,
            batch_size=self.batch_size,
            hidden_units=self.hidden_units,
        )

    def gan_config(self) -> GanConfig:
        return GanConfig(
            lr=self.lr_gan,
            beta1=self.gan_betas[0],
            beta2=self.gan_betas[1],
            gp_lambda=self.gp_lambda,
            n_critic=self.n_critic,
            batch_size=self.gan_batch_size,
        )

    def sample_perturbation(self, obs_dim: int, rng) -> DynamicsPerturbation:
        if not self.perturb:
            return DynamicsPerturbation()
        return DynamicsPerturbation.sample(
            obs_dim,
            rng,
            action_sigma=self.perturb_action_sigma,
            obs_sigma=self.perturb_obs_sigma,
            translation=self.perturb_translation,
        )

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes).validate()

    def to_text(self) -> str:
        """Flat ``key = value`` text that parse_config reads back unchanged"""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, tuple):
                text = ", ".join(repr(v) for v in value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{f.name} = {text}")
        return "\n".join(lines) + "\n"


PRESETS: Dict[str, Dict[str, Any]] = {
    "full": {"episodes_centralized": 2000, "episodes_decentralized": 1000},
    "smoke": {"episodes_centralized": 60, "episodes_decentralized": 30},
    "desk": {"episodes_centralized": 1000, "episodes_decentralized": 500, "trials": 10},
}

_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, raw: Any) -> Any:
    kind = _FIELD_TYPES[key]
    default = getattr(ExperimentConfig, key, None)
    if not isinstance(raw, str):
        if isinstance(default, tuple):
            return tuple(float(v) for v in raw)
        return raw
    text = raw.strip()
    try:
        if isinstance(default, bool) or kind in (bool, "bool"):
            lowered = text.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(text)
        if isinstance(default, tuple):
            return tuple(float(v) for v in text.split(","))
        if isinstance(default, int):
            return int(float(text)) if "e" in text.lower() else int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(key, f"cannot parse {text!r}") from None
    return text


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"{path} does not exist")
    values: Dict[str, str] = {}
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def parse_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    preset: Optional[str] = None,
) -> ExperimentConfig:
    """
    Resolve defaults, then preset, then file, then overrides (CLI flags), and validate.

    Args:
        path: Optional flat config file
        overrides: Values that win over the file; ``None`` entries are ignored
        preset: One of ``full``, ``smoke`` or ``desk``
    """
    values: Dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset {preset!r}, expected one of {', '.join(PRESETS)}")
        values.update(PRESETS[preset])
    if path is not None:
        values.update(read_config_file(path))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})

    unknown = sorted(k for k in values if k not in _FIELD_TYPES)
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key")
    config = ExperimentConfig(**{k: _coerce(k, v) for k, v in values.items()})
    return config.validate()


def write_resolved_config(config: ExperimentConfig, out_dir: Union[str, Path]) -> Path:
    path = Path(out_dir) / "resolved_config.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config.to_text(), encoding="utf-8")
    logger.info("Resolved config written to %s", path)
    return path
