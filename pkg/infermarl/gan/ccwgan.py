import logging
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..env.scenarios import ScenarioSpec
from ..exceptions import ContractViolation
from ..nn import (
    Gradient,
    NetParams,
    adam_step,
    backward,
    forward,
    init,
    input_gradient,
    input_gradient_backward,
    mlp_sizes,
)
from .buffer import ObsReplayBuffer
from .masking import combine, mask_random_batch, reconstruction_mse

logger = logging.getLogger(__name__)


@dataclass
class GanNets:
    """Generator (o_tilde || m) -> o_G and discriminator o -> score"""

    generator: NetParams
    discriminator: NetParams

    def __post_init__(self):
        dim = self.discriminator.n_inputs
        if self.discriminator.n_outputs != 1:
            raise ContractViolation("discriminator must output one score")
        if self.generator.n_inputs != 2 * dim or self.generator.n_outputs != dim:
            raise ContractViolation(
                f"generator maps {self.generator.n_inputs} -> {self.generator.n_outputs}, expected {2 * dim} -> {dim}"
            )

    @property
    def dim(self) -> int:
        return self.discriminator.n_inputs

    @classmethod
    def build(cls, joint_dim: int, rng: np.random.Generator, hidden_units: int = 64) -> "GanNets":
        return cls(
            generator=init(mlp_sizes(2 * joint_dim, joint_dim, hidden_units), rng),
            discriminator=init(mlp_sizes(joint_dim, 1, hidden_units), rng),
        )


@dataclass
class GanConfig:
    lr: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.9
    gp_lambda: float = 10.0
    n_critic: int = 5
    batch_size: int = 256


@dataclass
class GanMetrics:
    d_loss: float = 0.0
    g_loss: float = 0.0
    wasserstein: float = 0.0
    gradient_penalty: float = 0.0
    reconstruction_mse: float = 0.0
    d_updates: int = 0
    g_updates: int = 0
    skipped: bool = False

    def as_row(self) -> Dict:
        return asdict(self)


def generate(nets: GanNets, o_tilde: np.ndarray, m: np.ndarray) -> np.ndarray:
    """o_G = G(o_tilde || m) for a vector or a batch"""
    o_tilde, m = np.asarray(o_tilde, dtype=float), np.asarray(m, dtype=float)
    if o_tilde.shape != m.shape or o_tilde.shape[-1] != nets.dim:
        raise ContractViolation(f"o_tilde {o_tilde.shape} and m {m.shape} must both have length {nets.dim}")
    out, _ = forward(nets.generator, np.concatenate([o_tilde, m], axis=-1))
    return out


def _check_batches(o: np.ndarray, o_hat: np.ndarray) -> None:
    if o.ndim != 2 or o.shape != o_hat.shape or o.shape[0] < 1:
        raise ContractViolation(f"need two equal non-empty batches, got {o.shape} and {o_hat.shape}")


def gradient_penalty_and_grad(
    discriminator: NetParams,
    o: np.ndarray,
    o_hat: np.ndarray,
    rng: Optional[np.random.Generator] = None,
    eps: Optional[np.ndarray] = None,
) -> Tuple[float, Gradient]:
    """
    mean_b (|grad_x D(x_b)| - 1)^2 at x = eps * o + (1 - eps) * o_hat, eps ~ U(0, 1) per row,
    and its gradient w.r.t. the discriminator parameters.
    """
    o, o_hat = np.asarray(o, dtype=float), np.asarray(o_hat, dtype=float)
    _check_batches(o, o_hat)
    batch = o.shape[0]
    if eps is None:
        if rng is None:
            raise ContractViolation("gradient penalty needs rng or eps to pick interpolation points")
        eps = rng.uniform(0.0, 1.0, size=(batch, 1))
    x = eps * o + (1.0 - eps) * o_hat
    _, tape = forward(discriminator, x)
    g = input_gradient(discriminator, tape)
    norms = np.linalg.norm(g, axis=1)
    penalty = float(np.mean((norms - 1.0) ** 2))
    safe = np.where(norms > 0.0, norms, 1.0)
    u = (2.0 * (norms - 1.0) / (batch * safe))[:, None] * g
    return penalty, input_gradient_backward(discriminator, tape, u)


def gradient_penalty(
    discriminator: NetParams,
    o: np.ndarray,
    o_hat: np.ndarray,
    rng: Optional[np.random.Generator] = None,
    eps: Optional[np.ndarray] = None,
) -> float:
    return gradient_penalty_and_grad(discriminator, o, o_hat, rng, eps)[0]


def d_loss_and_grad(
    nets: GanNets,
    o: np.ndarray,
    o_hat: np.ndarray,
    rng: Optional[np.random.Generator] = None,
    gp_lambda: float = 10.0,
    eps: Optional[np.ndarray] = None,
) -> Tuple[float, Gradient, float, float]:
    """
    Discriminator loss ``mean[D(o) - D(o_hat)] + gp_lambda * GP`` and its gradient w.r.t. D.

    ``o_hat`` is a constant input here. Returns (loss, gradient, wasserstein term, penalty).
    """
    o, o_hat = np.asarray(o, dtype=float), np.asarray(o_hat, dtype=float)
    _check_batches(o, o_hat)
    batch = o.shape[0]
    d = nets.discriminator
    real, tape_real = forward(d, o)
    fake, tape_fake = forward(d, o_hat)
    wasserstein = float(np.mean(real) - np.mean(fake))
    grad = backward(d, tape_real, np.full_like(real, 1.0 / batch)) + backward(d, tape_fake, np.full_like(fake, -1.0 / batch))
    penalty = 0.0
    if gp_lambda:
        penalty, gp_grad = gradient_penalty_and_grad(d, o, o_hat, rng, eps)
        grad = grad + gp_grad.scaled(gp_lambda)
    return wasserstein + gp_lambda * penalty, grad, wasserstein, penalty


def d_loss(
    nets: GanNets,
    o: np.ndarray,
    o_hat: np.ndarray,
    rng: Optional[np.random.Generator] = None,
    gp_lambda: float = 10.0,
) -> float:
    return d_loss_and_grad(nets, o, o_hat, rng, gp_lambda)[0]


def g_loss(nets: GanNets, o_hat: np.ndarray) -> float:
    """Mean discriminator score of the combined observations"""
    o_hat = np.asarray(o_hat, dtype=float)
    scores, _ = forward(nets.discriminator, o_hat if o_hat.ndim == 2 else o_hat[None, :])
    return float(np.mean(scores))


def g_loss_and_grad(nets: GanNets, o: np.ndarray, o_tilde: np.ndarray, m: np.ndarray) -> Tuple[float, Gradient, np.ndarray]:
    """
    Generator objective ``mean D(m * o + (1 - m) * G(o_tilde, m))`` and its gradient w.r.t. G.

    Only the ``(1 - m) * o_G`` term carries gradient. Returns (loss, gradient, o_hat).
    """
    o, o_tilde, m = (np.asarray(a, dtype=float) for a in (o, o_tilde, m))
    _check_batches(o, o_tilde)
    batch = o.shape[0]
    o_g, tape_g = forward(nets.generator, np.concatenate([o_tilde, m], axis=1))
    o_hat = combine(o, m, o_g)
    scores, tape_d = forward(nets.discriminator, o_hat)
    d_grad = backward(nets.discriminator, tape_d, np.full_like(scores, 1.0 / batch))
    g_grad = backward(nets.generator, tape_g, (1.0 - m) * d_grad.inputs)
    return float(np.mean(scores)), Gradient(g_grad.weights, g_grad.biases), o_hat


def infer(nets: GanNets, o_tilde: np.ndarray, m: np.ndarray) -> np.ndarray:
    """o_hat = combine(o_tilde, m, G(o_tilde, m)); returns o_tilde untouched when nothing is hidden"""
    o_tilde, m = np.asarray(o_tilde, dtype=float), np.asarray(m, dtype=float)
    if np.all(m == 1.0):
        return o_tilde.copy()
    return combine(o_tilde, m, generate(nets, o_tilde, m))


def train_step(
    nets: GanNets,
    buffer: ObsReplayBuffer,
    spec: ScenarioSpec,
    rng: np.random.Generator,
    config: Optional[GanConfig] = None,
) -> GanMetrics:
    """
    n_critic discriminator updates followed by one generator update.

    Every update draws a fresh batch from the buffer and masks each row at random.
    """
    config = config or GanConfig()
    metrics = GanMetrics()
    if len(buffer) == 0:
        logger.warning("GAN buffer is empty, skipping update")
        metrics.skipped = True
        return metrics

    for _ in range(config.n_critic):
        o = buffer.sample(config.batch_size, rng)
        o_tilde, m = mask_random_batch(o, spec, rng)
        o_hat = combine(o, m, generate(nets, o_tilde, m))
        loss, grad, wasserstein, penalty = d_loss_and_grad(nets, o, o_hat, rng, config.gp_lambda)
        if not np.isfinite(loss):
            logger.warning("Non-finite discriminator loss, skipping step")
            continue
        adam_step(nets.discriminator, grad, config.lr, config.beta1, config.beta2)
        metrics.d_loss, metrics.wasserstein, metrics.gradient_penalty = loss, wasserstein, penalty
        metrics.d_updates += 1

    o = buffer.sample(config.batch_size, rng)
    o_tilde, m = mask_random_batch(o, spec, rng)
    loss, grad, o_hat = g_loss_and_grad(nets, o, o_tilde, m)
    metrics.reconstruction_mse = reconstruction_mse(o, o_hat)
    if np.isfinite(loss):
        # the discriminator scores real observations low, so the generator descends its score
        adam_step(nets.generator, grad, config.lr, config.beta1, config.beta2)
        metrics.g_loss = loss
        metrics.g_updates = 1
    else:
        logger.warning("Non-finite generator loss, skipping step")
    logger.debug("GAN step d_loss=%.5f g_loss=%.5f mse=%.5f", metrics.d_loss, metrics.g_loss, metrics.reconstruction_mse)
    return metrics


class CCWGAN:
    """
    Context-conditional WGAN-GP that owns its networks and joint-observation buffer B_G.

    Args:
        spec: Scenario whose joint observation is modeled
        rng: Seeded random stream used for initialization
        config: Optimizer and WGAN-GP constants
        capacity: B_G capacity
        hidden_units: Width of both hidden layers
    """

    def __init__(
        self,
        spec: ScenarioSpec,
        rng: np.random.Generator,
        config: Optional[GanConfig] = None,
        capacity: int = 1_000_000,
        hidden_units: int = 64,
    ):
        self.spec = spec
        self.config = config or GanConfig()
        self.nets = GanNets.build(spec.joint_dim, rng, hidden_units)
        self.buffer = ObsReplayBuffer(capacity, spec.joint_dim)
        self.generator_calls = 0
        self.updates = 0

    def push(self, joint_obs: np.ndarray) -> None:
        self.buffer.push(joint_obs)

    def generate(self, o_tilde: np.ndarray, m: np.ndarray) -> np.ndarray:
        self.generator_calls += 1
        return generate(self.nets, o_tilde, m)

    def infer(self, o_tilde: np.ndarray, m: np.ndarray) -> np.ndarray:
        o_tilde, m = np.asarray(o_tilde, dtype=float), np.asarray(m, dtype=float)
        if np.all(m == 1.0):
            return o_tilde.copy()
        return combine(o_tilde, m, self.generate(o_tilde, m))

    def train_step(self, rng: np.random.Generator) -> GanMetrics:
        metrics = train_step(self.nets, self.buffer, self.spec, rng, self.config)
        if not metrics.skipped:
            self.updates += 1
        return metrics

    def fork(self) -> "CCWGAN":
        """Independent copy of the networks and optimizer state with a copy of B_G"""
        clone = CCWGAN.__new__(CCWGAN)
        clone.spec = self.spec
        clone.config = self.config
        clone.nets = GanNets(self.nets.generator.copy(), self.nets.discriminator.copy())
        clone.buffer = self.buffer.copy()
        clone.generator_calls = 0
        clone.updates = 0
        return clone

    def state_dict(self) -> Dict[str, NetParams]:
        return {"generator": self.nets.generator, "discriminator": self.nets.discriminator}

    def load_state_dict(self, nets: Dict[str, NetParams]) -> None:
        self.nets = GanNets(nets["generator"], nets["discriminator"])
