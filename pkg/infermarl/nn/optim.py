import logging

import numpy as np

from ..exceptions import ContractViolation
from .mlp import Gradient, NetParams

logger = logging.getLogger(__name__)


def _check_congruent(net: NetParams, other_weights, other_biases, what: str) -> None:
    if len(other_weights) != len(net.weights):
        raise ContractViolation(f"{what} has {len(other_weights)} layers, network has {len(net.weights)}")
    for k, (w, b, gw, gb) in enumerate(zip(net.weights, net.biases, other_weights, other_biases)):
        if w.shape != gw.shape or b.shape != gb.shape:
            raise ContractViolation(f"{what} layer {k} shape mismatch")


def adam_step(
    net: NetParams,
    grad: Gradient,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> NetParams:
    """
    One Adam update with bias correction, applied in place.

    A gradient with a non-finite entry is rejected: parameters and moments stay untouched,
    ``net.rejected_steps`` is incremented and a warning is logged.

    Args:
        net: Network to update
        grad: Gradient congruent with ``net``
        lr: Step size
        beta1: First moment decay
        beta2: Second moment decay
        eps: Denominator offset
    """
    _check_congruent(net, grad.weights, grad.biases, "gradient")
    if not grad.is_finite():
        net.rejected_steps += 1
        logger.warning("Rejected Adam step on non-finite gradient (%d rejected so far)", net.rejected_steps)
        return net

    state = net.adam
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    params = list(zip(net.weights, grad.weights, state.m_weights, state.v_weights)) + list(
        zip(net.biases, grad.biases, state.m_biases, state.v_biases)
    )
    for p, g, m, v in params:
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    net.version += 1
    return net


def polyak_update(target: NetParams, online: NetParams, tau: float) -> NetParams:
    """target <- (1 - tau) * target + tau * online, in place"""
    if not 0.0 < tau <= 1.0:
        raise ContractViolation(f"tau must lie in (0, 1], got {tau}")
    _check_congruent(target, online.weights, online.biases, "online network")
    for t, o in zip(target.weights + target.biases, online.weights + online.biases):
        if tau == 1.0:
            t[...] = o
        else:
            t *= 1.0 - tau
            t += tau * o
    target.version += 1
    return target
