import numpy as np
import pytest

from infermarl.env import build_scenario
from infermarl.harness import ExperimentConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=["physical_deception", "predator_prey", "cooperative_navigation"])
def spec(request):
    return build_scenario(request.param)


@pytest.fixture
def nav_spec():
    return build_scenario("cooperative_navigation")


@pytest.fixture
def tiny_config():
    """Three 200-step episodes with small networks and batches"""
    return ExperimentConfig(
        scenario="cooperative_navigation",
        algorithm="maddpg_infer",
        episodes_centralized=2,
        episodes_decentralized=1,
        batch_size=32,
        gan_batch_size=16,
        n_critic=1,
        hidden_units=8,
        buffer_capacity=10_000,
        gan_buffer_capacity=10_000,
        trials=1,
        log_every=1,
    )


def numeric_gradient(net, loss_fn, h=1e-6):
    """Central differences over every parameter, in Gradient.flat() order"""
    parts = []
    for w, b in zip(net.weights, net.biases):
        for arr in (w, b):
            g = np.zeros_like(arr)
            for idx in np.ndindex(arr.shape):
                orig = arr[idx]
                arr[idx] = orig + h
                plus = loss_fn()
                arr[idx] = orig - h
                minus = loss_fn()
                arr[idx] = orig
                g[idx] = (plus - minus) / (2.0 * h)
            parts.append(g.ravel())
    return np.concatenate(parts)


def relative_error(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-8)
    return float(np.linalg.norm(a - b) / scale)
