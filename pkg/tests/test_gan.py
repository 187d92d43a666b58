import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from infermarl.env.scenarios import SELF_POS, AgentSpec, ObsField, ScenarioSpec
from infermarl.exceptions import ContractViolation
from infermarl.gan import (
    CCWGAN,
    GanConfig,
    GanNets,
    ObsReplayBuffer,
    combine,
    d_loss,
    g_loss,
    g_loss_and_grad,
    generate,
    gradient_penalty,
    infer,
    mask_random,
    masked_mse,
    reconstruction_mse,
    train_step,
)
from infermarl.nn import NetParams, forward


def test_buffer_ring_and_sampling(rng):
    buffer = ObsReplayBuffer(3, 2)
    with pytest.raises(ContractViolation):
        buffer.sample(4, rng)
    for k in range(5):
        buffer.push(np.full(2, float(k)))
    assert len(buffer) == 3
    sample = buffer.sample(50, rng)
    assert sample.shape == (50, 2)
    assert set(sample[:, 0]) <= {2.0, 3.0, 4.0}
    with pytest.raises(ContractViolation):
        buffer.push(np.zeros(3))


def test_buffer_copy_is_independent(rng):
    buffer = ObsReplayBuffer(4, 2)
    buffer.push(np.ones(2))
    clone = buffer.copy()
    clone.push(np.zeros(2))
    assert len(buffer) == 1
    assert len(clone) == 2


def test_mask_random_counts(spec, rng):
    o = rng.standard_normal(spec.joint_dim)
    for _ in range(300):
        sample = mask_random(o, spec, rng)
        assert 1 <= len(sample.masked_agents) <= spec.n_agents - 1
        for j in sample.masked_agents:
            assert_array_equal(sample.m[spec.agent_slice(j)], 0.0)
        assert_array_equal(sample.o_tilde[sample.m == 1.0], o[sample.m == 1.0])
        assert_array_equal(sample.o, o)


def test_mask_random_rejects_wrong_length(nav_spec, rng):
    with pytest.raises(ContractViolation):
        mask_random(np.zeros(5), nav_spec, rng)


def test_mask_random_hides_each_agent_half_the_time(nav_spec):
    rng = np.random.default_rng(0)
    o = np.zeros(nav_spec.joint_dim)
    counts = np.zeros(3)
    for _ in range(10_000):
        counts[list(mask_random(o, nav_spec, rng).masked_agents)] += 1
    assert_allclose(counts / 10_000, 0.5, atol=0.02)


def test_combine_preserves_visible_entries_exactly(nav_spec, rng):
    nets = GanNets.build(nav_spec.joint_dim, rng, hidden_units=16)
    o = rng.standard_normal((100_000, nav_spec.joint_dim))
    m = (rng.uniform(size=o.shape) > 0.5).astype(float)
    o_tilde = np.where(m > 0.0, o, rng.standard_normal(o.shape))
    o_hat = infer(nets, o_tilde, m)
    assert_array_equal(m * o_hat, m * o)
    o_g = generate(nets, o_tilde, m)
    assert_array_equal(o_hat[m == 0.0], o_g[m == 0.0])


def test_combine_rejects_shape_mismatch():
    with pytest.raises(ContractViolation):
        combine(np.zeros(4), np.ones(3), np.zeros(4))


def test_generate_validates_inputs(nav_spec, rng):
    nets = GanNets.build(nav_spec.joint_dim, rng, hidden_units=8)
    with pytest.raises(ContractViolation):
        generate(nets, np.zeros(nav_spec.joint_dim), np.ones(nav_spec.joint_dim - 1))


def test_gan_nets_shapes(rng):
    nets = GanNets.build(10, rng, hidden_units=8)
    assert nets.generator.sizes == (20, 8, 8, 10)
    assert nets.discriminator.sizes == (10, 8, 8, 1)
    with pytest.raises(ContractViolation):
        GanNets(nets.discriminator, nets.discriminator)


def test_gradient_penalty_of_linear_critic():
    d = NetParams([np.array([[2.0], [0.0], [0.0]])], [np.zeros(1)])
    o, o_hat = np.ones((4, 3)), np.zeros((4, 3))
    assert gradient_penalty(d, o, o_hat, eps=np.full((4, 1), 0.3)) == pytest.approx(1.0)


def test_d_loss_without_penalty_is_score_gap(rng):
    nets = GanNets.build(6, rng, hidden_units=8)
    o, o_hat = rng.standard_normal((8, 6)), rng.standard_normal((8, 6))
    real, _ = forward(nets.discriminator, o)
    fake, _ = forward(nets.discriminator, o_hat)
    assert d_loss(nets, o, o_hat, gp_lambda=0.0) == pytest.approx(float(np.mean(real) - np.mean(fake)))
    assert g_loss(nets, o_hat) == pytest.approx(float(np.mean(fake)))


def test_d_loss_rejects_mismatched_batches(rng):
    nets = GanNets.build(6, rng, hidden_units=8)
    with pytest.raises(ContractViolation):
        d_loss(nets, np.zeros((4, 6)), np.zeros((3, 6)), rng)


def test_penalty_needs_rng_or_interpolation_points(rng):
    nets = GanNets.build(6, rng, hidden_units=8)
    o, o_hat = rng.standard_normal((8, 6)), rng.standard_normal((8, 6))
    with pytest.raises(ContractViolation):
        d_loss(nets, o, o_hat)
    with pytest.raises(ContractViolation):
        gradient_penalty(nets.discriminator, o, o_hat)
    assert np.isfinite(d_loss(nets, o, o_hat, rng))


def test_generator_gradient_vanishes_without_hidden_entries(nav_spec, rng):
    nets = GanNets.build(nav_spec.joint_dim, rng, hidden_units=8)
    o = rng.standard_normal((16, nav_spec.joint_dim))
    _, grad, o_hat = g_loss_and_grad(nets, o, o, np.ones_like(o))
    assert_array_equal(o_hat, o)
    assert np.all(grad.flat() == 0.0)


def test_reconstruction_metrics():
    o = np.array([1.0, 2.0, 3.0, 4.0])
    o_hat = np.array([1.0, 2.0, 5.0, 4.0])
    assert reconstruction_mse(o, o_hat) == pytest.approx(1.0)
    assert masked_mse(o, o_hat, np.array([1.0, 1.0, 0.0, 1.0])) == pytest.approx(4.0)
    assert masked_mse(o, o_hat, np.ones(4)) == 0.0


def test_train_step_on_empty_buffer_is_skipped(nav_spec, rng):
    nets = GanNets.build(nav_spec.joint_dim, rng, hidden_units=8)
    metrics = train_step(nets, ObsReplayBuffer(10, nav_spec.joint_dim), nav_spec, rng)
    assert metrics.skipped
    assert metrics.d_updates == metrics.g_updates == 0


def test_train_step_updates_both_networks(nav_spec, rng):
    gan = CCWGAN(nav_spec, rng, GanConfig(batch_size=16, n_critic=3), capacity=100, hidden_units=8)
    for _ in range(20):
        gan.push(rng.standard_normal(nav_spec.joint_dim))
    g_before = gan.nets.generator.fingerprint()
    d_before = gan.nets.discriminator.fingerprint()
    metrics = gan.train_step(rng)
    assert not metrics.skipped
    assert metrics.d_updates == 3
    assert metrics.g_updates == 1
    assert gan.updates == 1
    assert gan.nets.generator.fingerprint() != g_before
    assert gan.nets.discriminator.fingerprint() != d_before
    assert set(metrics.as_row()) >= {"d_loss", "g_loss", "gradient_penalty", "reconstruction_mse"}


def test_infer_without_hidden_entries_skips_generator(nav_spec, rng):
    gan = CCWGAN(nav_spec, rng, capacity=10, hidden_units=8)
    o = rng.standard_normal(nav_spec.joint_dim)
    assert_array_equal(gan.infer(o, np.ones_like(o)), o)
    assert gan.generator_calls == 0
    m = np.ones_like(o)
    m[:5] = 0.0
    out = gan.infer(o, m)
    assert gan.generator_calls == 1
    assert_array_equal(out[5:], o[5:])


def test_fork_and_state_dict(nav_spec, rng):
    gan = CCWGAN(nav_spec, rng, GanConfig(batch_size=8, n_critic=1), capacity=50, hidden_units=8)
    for _ in range(10):
        gan.push(rng.standard_normal(nav_spec.joint_dim))
    fork = gan.fork()
    assert fork.nets.generator.fingerprint() == gan.nets.generator.fingerprint()
    fork.train_step(rng)
    assert fork.nets.generator.fingerprint() != gan.nets.generator.fingerprint()
    assert len(fork.buffer) == len(gan.buffer) == 10

    other = CCWGAN(nav_spec, np.random.default_rng(99), capacity=10, hidden_units=8)
    other.load_state_dict(gan.state_dict())
    assert other.nets.discriminator.fingerprint() == gan.nets.discriminator.fingerprint()


def _correlated_spec():
    layout = (ObsField("self_pos", 2, SELF_POS),)
    return ScenarioSpec(
        name="cooperative_navigation",
        agents=(AgentSpec(), AgentSpec()),
        landmarks=(),
        obs_layouts=(layout, layout),
    )


@pytest.mark.slow
def test_wgan_learns_correlated_stream():
    rng = np.random.default_rng(0)
    spec = _correlated_spec()
    gan = CCWGAN(spec, rng, GanConfig(batch_size=64), capacity=20_000, hidden_units=64)

    def draw(size):
        x = rng.standard_normal((size, 2))
        return np.concatenate([x, x + 0.1 * rng.standard_normal((size, 2))], axis=1)

    for row in draw(20_000):
        gan.push(row)
    for _ in range(10_000):
        gan.train_step(rng)

    o = draw(2_000)
    generated, noise = [], []
    for row in o:
        sample = mask_random(row, spec, rng)
        hidden = sample.m == 0.0
        generated.append(np.mean((gan.infer(sample.o_tilde, sample.m)[hidden] - row[hidden]) ** 2))
        noise.append(np.mean((sample.o_tilde[hidden] - row[hidden]) ** 2))
    assert np.mean(generated) < 0.5 * np.mean(noise)


@pytest.mark.slow
def test_generator_settles_on_a_constant_stream():
    rng = np.random.default_rng(0)
    spec = _correlated_spec()
    target = np.array([0.5, -0.3, 0.2, 0.8])
    gan = CCWGAN(spec, rng, GanConfig(lr=1e-3, batch_size=64), capacity=1_000, hidden_units=32)
    for _ in range(1_000):
        gan.push(target)
    for _ in range(3_000):
        gan.train_step(rng)

    for _ in range(100):
        sample = mask_random(target, spec, rng)
        hidden = sample.m == 0.0
        assert_allclose(gan.infer(sample.o_tilde, sample.m)[hidden], target[hidden], atol=0.1)
