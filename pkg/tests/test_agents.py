import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from infermarl.agents import (
    DdpgAgent,
    MaddpgAgent,
    MaddpgConfig,
    RlReplayBuffer,
    Transition,
    compute_return,
    ddpg_update,
    evaluate_policy,
    maddpg_update,
    nearest_landmark_policy,
    policy_objective_and_grad,
    random_policy,
    select_action,
)
from infermarl.agents.buffer import TransitionBatch
from infermarl.agents.maddpg import gaussian_entropy, gaussian_log_likelihood
from infermarl.env import build_scenario, reset
from infermarl.exceptions import ContractViolation

SMALL = MaddpgConfig(hidden_units=8, batch_size=16)


def _transition(spec, rng):
    return Transition.shared(
        rng.standard_normal(spec.joint_dim),
        rng.uniform(-1.0, 1.0, size=(spec.n_agents, 2)),
        rng.standard_normal(spec.n_agents),
        rng.standard_normal(spec.joint_dim),
    )


def test_agent_network_shapes(spec, rng):
    agent = MaddpgAgent(0, spec, rng, SMALL)
    assert agent.policy.sizes == (spec.obs_dim, 8, 8, 2)
    assert agent.critic_input_dim == spec.joint_dim + 2 * spec.n_agents
    assert sorted(agent.approx) == list(range(1, spec.n_agents))
    assert agent.target_policy.fingerprint() == agent.policy.fingerprint()
    assert set(agent.nets()) >= {"policy", "critic", "target_policy", "target_critic", "approx_1"}


def test_select_action_bounds_and_determinism(nav_spec, rng):
    agent = MaddpgAgent(1, nav_spec, rng, SMALL)
    obs = rng.standard_normal(nav_spec.obs_dim)
    greedy = select_action(agent, obs, False, rng)
    assert greedy.shape == (2,)
    assert_array_equal(greedy, select_action(agent, obs, False, rng))
    for _ in range(100):
        noisy = select_action(agent, obs, True, rng, sigma=5.0)
        assert np.all(np.abs(noisy) <= 1.0)
    with pytest.raises(ContractViolation):
        select_action(agent, np.zeros(nav_spec.obs_dim + 1), False, rng)


def test_transition_validation(nav_spec, rng):
    t = _transition(nav_spec, rng)
    assert t.n_agents == 3
    assert_array_equal(t.view(2), t.obs_views[0])
    with pytest.raises(ContractViolation):
        Transition.shared(np.zeros(42), np.full((3, 2), 1.5), np.zeros(3), np.zeros(42))
    with pytest.raises(ContractViolation):
        Transition.shared(np.full(42, np.nan), np.zeros((3, 2)), np.zeros(3), np.zeros(42))
    with pytest.raises(ContractViolation):
        Transition.shared(np.zeros(42), np.zeros((3, 2)), np.zeros(2), np.zeros(42))


def test_transition_per_component_views(nav_spec, rng):
    views = rng.standard_normal((2, nav_spec.joint_dim))
    t = Transition(views, [0, 0, 1], np.zeros((3, 2)), np.zeros(3), views, [1, 1, 0])
    batch = TransitionBatch.from_transitions([t])
    assert_array_equal(batch.obs[0, 2], views[1])
    assert_array_equal(batch.next_obs[0, 0], views[1])
    assert_array_equal(batch.next_obs[0, 2], views[0])


def test_replay_buffer_ring(nav_spec, rng):
    buffer = RlReplayBuffer(4)
    with pytest.raises(ContractViolation):
        buffer.sample(2, rng)
    items = [_transition(nav_spec, rng) for _ in range(6)]
    for t in items:
        buffer.push(t)
    assert len(buffer) == 4
    assert list(buffer)[0] is items[4]
    batch = buffer.sample(8, rng)
    assert batch.obs.shape == (8, 3, nav_spec.joint_dim)
    assert batch.actions.shape == (8, 3, 2)


def test_gaussian_helpers():
    assert_allclose(gaussian_log_likelihood(np.zeros((1, 2)), np.zeros((1, 2)), 0.0), [-np.log(2 * np.pi)])
    assert gaussian_entropy(-1.0) == pytest.approx(np.log(2 * np.pi) + 1.0 - 2.0)


def test_policy_objective_ignores_recorded_actions_of_others(nav_spec, rng):
    agent = MaddpgAgent(0, nav_spec, rng, SMALL)
    batch = TransitionBatch.from_transitions([_transition(nav_spec, rng) for _ in range(8)])
    before, _ = policy_objective_and_grad(agent, batch)
    batch.actions = rng.uniform(-1.0, 1.0, size=batch.actions.shape)
    after, _ = policy_objective_and_grad(agent, batch)
    assert after == before


def test_maddpg_update_waits_for_batch(nav_spec, rng):
    agents = [MaddpgAgent(i, nav_spec, rng, SMALL) for i in range(3)]
    buffer = RlReplayBuffer(100)
    for _ in range(SMALL.batch_size - 1):
        buffer.push(_transition(nav_spec, rng))
    fingerprints = [a.policy.fingerprint() for a in agents]
    metrics = maddpg_update(agents, buffer, rng)
    assert not metrics.ran
    assert fingerprints == [a.policy.fingerprint() for a in agents]


def test_maddpg_update_trains_and_tracks_targets(nav_spec, rng):
    agents = [MaddpgAgent(i, nav_spec, rng, SMALL) for i in range(3)]
    buffer = RlReplayBuffer(100)
    for _ in range(40):
        buffer.push(_transition(nav_spec, rng))
    old_target = agents[0].target_critic.copy()
    metrics = maddpg_update(agents, buffer, rng)
    assert metrics.ran
    assert set(metrics.critic_loss) == {0, 1, 2}
    assert len(metrics.approx_loss) == 6
    assert metrics.skipped_updates == 0
    a = agents[0]
    expected = [(1 - SMALL.tau) * t + SMALL.tau * o for t, o in zip(old_target.weights, a.critic.weights)]
    for w, e in zip(a.target_critic.weights, expected):
        assert_allclose(w, e)
    assert a.policy.fingerprint() != a.target_policy.fingerprint()


def test_skipped_updates_are_counted_per_call(nav_spec, rng):
    agents = [MaddpgAgent(i, nav_spec, rng, SMALL) for i in range(3)]
    buffer = RlReplayBuffer(100)
    for _ in range(40):
        buffer.push(_transition(nav_spec, rng))
    agents[0].critic.weights[0][...] = np.nan
    policy_before = agents[0].policy.fingerprint()
    first = maddpg_update(agents, buffer, rng)
    second = maddpg_update(agents, buffer, rng)
    # critic loss and policy objective of agent 0 are both non-finite
    assert first.skipped_updates == 2
    assert second.skipped_updates == 2
    assert agents[0].policy.fingerprint() == policy_before
    assert np.isfinite(second.critic_loss[1])


def test_ddpg_uses_local_buffer(rng):
    agent = DdpgAgent(0, 6, rng, SMALL, capacity=50)
    metrics = ddpg_update(agent, rng)
    assert not metrics.ran
    for _ in range(20):
        agent.remember(rng.standard_normal(6), rng.uniform(-1, 1, 2), 1.0, rng.standard_normal(6))
    before = agent.critic.fingerprint()
    metrics = ddpg_update(agent, rng)
    assert metrics.ran
    assert agent.critic.fingerprint() != before
    assert agent.critic_input_dim == 8


@pytest.mark.parametrize(
    "rewards, gamma, expected",
    [([], 0.95, 0.0), ([1.0, 1.0, 1.0], 0.5, 1.75), ([2.0], 0.0, 2.0), ([0.0, 0.0, 4.0], 0.5, 1.0)],
)
def test_compute_return(rewards, gamma, expected):
    assert compute_return(rewards, gamma) == pytest.approx(expected)


def test_reference_policies(nav_spec, rng):
    _, obs = reset(nav_spec, rng)
    actions = random_policy(obs, rng)
    assert actions.shape == (3, 2)
    assert np.all(np.abs(actions) <= 1.0)
    heading = nearest_landmark_policy(obs, rng)
    assert heading.shape == (3, 2)
    assert np.all(np.abs(heading) <= 1.0)


def test_evaluate_policy_is_seeded():
    spec = build_scenario("cooperative_navigation")
    first = evaluate_policy(spec, nearest_landmark_policy, 2, np.random.default_rng(0))
    again = evaluate_policy(spec, nearest_landmark_policy, 2, np.random.default_rng(0))
    assert first == again
    assert first < 0.0


@pytest.mark.slow
def test_maddpg_learns_cooperative_navigation():
    from infermarl.harness import ExperimentConfig, run_experiment

    spec = build_scenario("cooperative_navigation")
    config = ExperimentConfig(
        scenario="cooperative_navigation",
        algorithm="maddpg",
        episodes_centralized=500,
        episodes_decentralized=0,
        trials=5,
        checkpoint=False,
    )
    report = run_experiment(config)
    learned = np.mean([np.mean(r.series("reward_mean")[-50:]) for r in report.results])
    random = evaluate_policy(spec, random_policy, 20, np.random.default_rng(1))
    heuristic = evaluate_policy(spec, nearest_landmark_policy, 20, np.random.default_rng(1))
    assert heuristic > random
    assert learned - random >= 0.3 * (heuristic - random)
