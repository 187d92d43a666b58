import numpy as np
import pytest
from numpy.testing import assert_array_equal

from infermarl.agents import infer_joint_observation, pooled_partial_observation, raw_partial_observation
from infermarl.env.observation import mask_by_distance, observe
from infermarl.env.world import WorldState
from infermarl.gan import CCWGAN


def _observation(spec, positions):
    positions = np.asarray(positions, dtype=float)
    landmarks = np.array([[0.5, 0.5], [-0.5, 0.3], [0.2, -0.7]])[: spec.n_landmarks]
    state = WorldState(spec, positions, np.zeros_like(positions), landmarks)
    return observe(state), positions


@pytest.fixture
def gan(nav_spec, rng):
    return CCWGAN(nav_spec, rng, capacity=10, hidden_units=8)


def test_everyone_in_range_shares_the_true_observation(nav_spec, gan, rng):
    obs, positions = _observation(nav_spec, [[0.0, 0.0], [0.3, 0.0], [0.0, 0.3]])
    partial, m, graph = mask_by_distance(obs, positions, 1.0, rng)
    view = infer_joint_observation(gan, partial, m, graph, rng)
    assert view.views.shape == (1, nav_spec.joint_dim)
    assert_array_equal(view.view_index, [0, 0, 0])
    assert_array_equal(view.views[0], obs.flat())
    assert gan.generator_calls == 0


def test_isolated_agents_keep_their_own_state(nav_spec, gan, rng):
    obs, positions = _observation(nav_spec, [[0.0, 0.0], [0.8, 0.0], [1.6, 0.0]])
    partial, m, graph = mask_by_distance(obs, positions, 0.0, rng)
    view = infer_joint_observation(gan, partial, m, graph, rng)
    assert view.views.shape == (3, nav_spec.joint_dim)
    assert_array_equal(view.view_index, [0, 1, 2])
    assert gan.generator_calls == 3
    truth = obs.flat()
    for k in range(3):
        real = view.masks[k] == 1.0
        assert_array_equal(view.views[k][real], truth[real])
        assert np.all(view.masks[k][nav_spec.agent_slice((k + 1) % 3)] == 0.0)
        assert view.own_obs(k)[:4].tolist() == truth[nav_spec.agent_slice(k)][:4].tolist()


def test_relayed_agents_recover_relative_positions(nav_spec, gan, rng):
    obs, positions = _observation(nav_spec, [[0.0, 0.0], [0.8, 0.0], [1.6, 0.0]])
    partial, m, graph = mask_by_distance(obs, positions, 1.0, rng)
    assert graph.components() == [(0, 1, 2)]
    assert not graph.visible(0, 2)
    assert np.any(m == 0.0)
    view = infer_joint_observation(gan, partial, m, graph, rng)
    assert view.views.shape == (1, nav_spec.joint_dim)
    slices = nav_spec.field_slices
    agent0 = view.view(0)[nav_spec.agent_slice(0)]
    agent2 = view.view(2)[nav_spec.agent_slice(2)]
    assert_array_equal(agent0[slices[0]["agent_2_pos"]], positions[2] - positions[0])
    assert_array_equal(agent2[slices[2]["agent_0_pos"]], positions[0] - positions[2])
    assert_array_equal(view.views[0], obs.flat())


def test_per_agent_models_serve_their_component(nav_spec, rng):
    gans = [CCWGAN(nav_spec, np.random.default_rng(k), capacity=10, hidden_units=8) for k in range(3)]
    obs, positions = _observation(nav_spec, [[0.0, 0.0], [0.2, 0.0], [1.6, 0.0]])
    partial, m, graph = mask_by_distance(obs, positions, 1.0, rng)
    view = infer_joint_observation(gans, partial, m, graph, rng)
    assert view.components == [(0, 1), (2,)]
    assert_array_equal(view.view_index, [0, 0, 1])
    assert [g.generator_calls for g in gans] == [1, 0, 1]


def test_raw_partial_observation_shares_the_full_observation(nav_spec):
    obs, _ = _observation(nav_spec, [[0.0, 0.0], [0.8, 0.0], [1.6, 0.0]])
    view = raw_partial_observation(obs, np.ones(nav_spec.joint_dim))
    assert view.views.shape == (1, nav_spec.joint_dim)
    for i in range(3):
        assert_array_equal(view.own_obs(i), obs.agent(i))


def test_pooled_view_hides_agents_outside_the_component(nav_spec, rng):
    obs, positions = _observation(nav_spec, [[0.0, 0.0], [0.2, 0.0], [0.9, 0.9]])
    partial, m, graph = mask_by_distance(obs, positions, 0.5, rng)
    view = pooled_partial_observation(partial, m, graph, rng)
    assert view.components == [(0, 1), (2,)]
    assert_array_equal(view.view_index, [0, 0, 1])
    truth = obs.flat()
    far, near = nav_spec.agent_slice(2), nav_spec.agent_slice(0)
    assert not np.any(view.view(0)[far] == truth[far])
    assert not np.any(view.view(2)[near] == truth[near])
    assert np.all(view.mask(0)[far] == 0.0)
    for i in range(3):
        assert_array_equal(view.own_obs(i), partial.agent(i))


def test_pooled_view_matches_inference_without_the_generator(nav_spec, gan):
    obs, positions = _observation(nav_spec, [[0.0, 0.0], [0.2, 0.0], [0.9, 0.9]])
    partial, m, graph = mask_by_distance(obs, positions, 0.5, np.random.default_rng(5))
    pooled = pooled_partial_observation(partial, m, graph, np.random.default_rng(9))
    inferred = infer_joint_observation(gan, partial, m, graph, np.random.default_rng(9))
    assert_array_equal(pooled.masks, inferred.masks)
    for k in range(2):
        real = pooled.masks[k] == 1.0
        assert_array_equal(pooled.views[k][real], inferred.views[k][real])


def test_relay_can_be_switched_off(nav_spec, rng):
    obs, positions = _observation(nav_spec, [[0.0, 0.0], [0.8, 0.0], [1.6, 0.0]])
    partial, m, graph = mask_by_distance(obs, positions, 1.0, rng)
    relayed = pooled_partial_observation(partial, m, graph, rng)
    assert_array_equal(relayed.views[0], obs.flat())
    local = pooled_partial_observation(partial, m, graph, rng, relay=False)
    assert_array_equal(local.views[0], partial.flat())
