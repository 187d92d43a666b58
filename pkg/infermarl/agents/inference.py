from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..env.observation import JointObservation, VisibilityGraph, agent_mask
from ..env.scenarios import AGENT_POS, AGENT_VEL, ScenarioSpec


@dataclass
class InferredObservation:
    """One inferred joint observation per connected group of agents"""

    views: np.ndarray
    view_index: np.ndarray
    masks: np.ndarray
    components: List[Tuple[int, ...]]
    spec: ScenarioSpec

    def view(self, agent: int) -> np.ndarray:
        return self.views[self.view_index[agent]]

    def mask(self, agent: int) -> np.ndarray:
        return self.masks[self.view_index[agent]]

    def own_obs(self, agent: int) -> np.ndarray:
        return self.view(agent)[self.spec.agent_slice(agent)]


def _relay_cross_entries(pooled: np.ndarray, spec: ScenarioSpec, comp, graph: VisibilityGraph) -> None:
    # agents connected only through relays still exchange own state, so their
    # relative entries are recomputed from the communicated self fields
    for i in comp:
        own = spec.field_slices[i]
        base_i = spec.agent_slice(i).start
        for k in comp:
            if k == i or graph.visible(i, k):
                continue
            base_k = spec.agent_slice(k).start
            other = spec.field_slices[k]
            for f in spec.obs_layouts[i]:
                if f.ref != k:
                    continue
                s = own[f.name]
                target = slice(base_i + s.start, base_i + s.stop)
                if f.kind == AGENT_POS:
                    p_k = pooled[base_k + other["self_pos"].start : base_k + other["self_pos"].stop]
                    p_i = pooled[base_i + own["self_pos"].start : base_i + own["self_pos"].stop]
                    pooled[target] = p_k - p_i
                elif f.kind == AGENT_VEL:
                    pooled[target] = pooled[base_k + other["self_vel"].start : base_k + other["self_vel"].stop]


def _pool_components(
    gan,
    partial: JointObservation,
    mask: np.ndarray,
    graph: VisibilityGraph,
    rng: np.random.Generator,
    relay: bool = True,
) -> InferredObservation:
    spec = partial.spec
    flat = partial.flat()
    components = graph.components()
    views, masks = [], []
    view_index = np.zeros(spec.n_agents, dtype=int)
    for c, comp in enumerate(components):
        missing = [j for j in range(spec.n_agents) if j not in comp]
        pooled_mask = agent_mask(spec, missing)
        pooled = flat.copy()
        unreceived = (pooled_mask == 0.0) & (np.asarray(mask) == 1.0)
        pooled[unreceived] = rng.standard_normal(int(unreceived.sum()))
        if relay and len(comp) > 2:
            _relay_cross_entries(pooled, spec, comp, graph)
        if gan is not None:
            model = gan[comp[0]] if isinstance(gan, (list, tuple)) else gan
            pooled = model.infer(pooled, pooled_mask)
        views.append(pooled)
        masks.append(pooled_mask)
        view_index[list(comp)] = c
    return InferredObservation(np.stack(views), view_index, np.stack(masks), components, spec)


def infer_joint_observation(
    gan,
    partial: JointObservation,
    mask: np.ndarray,
    graph: VisibilityGraph,
    rng: np.random.Generator,
) -> InferredObservation:
    """
    Pool the partial observations of each connected visibility component and fill the rest.

    Agents outside a component are missing from its view: their own vectors (never received)
    are noise-filled and every entry about them is generated by ``gan.infer`` once per
    component. Members of one component share the identical view. ``gan`` is either one
    shared model or a per-agent list, in which case a component uses its first member's model.
    """
    return _pool_components(gan, partial, mask, graph, rng)


def pooled_partial_observation(
    partial: JointObservation,
    mask: np.ndarray,
    graph: VisibilityGraph,
    rng: np.random.Generator,
    relay: bool = True,
) -> InferredObservation:
    """
    The no-inference view: the same per-component pooling as ``infer_joint_observation``,
    with the hidden entries left as noise.

    Args:
        partial: the distance-masked joint observation
        mask: its binary mask
        graph: visibility graph of the step
        rng: stream for the noise fill of out-of-component agents
        relay: recompute relayed relative entries inside a component; off for
            learners that do not communicate
    """
    return _pool_components(None, partial, mask, graph, rng, relay)


def raw_partial_observation(partial: JointObservation, mask: np.ndarray) -> InferredObservation:
    """Every agent's vector as given, shared by everyone; used for fully observed steps"""
    spec = partial.spec
    return InferredObservation(
        partial.flat()[None, :],
        np.zeros(spec.n_agents, dtype=int),
        np.asarray(mask, dtype=float)[None, :],
        [tuple(range(spec.n_agents))],
        spec,
    )
