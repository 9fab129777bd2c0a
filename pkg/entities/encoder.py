# -*- coding: UTF-8 -*-

"""
 *
 *    Particle Push - entity-centric goal-conditioned RL on a planar push table
 *
 *    Copyright (C) 2026 Particle Push contributors
 *
 *    This program is free software: you can redistribute it and/or modify
 *    it under the terms of the GNU General Public License as published by
 *    the Free Software Foundation, either version 3 of the License, or
 *    any later version.
 *
 *    This program is distributed in the hope that it will be useful,
 *    but WITHOUT ANY WARRANTY; without even the implied warranty of
 *    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
 *    GNU General Public License for more details.
 *
 *    You should have received a copy of the GNU General Public License
 *    along with this program.  If not, see <https://www.gnu.org/licenses/>.
 *
 */
"""


import logging
import numpy as np
from dataclasses import dataclass

from errors import EntityError
from entities.particle import (EntitySet, Observation, ViewConfig, particle_dim,
                               AGENT_ID, DECOY_ID)

log = logging.getLogger('particle-push')

TRANSPARENCY_THRESHOLD = 0.5
OBJECT_DEPTH = 0.0
AGENT_DEPTH = 0.5


def max_codes(feature_dim):
    return 2 * (feature_dim - 1)


def object_code(color, feature_dim=4, scale=1.0):
    """Scaled one-hot colour code.

    The first l-1 slots carry the colour modulo l-1 and the last slot marks
    the second bank, giving 2(l-1) distinct codes.
    """
    color = int(color)
    if not 0 <= color < max_codes(feature_dim):
        raise EntityError('colour index %d needs more than %d feature slots' % (color, feature_dim))
    code = np.zeros(feature_dim)
    code[color % (feature_dim - 1)] = scale
    if color >= feature_dim - 1:
        code[feature_dim - 1] = scale
    return code


def agent_code(feature_dim=4, scale=1.0):
    code = np.zeros(feature_dim)
    code[-1] = -scale
    return code


def interest_codes(colors, feature_dim=4, scale=1.0):
    colors = sorted(set(int(c) for c in colors))
    return np.stack([object_code(c, feature_dim, scale) for c in colors])


def default_views(n_views=2, jitter_sigma=0.002, dropout_prob=0.0, n_decoys=2):
    """View 0 sees the table as is, view 1 rotated by 90 degrees about its centre."""
    rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
    centre = np.array([0.5, 0.5])
    views = []
    for view_id in range(n_views):
        affine = np.linalg.matrix_power(rotation, view_id % 4)
        views.append(ViewConfig(view_id=view_id, affine=affine, offset=centre - affine @ centre,
                                jitter_sigma=jitter_sigma, dropout_prob=dropout_prob, n_decoys=n_decoys))
    return tuple(views)


def check_visibility(views, n_objects, include_agent=True, forced=True):
    """Refuse view setups where some entity can be hidden in every view at once."""
    for index in ([AGENT_ID] if include_agent else []) + list(range(n_objects)):
        hideable = [v.dropout_prob > 0 or (forced and index in v.occluded) for v in views]
        if all(hideable):
            who = 'agent' if index == AGENT_ID else 'object %d' % index
            raise EntityError('%s can be occluded in all %d views simultaneously' % (who, len(views)))


def _view_set(view, positions, codes, scales, depths, ids, rng, feature_dim, occluded=frozenset()):
    n = len(positions)
    visible = rng.random(n) >= view.dropout_prob
    for i, entity in enumerate(ids):
        if entity in occluded:
            visible[i] = False

    projected = view.project(positions) if n else np.zeros((0, 2))
    if view.jitter_sigma > 0 and n:
        projected = projected + rng.normal(0.0, view.jitter_sigma, size=projected.shape)

    rows = [np.concatenate([projected[i], scales[i], [depths[i], 1.0], codes[i]])
            for i in range(n) if visible[i]]
    kept_ids = [ids[i] for i in range(n) if visible[i]]

    for _ in range(view.n_decoys):
        rows.append(np.concatenate([rng.uniform(0.0, 1.0, 2), scales[-1] if n else [0.08, 0.08],
                                    [rng.uniform(0.0, 1.0), 0.0], rng.uniform(-1.0, 1.0, feature_dim)]))
        kept_ids.append(DECOY_ID)

    if not rows:
        return EntitySet.empty(view.view_id, feature_dim)
    order = rng.permutation(len(rows))
    return EntitySet(np.stack(rows)[order], view.view_id, np.asarray(kept_ids)[order])


def encode_state(sim, views, rng, feature_dim=4, feature_scale=1.0,
                 object_radius=0.04, agent_radius=0.03, guarantee_visibility=False):
    """Per-view particle sets for agent and objects of a simulator state."""
    if not views:
        raise EntityError('at least one view is required')
    n_objects = len(sim.object_pos)
    if guarantee_visibility:
        check_visibility(views, n_objects)

    positions = np.vstack([np.asarray(sim.agent_pos)[None, :], sim.object_pos])
    codes = [agent_code(feature_dim, feature_scale)] + \
            [object_code(c, feature_dim, feature_scale) for c in sim.object_code]
    scales = [np.full(2, 2 * agent_radius)] + [np.full(2, 2 * object_radius)] * n_objects
    depths = [AGENT_DEPTH] + [OBJECT_DEPTH] * n_objects
    ids = [AGENT_ID] + list(range(n_objects))
    return tuple(_view_set(view, positions, codes, scales, depths, ids, rng, feature_dim, view.occluded)
                 for view in views)


def encode_goal(goal, views, rng, feature_dim=4, feature_scale=1.0,
                object_radius=0.04, guarantee_visibility=False):
    """Per-view particle sets for the goal objects, no agent particle."""
    if not views:
        raise EntityError('at least one view is required')
    n_goals = len(goal.goal_pos)
    if guarantee_visibility:
        check_visibility(views, n_goals, include_agent=False, forced=False)

    positions = np.asarray(goal.goal_pos, dtype=np.float64).reshape(n_goals, 2)
    codes = [object_code(c, feature_dim, feature_scale) for c in goal.goal_code]
    scales = [np.full(2, 2 * object_radius)] * n_goals
    return tuple(_view_set(view, positions, codes, scales, [OBJECT_DEPTH] * n_goals, list(range(n_goals)),
                           rng, feature_dim) for view in views)


def encode_oracle(positions, colors, feature_dim=4, feature_scale=1.0, object_radius=0.04,
                  agent_pos=None, agent_radius=0.03):
    """Noise-free single-view particles straight from ground truth, in entity order."""
    rows, ids = [], []
    if agent_pos is not None:
        rows.append(np.concatenate([agent_pos, np.full(2, 2 * agent_radius), [AGENT_DEPTH, 1.0],
                                    agent_code(feature_dim, feature_scale)]))
        ids.append(AGENT_ID)
    for index, (position, color) in enumerate(zip(np.asarray(positions).reshape(-1, 2), colors)):
        rows.append(np.concatenate([position, np.full(2, 2 * object_radius), [OBJECT_DEPTH, 1.0],
                                    object_code(color, feature_dim, feature_scale)]))
        ids.append(index)
    if not rows:
        return EntitySet.empty(0, feature_dim)
    return EntitySet(np.stack(rows), 0, ids)


def filter_of_interest(entity_set, codes, threshold=0.5):
    """Keep opaque particles whose features sit within `threshold` of an interest code."""
    if len(entity_set) == 0:
        return entity_set
    codes = np.atleast_2d(np.asarray(codes, dtype=np.float64))
    if len(codes) == 0:
        return entity_set.subset(np.zeros(len(entity_set), dtype=bool))
    gaps = np.linalg.norm(entity_set.features[:, None, :] - codes[None, :, :], axis=-1)
    keep = (entity_set.transparency >= TRANSPARENCY_THRESHOLD) & (gaps.min(axis=1) <= threshold)
    return entity_set.subset(keep)


@dataclass(frozen=True, eq=False)
class ObservationEncoder:
    """Bundles views and encoding settings for one run.

    mode 'particles' emits noisy multi-view sets, mode 'oracle' emits a single
    noise-free view built from ground truth.
    """
    views: tuple
    feature_dim: int = 4
    feature_scale: float = 1.0
    object_radius: float = 0.04
    agent_radius: float = 0.03
    mode: str = 'particles'
    guarantee_visibility: bool = False

    @property
    def n_views(self):
        return 1 if self.mode == 'oracle' else len(self.views)

    @property
    def particle_dim(self):
        return particle_dim(self.feature_dim)

    def encode_state(self, sim, rng):
        if self.mode == 'oracle':
            return (encode_oracle(sim.object_pos, sim.object_code, self.feature_dim, self.feature_scale,
                                  self.object_radius, sim.agent_pos, self.agent_radius),)
        return encode_state(sim, self.views, rng, self.feature_dim, self.feature_scale,
                            self.object_radius, self.agent_radius, self.guarantee_visibility)

    def encode_goal(self, goal, rng):
        if self.mode == 'oracle':
            return (encode_oracle(goal.goal_pos, goal.goal_code, self.feature_dim, self.feature_scale,
                                  self.object_radius),)
        return encode_goal(goal, self.views, rng, self.feature_dim, self.feature_scale,
                           self.object_radius, self.guarantee_visibility)

    def observe(self, sim, goal, rng, goal_sets=None):
        if goal_sets is None:
            goal_sets = self.encode_goal(goal, rng)
        return Observation(self.encode_state(sim, rng), goal_sets)

    def interest_codes(self, goal):
        return interest_codes(goal.goal_code, self.feature_dim, self.feature_scale)
