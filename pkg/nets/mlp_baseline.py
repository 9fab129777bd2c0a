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


import numpy as np
from collections import OrderedDict

from errors import EntityError
from entities.particle import particle_dim, DECOY_ID
from nets.autograd import Tensor, as_tensor, concat
from nets.layers import init_mlp, mlp, as_constants


def input_width(cfg, role='policy'):
    per_view = (1 + cfg.n_objects + cfg.n_goals) * particle_dim(cfg.feature_dim)
    return cfg.n_views * per_view + (cfg.action_dim if role == 'q' else 0)


def init_unstructured(cfg, rng, role='policy'):
    params = OrderedDict()
    out = cfg.action_dim if role == 'policy' else 1
    init_mlp(params, 'mlp', [input_width(cfg, role)] + [cfg.mlp_hidden] * (cfg.mlp_layers - 1) + [out], rng)
    return params


def _ordered(entity_set, expected, with_agent):
    keep = entity_set.entity_ids != DECOY_ID
    ids = entity_set.entity_ids[keep]
    rows = entity_set.rows[keep]
    if len(ids) != expected + (1 if with_agent else 0):
        raise EntityError('unstructured input expects %d entities in view %d, got %d'
                          % (expected, entity_set.view_id, len(ids) - (1 if with_agent else 0)))
    # Agent id sorts first, objects follow by simulator index
    return rows[np.argsort(ids, kind='stable')]


def flatten_observation(obs, cfg):
    """Concatenate particles in canonical entity order, one block per view."""
    if obs.n_views != cfg.n_views:
        raise EntityError('unstructured input expects %d views, got %d' % (cfg.n_views, obs.n_views))
    parts = []
    for state_set, goal_set in zip(obs.state_sets, obs.goal_sets):
        parts.append(_ordered(state_set, cfg.n_objects, True).ravel())
        parts.append(_ordered(goal_set, cfg.n_goals, False).ravel())
    return np.concatenate(parts)


def make_flat_batch(observations, cfg):
    return np.stack([flatten_observation(obs, cfg) for obs in observations])


def _check_width(p, flat, role, cfg):
    trained = p['mlp.0.weight'].shape[0] - (cfg.action_dim if role == 'q' else 0)
    if flat.shape[1] != trained:
        raise EntityError('input width %d does not match the trained width %d' % (flat.shape[1], trained))


def unstructured_policy(p, flat, cfg):
    _check_width(p, flat, 'policy', cfg)
    return mlp(p, 'mlp', Tensor(flat), cfg.mlp_layers).tanh() * cfg.a_max


def unstructured_q(p, flat, action, cfg):
    _check_width(p, flat, 'q', cfg)
    x = concat([Tensor(flat), as_tensor(action)], axis=1)
    return mlp(p, 'mlp', x, cfg.mlp_layers).reshape(len(flat))


def unstructured_forward(obs, params, cfg):
    """Action for a single observation from the concatenating baseline."""
    flat = flatten_observation(obs, cfg)[None, :]
    return unstructured_policy(as_constants(params), flat, cfg).value[0]
