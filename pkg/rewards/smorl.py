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

from errors import SetDistanceError
from entities.encoder import TRANSPARENCY_THRESHOLD, object_code
from entities.particle import POSITION, FEATURES_START

log = logging.getLogger('particle-push')

REWARD_NAME = 'SINGLE_GOAL'
REWARD_VERSION = '0.1'


def _opaque(entity_set):
    return entity_set.subset(entity_set.transparency >= TRANSPARENCY_THRESHOLD)


def select_goal_particles(goal_sets, code=None):
    """One goal particle row per view, matched across views by features.

    The reference particle is the one closest to `code` (or the first in
    canonical order) in the first non-empty view. Every view then
    contributes its particle closest to the reference features, or None when
    the view shows no goal particle.
    """
    opaque = [_opaque(s).canonical() for s in goal_sets]
    reference = None
    for entity_set in opaque:
        if len(entity_set):
            if code is None:
                reference = entity_set.rows[0]
            else:
                gaps = np.linalg.norm(entity_set.features - code, axis=1)
                reference = entity_set.rows[int(np.argmin(gaps))]
            break
    if reference is None:
        return [None] * len(goal_sets)
    selected = []
    for entity_set in opaque:
        if len(entity_set) == 0:
            selected.append(None)
            continue
        gaps = np.linalg.norm(entity_set.features - reference[FEATURES_START:], axis=1)
        selected.append(entity_set.rows[int(np.argmin(gaps))])
    return selected


def smorl_reward(obs, goal_particles, threshold, min_reward=-1.0):
    """Negative distance from each view's goal particle to its feature match."""
    total = 0.0
    for state_set, goal in zip(obs.state_sets, goal_particles):
        state_set = _opaque(state_set).canonical()
        if len(state_set) == 0:
            raise SetDistanceError('single-goal reward over an empty state set (view %d)' % state_set.view_id)
        if goal is None:
            total += min_reward
            continue
        gaps = np.linalg.norm(state_set.features - goal[FEATURES_START:], axis=1)
        best = int(np.argmin(gaps))
        if gaps[best] > threshold:
            total += min_reward
        else:
            total -= float(np.linalg.norm(state_set.positions[best] - goal[POSITION]))
    return total / len(goal_particles)


def get_reward(state, goal, obs, ctx):
    cfg = ctx.config
    code = object_code(goal.goal_code[0], ctx.encoder.feature_dim, ctx.encoder.feature_scale)
    try:
        return smorl_reward(obs, select_goal_particles(obs.goal_sets, code), cfg.match_threshold, cfg.min_reward)
    except SetDistanceError as e:
        log.debug('Module: %s - %s, substituting %.3f', REWARD_NAME, e, cfg.empty_reward)
        return cfg.empty_reward


def get_version():
    return REWARD_NAME + " v" + REWARD_VERSION
