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
from entities.encoder import filter_of_interest
from setdist.distances import gdac, pairwise

log = logging.getLogger('particle-push')

REWARD_NAME = 'CHAMFER'
REWARD_VERSION = '0.1'


def count_unmatched(state_set, goal_set, match, threshold):
    """Particles of either set whose best match in the other set is farther than threshold."""
    if len(state_set) == 0 or len(goal_set) == 0:
        return len(state_set) + len(goal_set)
    table = pairwise(match, state_set.rows, goal_set.rows)
    return int(np.count_nonzero(table.min(axis=1) > threshold) + np.count_nonzero(table.min(axis=0) > threshold))


def chamfer_reward(obs, cfg, d, codes):
    """Negative view-averaged GDAC between filtered state and goal sets.

    Views whose filtered state or goal set is empty drop out of the average.
    Every particle without a match within C adds the no-match bonus b.
    """
    total, views, unmatched = 0.0, 0, 0
    for state_set, goal_set in zip(obs.state_sets, obs.goal_sets):
        state_set = filter_of_interest(state_set, codes, cfg.interest_threshold)
        goal_set = filter_of_interest(goal_set, codes, cfg.interest_threshold)
        unmatched += count_unmatched(state_set, goal_set, d.match, cfg.match_threshold)
        if len(state_set) == 0 or len(goal_set) == 0:
            continue
        total += gdac(state_set, goal_set, d, cfg.eps)
        views += 1
    if views == 0:
        raise SetDistanceError('every view is empty after filtering')
    return -total / views + cfg.no_match_bonus * unmatched


def get_reward(state, goal, obs, ctx):
    cfg = ctx.config
    try:
        return chamfer_reward(obs, cfg, cfg.distance_pair, ctx.encoder.interest_codes(goal))
    except SetDistanceError as e:
        log.debug('Module: %s - %s, substituting %.3f', REWARD_NAME, e, cfg.empty_reward)
        return cfg.empty_reward


def get_version():
    return REWARD_NAME + " v" + REWARD_VERSION
