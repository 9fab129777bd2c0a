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
import importlib
from dataclasses import dataclass

log = logging.getLogger('particle-push')


@dataclass(frozen=True, eq=False)
class RewardContext:
    """Everything a reward plug-in may need besides the transition itself."""
    config: object          # setdist.distances.RewardConfig
    task: object            # sim.tabletop.TaskConfig
    encoder: object         # entities.encoder.ObservationEncoder


def load_reward(kind):
    plugin = importlib.import_module('rewards.' + kind)
    log.debug('Reward Loaded: %s', plugin.get_version())
    return plugin


class RewardFunction:
    """Callable binding a reward plug-in to its context.

    Called as reward(achieved, desired, obs) where achieved and desired are
    GoalConfig snapshots and obs carries the encoded state and goal sets.
    Set-based rewards that cannot be computed fall back to the configured
    empty reward.
    """

    def __init__(self, context):
        self.context = context
        self.plugin = load_reward(context.config.kind)

    @property
    def kind(self):
        return self.context.config.kind

    def __call__(self, achieved, desired, obs):
        return self.plugin.get_reward(achieved, desired, obs, self.context)
