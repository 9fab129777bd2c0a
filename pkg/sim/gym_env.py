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

import gymnasium as gym
from gymnasium import spaces

from sim import tabletop

log = logging.getLogger('particle-push')


class TabletopEnv(gym.Env):
    """Gymnasium front end over the pure push simulator.

    Observations are goal-env dicts of flat ground-truth arrays. The current
    SimState and GoalConfig stay reachable as `state` and `goal` so callers
    can encode particle sets from them.
    """

    metadata = {'render_modes': []}

    def __init__(self, cfg, seed=None):
        self.cfg = cfg
        n, g = cfg.n_objects, (cfg.n_goals if cfg.variant == 'sorting' else cfg.n_objects)
        high = np.full(2 * (n + 1), np.inf)
        self.observation_space = spaces.Dict({
            'observation': spaces.Box(-high, high, dtype=np.float64),
            'achieved_goal': spaces.Box(-np.inf, np.inf, shape=(2 * n,), dtype=np.float64),
            'desired_goal': spaces.Box(-np.inf, np.inf, shape=(2 * g,), dtype=np.float64),
        })
        self.action_space = spaces.Box(-cfg.a_max, cfg.a_max, shape=(2,), dtype=np.float64)
        self.rng = np.random.default_rng(seed)
        self.state = None
        self.goal = None

    def _get_observation(self):
        return {
            'observation': np.concatenate([self.state.agent_pos, self.state.object_pos.ravel()]),
            'achieved_goal': self.state.object_pos.ravel().copy(),
            'desired_goal': self.goal.goal_pos.ravel().copy(),
        }

    def reset(self, seed=None, options=None):
        super().reset(seed=seed)
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.state, self.goal = tabletop.reset(self.cfg, self.rng)
        return self._get_observation(), {'state': self.state, 'goal': self.goal}

    def step(self, action):
        self.state = tabletop.step(self.state, action)
        reward = tabletop.gt_reward(self.state, self.goal, self.cfg)
        truncated = self.state.step_count >= self.cfg.horizon
        # Time limit only, there is no absorbing terminal state
        return self._get_observation(), reward, False, truncated, {'state': self.state, 'goal': self.goal}

    def compute_reward(self, achieved_goal, desired_goal, info=None):
        achieved = tabletop.GoalConfig(np.asarray(achieved_goal).reshape(-1, 2), self.state.object_code)
        desired = tabletop.GoalConfig(np.asarray(desired_goal).reshape(-1, 2), self.goal.goal_code)
        return tabletop.goal_reward(achieved, desired, self.cfg)
