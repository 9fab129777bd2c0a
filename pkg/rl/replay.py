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
from dataclasses import dataclass, replace

from entities.particle import Observation


@dataclass(frozen=True, eq=False)
class Transition:
    obs: Observation
    action: np.ndarray
    next_obs: Observation
    achieved_goal: object     # GoalConfig of the objects after the step
    desired_goal: object
    reward: float
    t: int
    done_by_horizon: bool = False


class Relabeler:
    """Swaps the goal of a transition, re-encoding it and recomputing the reward."""

    def __init__(self, encoder, reward_fn):
        self.encoder = encoder
        self.reward_fn = reward_fn

    def __call__(self, transition, goal, rng):
        goal_sets = self.encoder.encode_goal(goal, rng)
        obs = Observation(transition.obs.state_sets, goal_sets)
        next_obs = Observation(transition.next_obs.state_sets, goal_sets)
        reward = float(self.reward_fn(transition.achieved_goal, goal, next_obs))
        return replace(transition, obs=obs, next_obs=next_obs, desired_goal=goal, reward=reward)


def her_relabel(episode, ratio, rng, relabeler):
    """Hindsight relabeling with the 'future' strategy.

    Each transition is relabeled with probability `ratio`, using the achieved
    goal of a uniformly drawn step at or after it.
    """
    relabeled = []
    for index, transition in enumerate(episode):
        if rng.random() < ratio:
            future = int(rng.integers(index, len(episode)))
            transition = relabeler(transition, episode[future].achieved_goal, rng)
        relabeled.append(transition)
    return relabeled


class ReplayBuffer:
    """FIFO transition store that keeps each episode's achieved goals for HER."""

    def __init__(self, capacity):
        self.capacity = int(capacity)
        self._items = []
        self._next = 0

    def __len__(self):
        return len(self._items)

    def add_episode(self, episode):
        goals = tuple(t.achieved_goal for t in episode)
        for index, transition in enumerate(episode):
            self._put((transition, goals, index))

    def _put(self, item):
        if len(self._items) < self.capacity:
            self._items.append(item)
        else:
            self._items[self._next] = item
            self._next = (self._next + 1) % self.capacity

    def transitions(self):
        return [item[0] for item in self._items]

    def sample(self, batch_size, rng, her_ratio=0.0, relabeler=None):
        picks = rng.integers(0, len(self._items), size=batch_size)
        batch = []
        for pick in picks:
            transition, goals, index = self._items[pick]
            if relabeler is not None and rng.random() < her_ratio:
                future = int(rng.integers(index, len(goals)))
                transition = relabeler(transition, goals[future], rng)
            batch.append(transition)
        return batch
