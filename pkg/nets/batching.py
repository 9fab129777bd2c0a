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
from dataclasses import dataclass

from entities.particle import TRANSPARENCY


@dataclass(frozen=True, eq=False)
class SetBatch:
    """Padded particle tensors for a batch of observations.

    All views of an observation are merged into one state set and one goal
    set; `*_views` keeps the view id of every slot. Padding slots have
    valid=False, decoys and other faint particles have opaque=False.
    """
    state: np.ndarray
    state_valid: np.ndarray
    state_opaque: np.ndarray
    state_views: np.ndarray
    goal: np.ndarray
    goal_valid: np.ndarray
    goal_opaque: np.ndarray
    goal_views: np.ndarray

    def __len__(self):
        return len(self.state)

    def state_mask(self, use_mask=True):
        return self.state_valid & self.state_opaque if use_mask else self.state_valid.copy()

    def goal_mask(self, use_mask=True):
        return self.goal_valid & self.goal_opaque if use_mask else self.goal_valid.copy()


def _pad(groups, width, dim):
    batch = len(groups)
    rows = np.zeros((batch, width, dim))
    valid = np.zeros((batch, width), dtype=bool)
    views = np.zeros((batch, width), dtype=np.int64)
    for b, sets in enumerate(groups):
        offset = 0
        for entity_set in sets:
            n = len(entity_set)
            rows[b, offset:offset + n] = entity_set.rows
            valid[b, offset:offset + n] = True
            views[b, offset:offset + n] = entity_set.view_id
            offset += n
    opaque = rows[:, :, TRANSPARENCY] >= 0.5
    return rows, valid, opaque, views


def make_set_batch(observations, pad_to=(0, 0)):
    """Collate observations; pad_to forces a minimum (state, goal) width."""
    state_groups = [obs.state_sets for obs in observations]
    goal_groups = [obs.goal_sets for obs in observations]
    dim = observations[0].state_sets[0].rows.shape[1]
    state_width = max([pad_to[0]] + [sum(len(s) for s in sets) for sets in state_groups])
    goal_width = max([pad_to[1]] + [sum(len(s) for s in sets) for sets in goal_groups])
    state = _pad(state_groups, max(state_width, 1), dim)
    goal = _pad(goal_groups, max(goal_width, 1), dim)
    return SetBatch(*state, *goal)
