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

from errors import PlacementError
from sim.geometry import Corridor
from tasks import plain

TASK_NAME = 'ORDERED_PUSH'
TASK_VERSION = '0.1'


def workspace(cfg):
    return plain.workspace(cfg)


def corridor(cfg, lo, hi):
    centre = 0.5 * (lo[0] + hi[0])
    half = 0.5 * cfg.corridor_width
    return Corridor(x_lo=centre - half, x_hi=centre + half, mouth=hi[1] - cfg.corridor_depth, top=hi[1])


def sample_goals(cfg, lo, hi, corridor, rng, colors):
    """Goals stacked along the corridor, the first colour at the rear wall."""
    r = cfg.object_radius
    centre = 0.5 * (corridor.x_lo + corridor.x_hi)
    goals = np.array([[centre, corridor.top - r - 2 * r * depth] for depth in range(len(colors))])
    if len(colors) and goals[-1][1] - r < corridor.mouth:
        raise PlacementError('corridor of depth %.3f holds fewer than %d objects' % (cfg.corridor_depth, len(colors)))
    return goals.reshape(len(colors), 2), list(colors)


def get_version():
    return TASK_NAME + " v" + TASK_VERSION
