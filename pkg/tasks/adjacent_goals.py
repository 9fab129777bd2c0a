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
from tasks import plain

TASK_NAME = 'ADJACENT_GOALS'
TASK_VERSION = '0.1'


def workspace(cfg):
    return plain.workspace(cfg)


def corridor(cfg, lo, hi):
    return None


def _ring_point(anchor, rng, near, far):
    angle = rng.uniform(0.0, 2 * np.pi)
    return anchor + rng.uniform(near, far) * np.array([np.cos(angle), np.sin(angle)])


def _touching_both(a, b, rng, near, far):
    # Intersection of two circles around a and b with radii drawn from the ring
    d1, d2 = rng.uniform(near, far, size=2)
    base = np.linalg.norm(b - a)
    along = (d1 ** 2 - d2 ** 2 + base ** 2) / (2 * base)
    across = np.sqrt(max(d1 ** 2 - along ** 2, 0.0))
    unit = (b - a) / base
    normal = np.array([-unit[1], unit[0]])
    side = 1.0 if rng.random() < 0.5 else -1.0
    return a + along * unit + side * across * normal


def sample_goals(cfg, lo, hi, corridor, rng, colors):
    """Goals packed into one cluster, neighbours 2r to 2r + gap apart.

    Up to three goals are mutually adjacent, later goals touch a random
    earlier one.
    """
    r = cfg.object_radius
    near, far = 2 * r, 2 * r + cfg.adjacent_gap
    for _ in range(cfg.max_placement_attempts):
        goals = [rng.uniform(lo + r, hi - r)]
        for _ in colors[1:]:
            if len(goals) == 2:
                candidate = _touching_both(goals[0], goals[1], rng, near, far)
            else:
                candidate = _ring_point(goals[rng.integers(len(goals))], rng, near, far)
            inside = np.all(candidate >= lo + r) and np.all(candidate <= hi - r)
            clear = all(np.linalg.norm(candidate - g) >= near - 1e-12 for g in goals)
            if not (inside and clear):
                break
            goals.append(candidate)
        if len(goals) == len(colors):
            return np.array(goals).reshape(len(colors), 2), list(colors)
    raise PlacementError('adjacent goal cluster for %d objects not placed after %d attempts'
                         % (len(colors), cfg.max_placement_attempts))


def get_version():
    return TASK_NAME + " v" + TASK_VERSION
