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

from sim.geometry import sample_free_position

TASK_NAME = 'N_CUBES'
TASK_VERSION = '0.1'


def workspace(cfg):
    return np.zeros(2), np.full(2, float(cfg.table_size))


def corridor(cfg, lo, hi):
    return None


def sample_goals(cfg, lo, hi, corridor, rng, colors, min_gap=0.0):
    """One goal per colour, pairwise at least 2r (+ min_gap) apart."""
    occupied = []
    for _ in colors:
        position = sample_free_position(cfg.object_radius, lo, hi, rng, occupied, min_gap=min_gap,
                                        max_attempts=cfg.max_placement_attempts)
        occupied.append((position, cfg.object_radius))
    return np.array([c for c, _ in occupied]).reshape(len(colors), 2), list(colors)


def get_version():
    return TASK_NAME + " v" + TASK_VERSION
