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

from tasks import plain

TASK_NAME = 'SMALL_TABLE'
TASK_VERSION = '0.1'


def workspace(cfg):
    side = cfg.table_size * cfg.small_table_scale
    lo = np.full(2, 0.5 * (cfg.table_size - side))
    return lo, lo + side


def corridor(cfg, lo, hi):
    return None


def sample_goals(cfg, lo, hi, corridor, rng, colors):
    return plain.sample_goals(cfg, lo, hi, corridor, rng, colors)


def get_version():
    return TASK_NAME + " v" + TASK_VERSION
