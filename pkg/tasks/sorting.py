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


from tasks import plain

TASK_NAME = 'SORTING'
TASK_VERSION = '0.1'


def workspace(cfg):
    return plain.workspace(cfg)


def corridor(cfg, lo, hi):
    return None


def object_colors(cfg):
    """Objects cycle through the goal colours, several objects per goal."""
    return [i % cfg.n_goals for i in range(cfg.n_objects)]


def sample_goals(cfg, lo, hi, corridor, rng, colors):
    goal_colors = sorted(set(colors))
    # Sorting circles of neighbouring goals must not touch
    return plain.sample_goals(cfg, lo, hi, corridor, rng, goal_colors,
                              min_gap=2 * cfg.sort_radius - 2 * cfg.object_radius)


def get_version():
    return TASK_NAME + " v" + TASK_VERSION
