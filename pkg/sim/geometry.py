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

from errors import PlacementError


@dataclass(frozen=True)
class Corridor:
    """Dead-end corridor opening downwards at y = mouth and closed at y = top.

    The table above the mouth outside [x_lo, x_hi] is solid wall.
    """
    x_lo: float
    x_hi: float
    mouth: float
    top: float

    def walls(self, lo, hi):
        return ((np.array([lo[0], self.mouth]), np.array([self.x_lo, hi[1]])),
                (np.array([self.x_hi, self.mouth]), np.array([hi[0], hi[1]])))

    def contains(self, point):
        return self.x_lo <= point[0] <= self.x_hi and self.mouth <= point[1] <= self.top

    def depth_past_mouth(self, point):
        return float(point[1] - self.mouth)


def push_out_of_rect(center, radius, rect_lo, rect_hi, tol=1e-9):
    """Move a disc out of an axis-aligned rectangle by the minimal translation."""
    closest = np.clip(center, rect_lo, rect_hi)
    offset = center - closest
    dist = float(np.hypot(offset[0], offset[1]))
    if dist >= radius - tol and dist > 0:
        return center
    if dist > 0:
        return closest + offset / dist * radius
    # Centre inside the rectangle: leave through the nearest face
    exits = np.array([center[0] - rect_lo[0], rect_hi[0] - center[0],
                      center[1] - rect_lo[1], rect_hi[1] - center[1]])
    face = int(np.argmin(exits))
    moved = center.copy()
    if face == 0:
        moved[0] = rect_lo[0] - radius
    elif face == 1:
        moved[0] = rect_hi[0] + radius
    elif face == 2:
        moved[1] = rect_lo[1] - radius
    else:
        moved[1] = rect_hi[1] + radius
    return moved


def overlaps_rect(center, radius, rect_lo, rect_hi, margin=0.0):
    closest = np.clip(center, rect_lo, rect_hi)
    return float(np.hypot(*(center - closest))) < radius + margin


def sample_free_position(radius, lo, hi, rng, occupied=(), walls=(), min_gap=0.0, max_attempts=1000,
                         region=None):
    """Rejection-sample a disc centre clear of occupied discs and walls.

    occupied holds (centre, radius) pairs. region optionally narrows the
    sampling box to (lo, hi).
    """
    box_lo, box_hi = (lo, hi) if region is None else region
    for _ in range(max_attempts):
        candidate = rng.uniform(box_lo + radius, box_hi - radius)
        if any(np.hypot(*(candidate - c)) < radius + r + min_gap for c, r in occupied):
            continue
        if any(overlaps_rect(candidate, radius, w_lo, w_hi, min_gap) for w_lo, w_hi in walls):
            continue
        return candidate
    raise PlacementError('no free placement for a disc of radius %.3f after %d attempts'
                         % (radius, max_attempts))
