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
from dataclasses import dataclass, field

from errors import EntityError


POSITION = slice(0, 2)
SCALE = slice(2, 4)
DEPTH = 4
TRANSPARENCY = 5
FEATURES_START = 6

# Entity ids carried next to the particle rows. Objects use their simulator
# index, the agent and decoys use reserved negative ids.
AGENT_ID = -1
DECOY_ID = -2


def particle_dim(feature_dim):
    return FEATURES_START + feature_dim


@dataclass(frozen=True, eq=False)
class Particle:
    """One entity descriptor: position, scale, depth, transparency, features."""
    position: np.ndarray
    scale: np.ndarray
    depth: float
    transparency: float
    features: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.position)):
            raise EntityError('particle position must be finite')
        if not np.all(np.asarray(self.scale) > 0):
            raise EntityError('particle scale must be strictly positive')
        if not 0.0 <= self.transparency <= 1.0:
            raise EntityError('particle transparency must lie in [0, 1]')

    def to_vector(self):
        return np.concatenate([self.position, self.scale, [self.depth, self.transparency], self.features])

    @classmethod
    def from_vector(cls, row):
        row = np.asarray(row, dtype=np.float64)
        return cls(row[POSITION].copy(), row[SCALE].copy(), float(row[DEPTH]),
                   float(row[TRANSPARENCY]), row[FEATURES_START:].copy())


class EntitySet:
    """Unordered set of particles seen from one view.

    Rows of `rows` are particle vectors [z_p, z_s, z_d, z_t, z_f]. Row order
    carries no meaning: equality compares the multisets of rows.
    """

    def __init__(self, rows, view_id, entity_ids=None):
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] <= FEATURES_START:
            raise EntityError('entity set rows must be (n, 6 + l), got %s' % (rows.shape,))
        if entity_ids is None:
            entity_ids = np.full(len(rows), DECOY_ID, dtype=np.int64)
        entity_ids = np.asarray(entity_ids, dtype=np.int64)
        if len(entity_ids) != len(rows):
            raise EntityError('one entity id per particle required')
        self.rows = rows
        self.view_id = int(view_id)
        self.entity_ids = entity_ids

    @classmethod
    def empty(cls, view_id, feature_dim):
        return cls(np.zeros((0, particle_dim(feature_dim))), view_id)

    @classmethod
    def from_particles(cls, particles, view_id, feature_dim, entity_ids=None):
        if not particles:
            return cls.empty(view_id, feature_dim)
        return cls(np.stack([p.to_vector() for p in particles]), view_id, entity_ids)

    @property
    def feature_dim(self):
        return self.rows.shape[1] - FEATURES_START

    @property
    def positions(self):
        return self.rows[:, POSITION]

    @property
    def features(self):
        return self.rows[:, FEATURES_START:]

    @property
    def transparency(self):
        return self.rows[:, TRANSPARENCY]

    @property
    def particles(self):
        return [Particle.from_vector(row) for row in self.rows]

    def subset(self, keep):
        keep = np.asarray(keep)
        return EntitySet(self.rows[keep], self.view_id, self.entity_ids[keep])

    def permuted(self, order):
        return self.subset(np.asarray(order, dtype=np.int64))

    def canonical(self):
        """Rows sorted lexicographically by (z_p, z_f), used for tie-breaking."""
        if len(self) == 0:
            return self
        keys = np.concatenate([self.positions, self.features], axis=1)
        order = np.lexsort(keys.T[::-1])
        return self.permuted(order)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.particles)

    def __eq__(self, other):
        if not isinstance(other, EntitySet):
            return NotImplemented
        if self.view_id != other.view_id or self.rows.shape != other.rows.shape:
            return False
        a, b = self.rows, other.rows
        return bool(np.array_equal(a[np.lexsort(a.T[::-1])], b[np.lexsort(b.T[::-1])]))

    def __repr__(self):
        return 'EntitySet(view=%d, n=%d)' % (self.view_id, len(self))


@dataclass(frozen=True, eq=False)
class Observation:
    state_sets: tuple
    goal_sets: tuple

    def __post_init__(self):
        state_views = [s.view_id for s in self.state_sets]
        goal_views = [s.view_id for s in self.goal_sets]
        expected = list(range(len(self.state_sets)))
        if state_views != expected or goal_views != expected:
            raise EntityError('one state and one goal set per view id 0..K-1 required, got %s / %s'
                              % (state_views, goal_views))

    @property
    def n_views(self):
        return len(self.state_sets)


@dataclass(frozen=True, eq=False)
class ViewConfig:
    """Emulated camera: affine map of ground-truth positions plus noise."""
    view_id: int = 0
    affine: np.ndarray = field(default_factory=lambda: np.eye(2))
    offset: np.ndarray = field(default_factory=lambda: np.zeros(2))
    jitter_sigma: float = 0.002       # scene units, keypoint noise analogue
    dropout_prob: float = 0.0
    n_decoys: int = 2
    occluded: frozenset = frozenset() # object indices always hidden in this view

    def __post_init__(self):
        affine = np.asarray(self.affine, dtype=np.float64)
        if affine.shape != (2, 2) or abs(np.linalg.det(affine)) <= 1e-6:
            raise EntityError('view %d: affine must be an invertible 2x2 matrix' % self.view_id)
        if not 0.0 <= self.dropout_prob < 1.0:
            raise EntityError('view %d: dropout_prob must lie in [0, 1)' % self.view_id)
        if self.jitter_sigma < 0 or self.n_decoys < 0:
            raise EntityError('view %d: jitter_sigma and n_decoys must be non-negative' % self.view_id)

    def project(self, positions):
        return np.asarray(positions, dtype=np.float64) @ np.asarray(self.affine).T + self.offset

    def unproject(self, positions):
        return (np.asarray(positions, dtype=np.float64) - self.offset) @ np.linalg.inv(self.affine).T
