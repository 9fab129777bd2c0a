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
from scipy.spatial.distance import cdist

from errors import SetDistanceError, ConfigError
from entities.particle import POSITION, FEATURES_START

DISTANCES = ('l1_pos', 'l2_pos', 'l2_feat', 'sq_l2_full')


def pairwise(kind, x, y):
    """Distance matrix between the rows of two particle arrays."""
    if kind == 'l1_pos':
        return cdist(x[:, POSITION], y[:, POSITION], 'cityblock')
    if kind == 'l2_pos':
        return cdist(x[:, POSITION], y[:, POSITION], 'euclidean')
    if kind == 'l2_feat':
        return cdist(x[:, FEATURES_START:], y[:, FEATURES_START:], 'euclidean')
    if kind == 'sq_l2_full':
        return cdist(x, y, 'sqeuclidean')
    raise SetDistanceError('unknown distance %r' % kind)


@dataclass(frozen=True)
class DistancePair:
    measure: str = 'l1_pos'     # D1
    match: str = 'l2_feat'      # D2

    def __post_init__(self):
        for kind in (self.measure, self.match):
            if kind not in DISTANCES:
                raise ConfigError('unknown distance %r, expected one of %s' % (kind, ', '.join(DISTANCES)))


@dataclass
class RewardConfig:
    kind: str = 'gt'                 # gt, chamfer or smorl
    eps: float = 1e-8
    match_threshold: float = 0.5     # C, feature space
    no_match_bonus: float = -0.2     # b
    min_reward: float = -1.0         # per-view floor of the single-goal reward
    empty_reward: float = -2.0       # substituted when every view filters to empty
    interest_threshold: float = 0.5
    measure: str = 'l1_pos'
    match: str = 'l2_feat'

    def __post_init__(self):
        if self.kind not in ('gt', 'chamfer', 'smorl'):
            raise ConfigError('unknown reward kind %r' % self.kind)
        if self.eps <= 0:
            raise ConfigError('reward eps must be positive')
        if self.no_match_bonus > 0:
            raise ConfigError('no_match_bonus must not be positive')

    @property
    def distance_pair(self):
        return DistancePair(self.measure, self.match)


def _rows(entity_set):
    if len(entity_set) == 0:
        raise SetDistanceError('set distance of an empty set (view %d)' % entity_set.view_id)
    return entity_set.canonical().rows


def _directed(measure, match, eps, weighting):
    # Partition the rows by their nearest column under the match distance.
    # np.argmin keeps the first minimum, so ties resolve in canonical order.
    nearest = np.argmin(match, axis=1)
    cost = measure[np.arange(len(nearest)), nearest]
    if weighting == 'uniform':
        return float(cost.mean())
    counts = np.bincount(nearest, minlength=match.shape[1])
    return float((cost / (counts[nearest] + eps)).sum() / np.count_nonzero(counts))


def gdac(x, y, d, eps=1e-8, weighting='density'):
    """Generalized density-aware Chamfer distance between two entity sets.

    D2 (d.match) assigns every particle to its nearest partner in the other
    set, D1 (d.measure) prices the assignment. Partners hit by several
    particles share weight 1/(count + eps).
    """
    if weighting not in ('density', 'uniform'):
        raise SetDistanceError('unknown weighting %r' % weighting)
    xr, yr = _rows(x), _rows(y)
    measure = pairwise(d.measure, xr, yr)
    match = measure if d.match == d.measure else pairwise(d.match, xr, yr)
    return _directed(measure, match, eps, weighting) + _directed(measure.T, match.T, eps, weighting)


def density_aware_chamfer(x, y, distance='sq_l2_full', eps=1e-8):
    return gdac(x, y, DistancePair(distance, distance), eps)


def standard_chamfer(x, y, distance='sq_l2_full'):
    xr, yr = _rows(x), _rows(y)
    table = pairwise(distance, xr, yr)
    return float(table.min(axis=1).mean() + table.min(axis=0).mean())


def gaussian_kl(mu_p, var_p, mu_q, var_q):
    """Pairwise KL(p || q) between diagonal Gaussians, rows of p against rows of q."""
    mu_p, var_p = mu_p[:, None, :], var_p[:, None, :]
    mu_q, var_q = mu_q[None, :, :], var_q[None, :, :]
    return 0.5 * np.sum(np.log(var_q / var_p) + (var_p + (mu_p - mu_q) ** 2) / var_q - 1.0, axis=-1)


def chamfer_kl(s1, s2):
    """Chamfer sum of closest-KL terms between two sets of diagonal Gaussians.

    Each set is a (means, variances) pair of (n, dim) arrays.
    """
    (mu1, var1), (mu2, var2) = [(np.atleast_2d(np.asarray(m, dtype=np.float64)),
                                 np.atleast_2d(np.asarray(v, dtype=np.float64))) for m, v in (s1, s2)]
    if len(mu1) == 0 or len(mu2) == 0:
        raise SetDistanceError('chamfer_kl of an empty set')
    if np.any(var1 <= 0) or np.any(var2 <= 0):
        raise SetDistanceError('chamfer_kl needs strictly positive variances')
    table = gaussian_kl(mu1, var1, mu2, var2)
    return float(table.min(axis=1).sum() + table.min(axis=0).sum())
