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


from nets import eit, mlp_baseline
from nets.batching import make_set_batch


def init_network(cfg, rng, role='policy'):
    if cfg.kind == 'eit':
        return eit.init_eit(cfg, rng, role)
    return mlp_baseline.init_unstructured(cfg, rng, role)


def make_batch(observations, cfg):
    """Network input for a list of observations."""
    if cfg.kind == 'eit':
        return make_set_batch(observations)
    return mlp_baseline.make_flat_batch(observations, cfg)


def policy_forward(p, batch, cfg):
    if cfg.kind == 'eit':
        return eit.eit_policy(p, batch, cfg)
    return mlp_baseline.unstructured_policy(p, batch, cfg)


def q_forward(p, batch, action, cfg):
    if cfg.kind == 'eit':
        return eit.eit_q(p, batch, action, cfg)
    return mlp_baseline.unstructured_q(p, batch, action, cfg)
