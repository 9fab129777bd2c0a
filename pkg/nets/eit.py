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


import logging
import numpy as np
from collections import OrderedDict
from dataclasses import dataclass

from errors import AttentionError, ConfigError, DivergenceError
from entities.particle import particle_dim
from nets.autograd import Tensor, as_tensor, concat, gather_rows
from nets.layers import (init_linear, linear, init_block, block, init_mlp, mlp, as_constants)
from nets.batching import make_set_batch

log = logging.getLogger('particle-push')


@dataclass
class NetConfig:
    kind: str = 'eit'            # eit or unstructured
    embed_dim: int = 64
    n_heads: int = 8
    ff_hidden: int = 256
    head_hidden: int = 256
    head_layers: int = 3
    n_views: int = 2
    feature_dim: int = 4
    action_dim: int = 2
    a_max: float = 0.05
    use_mask: bool = True
    mlp_hidden: int = 256
    mlp_layers: int = 5
    n_objects: int = 1           # unstructured only, fixes the input width
    n_goals: int = 1

    def __post_init__(self):
        if self.kind not in ('eit', 'unstructured'):
            raise ConfigError('unknown network kind %r' % self.kind)
        if self.embed_dim % self.n_heads:
            raise ConfigError('embed_dim %d is not divisible by n_heads %d' % (self.embed_dim, self.n_heads))
        if self.head_layers < 1 or self.mlp_layers < 1:
            raise ConfigError('networks need at least one layer')


def init_eit(cfg, rng, role='policy'):
    """Parameters of a policy ('policy') or critic ('q') transformer.

    Nothing here depends on the number of entities.
    """
    params = OrderedDict()
    dim, width = cfg.embed_dim, particle_dim(cfg.feature_dim)
    init_linear(params, 'input_embed', width, dim, rng)
    params['view_embed'] = rng.normal(0.0, 0.02, size=(cfg.n_views, dim))
    if role == 'q':
        init_linear(params, 'action_embed', cfg.action_dim, width, rng)
    init_block(params, 'sa1', dim, cfg.ff_hidden, rng)
    init_block(params, 'ca', dim, cfg.ff_hidden, rng, cross=True)
    init_block(params, 'sa2', dim, cfg.ff_hidden, rng)
    init_block(params, 'agg', dim, cfg.ff_hidden, rng, cross=True)
    params['agg.query'] = rng.normal(0.0, 0.02, size=(1, 1, dim))
    out = cfg.action_dim if role == 'policy' else 1
    init_mlp(params, 'head', [dim] + [cfg.head_hidden] * (cfg.head_layers - 1) + [out], rng)
    return params


def _embed(p, rows, views):
    return linear(p, 'input_embed', Tensor(rows)) + gather_rows(p['view_embed'], views)


def eit_encode(p, batch, cfg, action=None):
    """SA -> CA(state <- goal) -> SA -> AA, returning one d-vector per observation."""
    state_mask = batch.state_mask(cfg.use_mask)
    goal_mask = batch.goal_mask(cfg.use_mask)
    if not state_mask.any(axis=1).all():
        raise AttentionError('observation without an attendable state particle')
    if not goal_mask.any(axis=1).all():
        raise AttentionError('observation without an attendable goal particle')

    size, dim = len(batch), cfg.embed_dim
    h = _embed(p, batch.state, batch.state_views)
    if action is not None:
        token = linear(p, 'input_embed', linear(p, 'action_embed', as_tensor(action)))
        h = concat([h, token.reshape(size, 1, dim)], axis=1)
        state_mask = np.concatenate([state_mask, np.ones((size, 1), dtype=bool)], axis=1)
    goal = _embed(p, batch.goal, batch.goal_views)

    h = block(p, 'sa1', h, state_mask, cfg.n_heads)
    h = block(p, 'ca', h, state_mask, cfg.n_heads, context=goal, context_mask=goal_mask)
    h = block(p, 'sa2', h, state_mask, cfg.n_heads)
    query = p['agg.query'] + np.zeros((size, 1, dim))
    z = block(p, 'agg', query, None, cfg.n_heads, context=h, context_mask=state_mask)
    return z.reshape(size, dim)


def _finite(out, what):
    if not np.all(np.isfinite(out.value)):
        raise DivergenceError('non-finite %s output' % what)
    return out


def eit_policy(p, batch, cfg):
    z = eit_encode(p, batch, cfg)
    return _finite(mlp(p, 'head', z, cfg.head_layers).tanh() * cfg.a_max, 'policy')


def eit_q(p, batch, action, cfg):
    z = eit_encode(p, batch, cfg, action=action)
    return _finite(mlp(p, 'head', z, cfg.head_layers).reshape(len(batch)), 'critic')


def eit_policy_forward(obs, params, cfg):
    """Action for a single observation."""
    return eit_policy(as_constants(params), make_set_batch([obs]), cfg).value[0]


def eit_q_forward(obs, action, params, cfg):
    action = np.asarray(action, dtype=np.float64).reshape(1, -1)
    return float(eit_q(as_constants(params), make_set_batch([obs]), action, cfg).value[0])
