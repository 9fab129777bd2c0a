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
from collections import OrderedDict

from errors import AttentionError
from nets.autograd import Tensor, parameter, masked_softmax


# Parameter dictionaries are plain OrderedDicts of float64 arrays keyed by
# dotted names ('sa1.attn.q.weight'). Forward passes take the same mapping
# with every array wrapped in a Tensor.

def as_parameters(params):
    return OrderedDict((name, parameter(value)) for name, value in params.items())


def as_constants(params):
    return OrderedDict((name, Tensor(value)) for name, value in params.items())


def collect_grads(leaves):
    return OrderedDict(
        (name, leaf.grad if leaf.grad is not None else np.zeros_like(leaf.value))
        for name, leaf in leaves.items())


def init_linear(params, name, fan_in, fan_out, rng):
    bound = 1.0 / np.sqrt(fan_in)
    params[name + '.weight'] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
    params[name + '.bias'] = rng.uniform(-bound, bound, size=(fan_out,))


def linear(p, name, x):
    return x @ p[name + '.weight'] + p[name + '.bias']


def init_layer_norm(params, name, dim):
    params[name + '.gain'] = np.ones(dim)
    params[name + '.offset'] = np.zeros(dim)


def layer_norm(p, name, x, eps=1e-5):
    centered = x - x.mean(axis=-1, keepdims=True)
    variance = (centered * centered).mean(axis=-1, keepdims=True)
    return centered * (variance + eps) ** -0.5 * p[name + '.gain'] + p[name + '.offset']


def init_mlp(params, name, sizes, rng):
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        init_linear(params, '%s.%d' % (name, i), fan_in, fan_out, rng)


def mlp(p, name, x, n_layers):
    for i in range(n_layers):
        x = linear(p, '%s.%d' % (name, i), x)
        if i < n_layers - 1:
            x = x.relu()
    return x


def init_attention(params, name, dim, rng):
    for proj in ('q', 'k', 'v', 'out'):
        init_linear(params, '%s.%s' % (name, proj), dim, dim, rng)


def attention(p, name, x, y, mask, n_heads):
    """Multi-head attention of queries x (B, Nq, d) over y (B, Nk, d).

    mask is a (B, Nk) boolean array, False entries of y get weight exactly 0.
    Scores are scaled by the square root of the per-head width.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any(axis=-1).all():
        raise AttentionError('attention over a set with every entity masked')

    batch, n_query, dim = x.shape
    n_key = y.shape[1]
    head_dim = dim // n_heads

    q = linear(p, name + '.q', x).reshape(batch, n_query, n_heads, head_dim).transpose(0, 2, 1, 3)
    k = linear(p, name + '.k', y).reshape(batch, n_key, n_heads, head_dim).transpose(0, 2, 3, 1)
    v = linear(p, name + '.v', y).reshape(batch, n_key, n_heads, head_dim).transpose(0, 2, 1, 3)

    scores = (q @ k) * (1.0 / np.sqrt(head_dim))
    weights = masked_softmax(scores, mask[:, None, None, :])
    z = (weights @ v).transpose(0, 2, 1, 3).reshape(batch, n_query, dim)
    return linear(p, name + '.out', z)


def init_block(params, name, dim, ff_hidden, rng, cross=False):
    init_layer_norm(params, name + '.ln_q', dim)
    if cross:
        init_layer_norm(params, name + '.ln_kv', dim)
    init_attention(params, name + '.attn', dim, rng)
    init_layer_norm(params, name + '.ln_ff', dim)
    init_linear(params, name + '.ff1', dim, ff_hidden, rng)
    init_linear(params, name + '.ff2', ff_hidden, dim, rng)


def block(p, name, x, mask, n_heads, context=None, context_mask=None):
    """Pre-norm transformer block.

    Self-attention when context is None, otherwise x attends to context.
    """
    queries = layer_norm(p, name + '.ln_q', x)
    if context is None:
        keys, key_mask = queries, mask
    else:
        keys, key_mask = layer_norm(p, name + '.ln_kv', context), context_mask
    h = x + attention(p, name + '.attn', queries, keys, key_mask, n_heads)
    ff = linear(p, name + '.ff2', linear(p, name + '.ff1', layer_norm(p, name + '.ln_ff', h)).relu())
    return h + ff


def count_parameters(params):
    return int(sum(value.size for value in params.values()))
