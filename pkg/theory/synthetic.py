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
from dataclasses import dataclass
from scipy.special import expit

from errors import ConfigError, EntityError, PremiseError

log = logging.getLogger('particle-push')

PHI_BOUND = 3.0
MARGIN = 0.999


@dataclass(frozen=True)
class PerturbationSpec:
    epsilon: float
    delta: float
    M: int
    k: int = None    # None: every k in [1, M-1]

    def __post_init__(self):
        if self.epsilon < 0 or self.delta < 0:
            raise ConfigError('epsilon and delta must be non-negative')
        if self.M < 1:
            raise ConfigError('M must be at least 1')
        if self.k is not None and not 1 <= self.k <= self.M - 1:
            raise ConfigError('k=%d outside [1, %d]' % (self.k, self.M - 1))

    @property
    def ks(self):
        return [self.k] if self.k is not None else list(range(1, self.M))


def aggregate(alpha, values):
    """Mean over i of the alpha-normalized sum of values.

    alpha is (T, N, N) with alpha[t, i, j] the weight s_i gives s_j,
    values is (T, N). Returns (T,).
    """
    weights = alpha / alpha.sum(axis=-1, keepdims=True)
    return (weights * values[:, None, :]).sum(axis=-1).mean(axis=-1)


def normalized(alpha):
    return alpha / alpha.sum(axis=-1, keepdims=True)


def _pairs(states, actions):
    t, n, d = states.shape
    si = np.broadcast_to(states[:, :, None, :], (t, n, n, d))
    sj = np.broadcast_to(states[:, None, :, :], (t, n, n, d))
    a = np.broadcast_to(actions[:, None, None, :], (t, n, n, actions.shape[-1]))
    return np.concatenate([si, sj, a], axis=-1)


def _singles(states, actions):
    t, n, _ = states.shape
    a = np.broadcast_to(actions[:, None, :], (t, n, actions.shape[-1]))
    return np.concatenate([states, a], axis=-1)


class SyntheticQSpec:
    """Random self-attention Q function on the unit hypercube.

    alpha(s_i, s_j, a) = exp(w . phi) with phi a two-layer tanh map bounded
    by PHI_BOUND and |w|_1 = 1, so alpha lies in [e^-3, e^3].
    v(s, a) = V * sigmoid(.) with V = 1 / (1 - gamma).
    With lam set, sampled tuples have pairwise |v_i - v_j| >= lam and
    pairwise L1 state distance >= separation.
    """

    def __init__(self, params, gamma, state_dim, action_dim, lam=None, separation=0.0, max_attempts=4096):
        if not 0 < gamma < 1:
            raise ConfigError('gamma must be in (0, 1)')
        if lam is not None and lam <= 0:
            raise ConfigError('lambda must be positive')
        self.params = params
        self.gamma = gamma
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.lam = lam
        self.separation = separation
        self.max_attempts = max_attempts

    @classmethod
    def random(cls, rng, state_dim=3, action_dim=2, gamma=0.9, hidden=16, phi_dim=8, value_gain=2.0,
               lam=None, separation=0.0):
        pair_in, single_in = 2 * state_dim + action_dim, state_dim + action_dim
        w = rng.normal(size=phi_dim)
        params = {
            'attn_w1': rng.normal(scale=1.0 / np.sqrt(pair_in), size=(pair_in, hidden)),
            'attn_b1': rng.normal(scale=0.1, size=hidden),
            'attn_w2': rng.normal(scale=1.0 / np.sqrt(hidden), size=(hidden, phi_dim)),
            'attn_b2': rng.normal(scale=0.1, size=phi_dim),
            'attn_w': w / np.abs(w).sum(),
            'value_w1': rng.normal(scale=2.0 / np.sqrt(single_in), size=(single_in, hidden)),
            'value_b1': rng.normal(scale=0.1, size=hidden),
            'value_w2': rng.normal(scale=value_gain, size=hidden),
            'value_b2': float(rng.normal(scale=0.1)),
        }
        return cls(params, gamma, state_dim, action_dim, lam=lam, separation=separation)

    @property
    def v_max(self):
        return 1.0 / (1.0 - self.gamma)

    def alpha(self, states, actions):
        p = self.params
        hidden = np.tanh(_pairs(states, actions) @ p['attn_w1'] + p['attn_b1'])
        phi = PHI_BOUND * np.tanh(hidden @ p['attn_w2'] + p['attn_b2'])
        return np.exp(phi @ p['attn_w'])

    def value(self, states, actions):
        p = self.params
        hidden = np.tanh(_singles(states, actions) @ p['value_w1'] + p['value_b1'])
        return self.v_max * expit(hidden @ p['value_w2'] + p['value_b2'])

    def sample_free(self, n, rng, batch=1):
        return (rng.uniform(size=(batch, n, self.state_dim)),
                rng.uniform(-1.0, 1.0, size=(batch, self.action_dim)))

    def sample(self, n, rng, batch=1):
        """Draw `batch` tuples of n states plus one action each."""
        if self.lam is None and self.separation <= 0:
            return self.sample_free(n, rng, batch)
        actions = rng.uniform(-1.0, 1.0, size=(batch, self.action_dim))
        states = np.stack([self._separated(n, actions[t], rng) for t in range(batch)])
        return states, actions

    def _separated(self, n, action, rng):
        lam = self.lam or 0.0
        chosen, values = [], []
        drawn = 0
        while len(chosen) < n:
            if drawn >= self.max_attempts:
                raise PremiseError('could not place %d separated states (lambda=%s, C=%s) in %d draws'
                                   % (n, self.lam, self.separation, drawn))
            candidates = rng.uniform(size=(64, self.state_dim))
            cand_values = self.value(candidates[None], action[None])[0]
            drawn += len(candidates)
            for state, v in zip(candidates, cand_values):
                if any(np.abs(state - s).sum() < self.separation for s in chosen):
                    continue
                if any(abs(v - u) < lam for u in values):
                    continue
                chosen.append(state)
                values.append(v)
                if len(chosen) == n:
                    break
        return np.array(chosen)


class FixedQSpec:
    """Hand-specified instance: a state is an index into `values`.

    alpha defaults to 1 everywhere; otherwise weights[i, j] for the pair
    of indices.
    """

    state_dim = 1
    action_dim = 1
    lam = None

    def __init__(self, values, weights=None, gamma=0.9):
        self.values = np.asarray(values, dtype=np.float64)
        self.weights = None if weights is None else np.asarray(weights, dtype=np.float64)
        self.gamma = gamma
        if np.any(self.values < 0) or np.any(self.values > self.v_max):
            raise ConfigError('values must lie in [0, 1/(1-gamma)]')
        if self.weights is not None and np.any(self.weights <= 0):
            raise ConfigError('attention weights must be positive')

    @property
    def v_max(self):
        return 1.0 / (1.0 - self.gamma)

    def _index(self, states):
        return states[..., 0].astype(int)

    def alpha(self, states, actions):
        idx = self._index(states)
        if self.weights is None:
            return np.ones(idx.shape + idx.shape[-1:])
        return self.weights[idx[:, :, None], idx[:, None, :]]

    def value(self, states, actions):
        return self.values[self._index(states)]

    def sample(self, n, rng, batch=1):
        idx = np.stack([rng.permutation(len(self.values))[:n] if n <= len(self.values)
                        else rng.integers(len(self.values), size=n) for _ in range(batch)])
        return idx[..., None].astype(np.float64), np.zeros((batch, 1))

    sample_free = sample

    def states(self, indices):
        """Single tuple of states for the given value indices."""
        return np.asarray(indices, dtype=np.float64)[:, None]


def q_star_eval(spec, states, action):
    """Q*(s_1..s_N, a) for one tuple. states is (N, d)."""
    states = np.asarray(states, dtype=np.float64)
    if states.ndim != 2 or len(states) < 1:
        raise EntityError('q_star_eval needs a (N, d) array with at least one state')
    return float(q_star_batch(spec, states[None], np.asarray(action, dtype=np.float64).reshape(1, -1))[0])


def q_star_batch(spec, states, actions):
    return aggregate(spec.alpha(states, actions), spec.value(states, actions))


class PerturbedQ:
    """Q-hat with the same structure as its spec.

    v-hat = clip(v* + eps_v * tanh(smooth map), 0, V), so |v-hat - v*| < eps_v.
    alpha-hat = alpha* * exp(eta) with |eta| <= rho, so every normalized
    weight moves by at most a factor e^(2 rho). The fault variant tilts
    eta toward high-value states with amplitude fault_rho.
    """

    def __init__(self, spec, eps_v, rho, rng, fault=False, fault_rho=3.0):
        self.spec = spec
        self.eps_v = eps_v
        self.rho = rho
        self.fault = fault
        self.fault_rho = fault_rho
        self.certificate = {'checked': False}
        d, a = spec.state_dim, spec.action_dim
        self.noise_v = rng.normal(scale=2.0, size=d + a)
        self.noise_v_bias = float(rng.normal())
        self.noise_eta = rng.normal(scale=2.0, size=2 * d + a)
        self.noise_eta_bias = float(rng.normal())

    def value(self, states, actions):
        shift = np.tanh(_singles(states, actions) @ self.noise_v + self.noise_v_bias)
        v = self.spec.value(states, actions) + MARGIN * self.eps_v * shift
        return np.clip(v, 0.0, self.spec.v_max)

    def eta(self, states, actions):
        if self.fault:
            v = self.spec.value(states, actions) * (1.0 - self.spec.gamma)
            return self.fault_rho * np.tanh(4.0 * (v[:, None, :] - 0.5))
        return self.rho * np.tanh(_pairs(states, actions) @ self.noise_eta + self.noise_eta_bias)

    def alpha(self, states, actions):
        return self.spec.alpha(states, actions) * np.exp(self.eta(states, actions))

    def batch(self, states, actions):
        return aggregate(self.alpha(states, actions), self.value(states, actions))

    def __call__(self, states, action):
        states = np.asarray(states, dtype=np.float64)
        return float(self.batch(states[None], np.asarray(action, dtype=np.float64).reshape(1, -1))[0])


def premise_check(spec, q_hat, M, samples, rng):
    """Sampled worst-case premise deviations over tuples of 1..M states."""
    per_n = max(1, samples // M)
    max_q, max_w = 0.0, 0.0
    for n in range(1, M + 1):
        # The premise is quantified over every state tuple, separated or not.
        states, actions = spec.sample_free(n, rng, per_n)
        max_q = max(max_q, float(np.abs(q_hat.batch(states, actions) - q_star_batch(spec, states, actions)).max()))
        deviation = normalized(q_hat.alpha(states, actions)) - normalized(spec.alpha(states, actions))
        max_w = max(max_w, float(np.abs(deviation).max()))
    return {'checked': True, 'samples': per_n * M, 'max_q_deviation': max_q, 'max_weight_deviation': max_w}


def weight_target(pert, mode, lam=None):
    """Largest normalized-weight deviation a Q-hat may show under the mode's premise.

    theorem1 takes delta as given. theorem3 has no weight premise of its own: a lam-separated value
    function that is epsilon-close already keeps weights within 4 epsilon / lam.
    """
    if mode == 'theorem1':
        return pert.delta
    if mode == 'theorem3':
        if lam is None or lam <= 0:
            raise ConfigError('theorem3 mode needs a positive lambda')
        return 4.0 * pert.epsilon / lam
    raise ConfigError('unknown certification mode %r' % mode)


def q_hat_build(spec, pert, rng, mode='theorem1', lam=None, samples=10000, max_attempts=8,
                fault=False, fault_rho=3.0):
    """Build a premise-satisfying Q-hat for spec under pert.

    Half of epsilon goes to the value perturbation and half to the attention
    perturbation. The first attempt uses the widest attention perturbation the
    weight target allows; rho is halved after every failed sampled premise check,
    down to the rho the epsilon split guarantees and then below it for
    max_attempts more tries. PremiseError when all of them fail. Fault mode skips
    the check.
    """
    V = spec.v_max
    target = weight_target(pert, mode, lam)
    eps_v = pert.epsilon / 2.0
    rho_wide = MARGIN * 0.5 * np.log1p(target)
    rho_safe = min(rho_wide, MARGIN * 0.5 * np.log1p(pert.epsilon / (2.0 * pert.M * V)))
    widen = int(np.ceil(np.log2(rho_wide / rho_safe))) if rho_safe > 0 else 0
    rho = rho_wide if widen else rho_safe

    if fault:
        q_hat = PerturbedQ(spec, eps_v, rho_safe, rng, fault=True, fault_rho=fault_rho)
        q_hat.certificate = {'checked': False, 'fault_rho': fault_rho}
        return q_hat

    for attempt in range(1, max_attempts + widen + 1):
        q_hat = PerturbedQ(spec, eps_v, rho, rng)
        certificate = premise_check(spec, q_hat, pert.M, samples, rng)
        if certificate['max_q_deviation'] <= pert.epsilon and certificate['max_weight_deviation'] <= target:
            certificate.update({'attempts': attempt, 'rho': rho})
            q_hat.certificate = certificate
            return q_hat
        log.debug('Premise check failed (attempt %d, rho %.3g): q dev %.3g, weight dev %.3g', attempt, rho,
                  certificate['max_q_deviation'], certificate['max_weight_deviation'])
        rho = max(rho / 2.0, rho_safe) if rho > rho_safe else rho / 2.0
    raise PremiseError('premise (epsilon=%g, weight deviation %g) not met after %d attempts'
                       % (pert.epsilon, target, max_attempts + widen))


class CounterexampleQ:
    """Truncated structure: only the two lowest-value states enter each sum,
    still normalized by the full alpha sum."""

    def __init__(self, spec):
        self.spec = spec

    def batch(self, states, actions):
        alpha = self.spec.alpha(states, actions)
        values = self.spec.value(states, actions)
        order = np.argsort(values, axis=-1, kind='stable')
        keep = np.zeros_like(values, dtype=bool)
        np.put_along_axis(keep, order[:, :min(2, values.shape[-1])], True, axis=-1)
        weights = normalized(alpha)
        return (weights * np.where(keep, values, 0.0)[:, None, :]).sum(axis=-1).mean(axis=-1)

    def __call__(self, states, action):
        states = np.asarray(states, dtype=np.float64)
        return float(self.batch(states[None], np.asarray(action, dtype=np.float64).reshape(1, -1))[0])


def counterexample_q(spec):
    return CounterexampleQ(spec)


def counterexample_tail(spec, states, actions):
    """Closed-form Q* - Q-hat: weighted values beyond the two smallest."""
    values = spec.value(states, actions)
    order = np.argsort(values, axis=-1, kind='stable')
    tail = np.ones_like(values, dtype=bool)
    np.put_along_axis(tail, order[:, :min(2, values.shape[-1])], False, axis=-1)
    weights = normalized(spec.alpha(states, actions))
    return (weights * np.where(tail, values, 0.0)[:, None, :]).sum(axis=-1).mean(axis=-1)
