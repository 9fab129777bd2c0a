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


import time
import logging
import numpy as np
from dataclasses import dataclass, field

from errors import ConfigError, PremiseError
from theory.synthetic import (PerturbationSpec, SyntheticQSpec, q_hat_build, q_star_batch,
                              counterexample_q, counterexample_tail)

log = logging.getLogger('particle-push')

KEY_FIELDS = ('theorem', 'M', 'k', 'N', 'epsilon', 'delta', 'lambda', 'gamma')
MAX_FIELDS = ('max_measured', 'premise_q_deviation', 'premise_weight_deviation', 'premise_deviation',
              'tail_residual')
MIN_FIELDS = ('min_measured',)
SUM_FIELDS = ('trials', 'violations')
EXACT_TOL = 1e-12


@dataclass
class TheoryConfig:
    M_values: list = field(default_factory=lambda: [2, 3, 4])
    gammas: list = field(default_factory=lambda: [0.9, 0.98])
    epsilon: float = 0.05
    delta: float = 0.001
    lam: float = 0.2                 # object-distinguishing gap of v*
    separation: float = 0.1          # L1 state separation C, independent of lam
    n_specs: int = 200               # random specs per (M, gamma)
    trials: int = 50                 # tuples per spec and k
    premise_samples: int = 10000
    max_attempts: int = 8
    state_dim: int = 3
    action_dim: int = 2
    deepsets_n_max: int = 8
    deepsets_specs: int = 1000
    deepsets_trials: int = 50
    counterexample_n_max: int = 6
    counterexample_specs: int = 1000
    lemma_trials: int = 1000
    fault: bool = False
    fault_rho: float = 3.0

    def __post_init__(self):
        if any(m < 2 for m in self.M_values):
            raise ConfigError('every M must be at least 2 so that k in [1, M-1] exists')
        if any(not 0 < g < 1 for g in self.gammas):
            raise ConfigError('gammas must lie in (0, 1)')
        if self.epsilon <= 0 or self.delta < 0:
            raise ConfigError('epsilon must be positive and delta non-negative')
        if self.lam <= 0:
            raise ConfigError('lam must be positive')
        for name in ('n_specs', 'trials', 'premise_samples', 'deepsets_specs', 'deepsets_trials',
                     'counterexample_specs', 'lemma_trials'):
            if getattr(self, name) < 1:
                raise ConfigError('%s must be at least 1' % name)


def theorem1_bound(eps, delta, M, k, gamma):
    if not 0 < gamma < 1:
        raise ConfigError('gamma must be in (0, 1)')
    return 3.0 * eps + (3.0 * (M + k) + 2.0) / (1.0 - gamma) * delta


def theorem3_bound(eps, lam, M, k, gamma):
    if lam <= 0:
        raise ConfigError('lambda must be positive')
    if not 0 < gamma < 1:
        raise ConfigError('gamma must be in (0, 1)')
    scale = lam * (1.0 - gamma)
    return (12.0 * (M + k) / scale + 8.0 / scale + 3.0) * eps


def certify_theorem1(spec, pert, trials, rng, mode='theorem1', lam=None, q_hat=None, samples=10000,
                     max_attempts=8, fault=False, fault_rho=3.0):
    """Measure |Q-hat - Q*| on `trials` random tuples of M+k states per k.

    mode 'theorem3' certifies the epsilon-only bound on a lam-separated
    spec. Returns one report row per k.
    """
    if q_hat is None:
        q_hat = q_hat_build(spec, pert, rng, mode=mode, lam=lam, samples=samples, max_attempts=max_attempts,
                            fault=fault, fault_rho=fault_rho)
    certificate = q_hat.certificate
    rows = []
    for k in pert.ks:
        states, actions = spec.sample(pert.M + k, rng, trials)
        errors = np.abs(q_hat.batch(states, actions) - q_star_batch(spec, states, actions))
        row = {'theorem': mode, 'M': pert.M, 'k': k, 'epsilon': pert.epsilon, 'gamma': spec.gamma}
        if mode == 'theorem1':
            row['delta'] = pert.delta
            bound = theorem1_bound(pert.epsilon, pert.delta, pert.M, k, spec.gamma)
        else:
            row['lambda'] = lam
            bound = theorem3_bound(pert.epsilon, lam, pert.M, k, spec.gamma)
        row.update({'bound': bound, 'max_measured': float(errors.max()), 'trials': int(trials),
                    'violations': int(np.count_nonzero(errors > bound)),
                    'premise_q_deviation': certificate.get('max_q_deviation'),
                    'premise_weight_deviation': certificate.get('max_weight_deviation')})
        rows.append(row)
    return rows


def _merge_value(name, a, b):
    if name in SUM_FIELDS:
        return a + b
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b) if name in MIN_FIELDS else max(a, b)


def merge_reports(*reports):
    """Merge report row lists. Rows sharing key fields combine: max of the
    measured maxima (minima for min_measured), sum of trials and violations."""
    merged = {}
    for report in reports:
        for row in report:
            key = tuple(row.get(name) for name in KEY_FIELDS)
            if key not in merged:
                merged[key] = dict(row)
                continue
            target = merged[key]
            for name in MAX_FIELDS + MIN_FIELDS + SUM_FIELDS:
                if name in row:
                    target[name] = _merge_value(name, target.get(name), row[name])
    return list(merged.values())


def total_violations(report):
    return sum(row.get('violations', 0) for row in report)


def theorem_sweep(cfg, rng, mode='theorem1'):
    """certify_theorem1 over n_specs random specs for every (M, gamma)."""
    report = []
    for gamma in cfg.gammas:
        for M in cfg.M_values:
            start_time = time.time()
            pert = PerturbationSpec(cfg.epsilon, cfg.delta, M)
            for _ in range(cfg.n_specs):
                spec = SyntheticQSpec.random(rng, cfg.state_dim, cfg.action_dim, gamma,
                                             lam=cfg.lam if mode == 'theorem3' else None,
                                             separation=cfg.separation if mode == 'theorem3' else 0.0)
                rows = certify_theorem1(spec, pert, cfg.trials, rng, mode=mode,
                                        lam=cfg.lam if mode == 'theorem3' else None,
                                        samples=cfg.premise_samples, max_attempts=cfg.max_attempts,
                                        fault=cfg.fault, fault_rho=cfg.fault_rho)
                report = merge_reports(report, rows)
            log.debug('Certified %s for M=%d, gamma=%.2f over %d specs (%.2f s)', mode, M, gamma, cfg.n_specs,
                      time.time() - start_time)
    return report


def deepsets_check(v_star, v_hat, eps, n_max, trials, rng, sampler=None, state_dim=3, action_dim=2):
    """|mean v-hat - mean v*| against eps for set sizes 1..n_max.

    v_star and v_hat map (states (T, N, d), actions (T, A)) to (T, N).
    Raises PremiseError when v-hat is not eps-close on sampled singletons.
    """
    if sampler is None:
        def sampler(n, batch):
            return rng.uniform(size=(batch, n, state_dim)), rng.uniform(-1.0, 1.0, size=(batch, action_dim))

    states, actions = sampler(1, trials)
    premise = float(np.abs(v_hat(states, actions) - v_star(states, actions)).max())
    if premise > eps:
        raise PremiseError('value deviation %.4g exceeds epsilon %.4g on singletons' % (premise, eps))

    rows = []
    for n in range(1, n_max + 1):
        states, actions = sampler(n, trials)
        errors = np.abs(v_hat(states, actions).mean(axis=-1) - v_star(states, actions).mean(axis=-1))
        rows.append({'theorem': 'deepsets', 'N': n, 'epsilon': eps, 'bound': eps,
                     'max_measured': float(errors.max()), 'trials': int(trials),
                     'violations': int(np.count_nonzero(errors > eps)), 'premise_deviation': premise})
    return rows


def deepsets_sweep(cfg, rng):
    report = []
    pert = PerturbationSpec(cfg.epsilon, 0.0, 1)
    for _ in range(cfg.deepsets_specs):
        spec = SyntheticQSpec.random(rng, cfg.state_dim, cfg.action_dim, cfg.gammas[0])
        q_hat = q_hat_build(spec, pert, rng, samples=cfg.deepsets_trials, max_attempts=cfg.max_attempts)
        rows = deepsets_check(spec.value, q_hat.value, cfg.epsilon, cfg.deepsets_n_max, cfg.deepsets_trials,
                              rng, sampler=lambda n, batch: spec.sample_free(n, rng, batch))
        report = merge_reports(report, rows)
    return report


def counterexample_rows(spec, n_max, trials, rng):
    """Error of the truncated structure per N, cross-checked against the
    closed-form tail. N <= 2 must be exact; N >= 3 must be strictly wrong
    whenever some v* in the tuple is positive beyond the two smallest."""
    q_hat = counterexample_q(spec)
    rows = []
    for n in range(1, n_max + 1):
        states, actions = spec.sample(n, rng, trials)
        errors = np.abs(q_star_batch(spec, states, actions) - q_hat.batch(states, actions))
        residual = float(np.abs(errors - counterexample_tail(spec, states, actions)).max())
        if n <= 2:
            failed = errors >= EXACT_TOL
        else:
            values = np.sort(spec.value(states, actions), axis=-1)
            failed = (values[:, 2:].max(axis=-1) > 0) & (errors <= 0)
        failed = failed | (residual > EXACT_TOL)
        rows.append({'theorem': 'counterexample', 'N': n, 'bound': 0.0 if n <= 2 else None,
                     'max_measured': float(errors.max()), 'min_measured': float(errors.min()),
                     'tail_residual': residual, 'trials': int(trials),
                     'violations': int(np.count_nonzero(failed))})
    return rows


def counterexample_sweep(cfg, rng):
    report = []
    for _ in range(cfg.counterexample_specs):
        spec = SyntheticQSpec.random(rng, cfg.state_dim, cfg.action_dim, cfg.gammas[0])
        report = merge_reports(report, counterexample_rows(spec, cfg.counterexample_n_max, 1, rng))
    return report
