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
from itertools import combinations

log = logging.getLogger('particle-push')

SLACK = 1e-12


def lemma1_bound(alpha, beta, v, u, eps, delta):
    """Bound on |alpha v - beta u| for delta-close weights and eps-close values."""
    return (alpha + beta) / 2.0 * eps + (v + u) / 2.0 * delta


def lemma3_bound(eps, delta, n, c):
    return eps + n * c * delta


def lemma4_bound(eps, lam):
    return 4.0 * eps / lam


def _subsets(n, max_size):
    for size in range(1, max_size + 1):
        yield from combinations(range(n), size)


def subset_weight_deviation(f, g, max_size):
    """Largest normalized-weight gap between f and g over every subset of
    at most max_size indices, taken for every member of the subset."""
    worst = 0.0
    for subset in _subsets(len(f), max_size):
        idx = list(subset)
        gap = np.abs(f[idx] / f[idx].sum() - g[idx] / g[idx].sum()).max()
        worst = max(worst, float(gap))
    return worst


def lemma1_case(rng):
    alpha, v = rng.uniform(0.0, 2.0, size=2)
    delta, eps = rng.uniform(0.01, 1.0, size=2)
    beta = max(alpha + delta * rng.uniform(-1.0, 1.0) * 0.999, 0.0)
    u = max(v + eps * rng.uniform(-1.0, 1.0) * 0.999, 0.0)
    return abs(alpha * v - beta * u), lemma1_bound(alpha, beta, v, u, eps, delta)


def lemma2_case(rng, M=None, k=None):
    """Normalization over M+k inputs when every subset of at most M is
    delta-close. Measured over the first M entries."""
    M = M or int(rng.integers(2, 5))
    k = k or int(rng.integers(1, M))
    f = rng.uniform(0.1, 2.0, size=M + k)
    g = f * np.exp(rng.uniform(-0.3, 0.3, size=M + k))
    delta = subset_weight_deviation(f, g, M)
    measured = float(np.abs(f[:M] / f.sum() - g[:M] / g.sum()).max())
    return measured, 2.0 * delta


def lemma3_case(rng):
    n = int(rng.integers(1, 7))
    c = rng.uniform(0.5, 10.0)
    f = rng.uniform(0.1, 2.0, size=n)
    f_star = f * np.exp(rng.uniform(-0.3, 0.3, size=n))
    g = rng.uniform(0.0, c, size=n)
    g_star = np.clip(g + rng.uniform(-0.2, 0.2, size=n) * c, 0.0, c)
    delta = float(np.abs(f / f.sum() - f_star / f_star.sum()).max())
    eps = float(np.abs(g - g_star).max())
    measured = abs(float((f * g).sum() / f.sum() - (f_star * g_star).sum() / f_star.sum()))
    return measured, lemma3_bound(eps, delta, n, c)


def lemma4_case(rng, M=None, lam=None):
    """lam-separated values; eps is the worst weighted-average gap over every
    subset of the pool, the measured gap is the worst normalized weight."""
    M = M or int(rng.integers(2, 5))
    lam = lam or rng.uniform(0.2, 1.0)
    gaps = lam + rng.uniform(0.0, lam, size=M - 1)
    v = rng.permutation(np.concatenate([[0.0], np.cumsum(gaps)]) + rng.uniform(0.0, 1.0))
    v_star = v + rng.normal(scale=0.05 * lam, size=M)
    alpha = rng.uniform(0.1, 2.0, size=M)
    alpha_star = alpha * np.exp(rng.normal(scale=0.2, size=M))
    eps, measured = 0.0, 0.0
    for subset in _subsets(M, M):
        idx = list(subset)
        w, w_star = alpha[idx] / alpha[idx].sum(), alpha_star[idx] / alpha_star[idx].sum()
        eps = max(eps, abs(float(w @ v[idx] - w_star @ v_star[idx])))
        measured = max(measured, float(np.abs(w - w_star).max()))
    return measured, lemma4_bound(eps, lam)


LEMMAS = (('lemma1', lemma1_case), ('lemma2', lemma2_case), ('lemma3', lemma3_case), ('lemma4', lemma4_case))


def lemma_suite(trials, rng):
    """Random premise-satisfying instances per lemma; a measured value above
    its bound is a violation. One report row per lemma."""
    report = []
    for name, case in LEMMAS:
        violations, worst, worst_ratio = 0, 0.0, 0.0
        for _ in range(trials):
            measured, bound = case(rng)
            if measured > bound + SLACK:
                violations += 1
                log.warning('Lemma check %s violated: %.6g > %.6g', name, measured, bound)
            worst = max(worst, measured)
            if bound > 0:
                worst_ratio = max(worst_ratio, measured / bound)
        report.append({'theorem': name, 'trials': int(trials), 'violations': violations,
                       'max_measured': worst, 'max_bound_ratio': worst_ratio})
    return report
