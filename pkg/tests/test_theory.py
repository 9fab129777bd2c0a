"""Generalization bounds, their numerical certification and the lemma suite."""

import numpy as np
import pytest

from errors import ConfigError, EntityError, PremiseError
from theory.synthetic import (MARGIN, PerturbationSpec, SyntheticQSpec, FixedQSpec, aggregate, q_star_eval,
                              q_star_batch, q_hat_build, premise_check, weight_target, counterexample_q,
                              counterexample_tail)
from theory.certify import (TheoryConfig, theorem1_bound, theorem3_bound, certify_theorem1, merge_reports,
                            total_violations, theorem_sweep, deepsets_check, deepsets_sweep, counterexample_rows,
                            counterexample_sweep)
from theory.lemmas import (lemma1_bound, lemma3_bound, lemma4_bound, lemma1_case, lemma2_case,
                           subset_weight_deviation, lemma_suite)


def small_theory(**overrides):
    values = dict(M_values=[2, 3], gammas=[0.9], n_specs=3, trials=20, premise_samples=2000, deepsets_specs=3,
                  deepsets_trials=20, deepsets_n_max=5, counterexample_specs=5, counterexample_n_max=5,
                  lemma_trials=100)
    values.update(overrides)
    return TheoryConfig(**values)


class TestBounds:
    def test_theorem1_example(self):
        assert theorem1_bound(0.01, 0.001, 3, 2, 0.98) == pytest.approx(0.88)

    def test_theorem1_without_attention_error(self):
        assert theorem1_bound(0.02, 0.0, 4, 3, 0.9) == pytest.approx(0.06)

    def test_theorem3_example(self):
        assert theorem3_bound(0.01, 0.5, 3, 2, 0.9) == pytest.approx(13.63)

    def test_bounds_grow_with_k(self):
        values = [theorem1_bound(0.01, 0.001, 3, k, 0.9) for k in (1, 2, 3)]
        assert values == sorted(values)
        assert values[2] - values[1] == pytest.approx(values[1] - values[0])

    @pytest.mark.parametrize('call', [lambda: theorem1_bound(0.1, 0.1, 2, 1, 1.0),
                                      lambda: theorem3_bound(0.1, 0.0, 2, 1, 0.9),
                                      lambda: theorem3_bound(0.1, 0.2, 2, 1, 0.0)])
    def test_rejects_bad_parameters(self, call):
        with pytest.raises(ConfigError):
            call()


class TestQStar:
    def test_uniform_weights_average_values(self):
        spec = FixedQSpec([0.1, 0.2, 0.3, 0.4])
        assert q_star_eval(spec, spec.states([0, 1, 3]), [0.0]) == pytest.approx(0.7 / 3, abs=1e-15)

    def test_aggregate_normalizes_per_row(self):
        alpha = np.array([[[1.0, 3.0], [1.0, 1.0]]])
        assert aggregate(alpha, np.array([[4.0, 8.0]]))[0] == pytest.approx((7.0 + 6.0) / 2)

    def test_permutation_invariant_and_bounded(self):
        rng = np.random.default_rng(0)
        spec = SyntheticQSpec.random(rng, gamma=0.9)
        for n in (1, 3, 6):
            states, actions = spec.sample(n, rng, 20)
            values = q_star_batch(spec, states, actions)
            assert np.all((values >= 0.0) & (values <= spec.v_max))
            order = rng.permutation(n)
            np.testing.assert_allclose(q_star_batch(spec, states[:, order], actions), values, atol=1e-12)

    def test_needs_a_state(self):
        with pytest.raises(EntityError):
            q_star_eval(FixedQSpec([0.1]), np.zeros((0, 1)), [0.0])

    def test_attention_weights_stay_in_range(self):
        rng = np.random.default_rng(1)
        spec = SyntheticQSpec.random(rng)
        alpha = spec.alpha(*spec.sample_free(5, rng, 50))
        assert np.all((alpha >= np.exp(-3.0) - 1e-12) & (alpha <= np.exp(3.0) + 1e-12))

    def test_separated_sampling(self):
        rng = np.random.default_rng(2)
        spec = SyntheticQSpec.random(rng, gamma=0.9, lam=0.2, separation=0.1)
        states, actions = spec.sample(4, rng, 10)
        values = spec.value(states, actions)
        for t in range(10):
            gaps = np.abs(values[t][:, None] - values[t][None, :]) + np.eye(4) * 1e9
            assert gaps.min() >= 0.2
            l1 = np.abs(states[t][:, None] - states[t][None, :]).sum(axis=-1) + np.eye(4) * 1e9
            assert l1.min() >= 0.1

    def test_impossible_separation(self):
        rng = np.random.default_rng(3)
        spec = SyntheticQSpec.random(rng, gamma=0.9, lam=50.0)
        with pytest.raises(PremiseError):
            spec.sample(2, rng, 1)


class TestPerturbation:
    def test_zero_perturbation_is_identity(self):
        rng = np.random.default_rng(4)
        spec = SyntheticQSpec.random(rng)
        q_hat = q_hat_build(spec, PerturbationSpec(0.0, 0.0, 3), rng, samples=500)
        states, actions = spec.sample(5, rng, 30)
        np.testing.assert_array_equal(q_hat.batch(states, actions), q_star_batch(spec, states, actions))
        assert q_hat.certificate['max_q_deviation'] == 0.0

    def test_premise_certificate(self):
        rng = np.random.default_rng(5)
        spec = SyntheticQSpec.random(rng, gamma=0.98)
        pert = PerturbationSpec(0.05, 0.001, 3)
        q_hat = q_hat_build(spec, pert, rng, samples=3000)
        assert q_hat.certificate['max_q_deviation'] <= 0.05
        assert q_hat.certificate['max_weight_deviation'] <= 0.001
        again = premise_check(spec, q_hat, 3, 3000, rng)
        assert again['max_weight_deviation'] <= 0.001

    def test_weight_target(self):
        pert = PerturbationSpec(0.08, 0.001, 2)
        assert weight_target(pert, 'theorem1') == 0.001
        assert weight_target(pert, 'theorem3', lam=0.5) == pytest.approx(0.64)
        assert weight_target(pert, 'theorem3', lam=0.5) == lemma4_bound(0.08, 0.5)
        with pytest.raises(ConfigError):
            weight_target(pert, 'theorem3')
        with pytest.raises(ConfigError):
            weight_target(pert, 'theorem9')

    def test_theorem3_build_starts_from_the_widest_attention_perturbation(self):
        rng = np.random.default_rng(30)
        spec = SyntheticQSpec.random(rng, gamma=0.9, lam=0.5, separation=0.1)
        pert = PerturbationSpec(0.08, 0.0, 3)
        q_hat = q_hat_build(spec, pert, rng, mode='theorem3', lam=0.5, samples=2000)
        certificate = q_hat.certificate
        safe_rho = MARGIN * 0.5 * np.log1p(0.08 / (2 * 3 * spec.v_max))
        assert certificate['rho'] >= safe_rho
        assert certificate['rho'] <= MARGIN * 0.5 * np.log1p(4 * 0.08 / 0.5)
        assert certificate['max_q_deviation'] <= 0.08
        assert certificate['max_weight_deviation'] <= lemma4_bound(0.08, 0.5)

    def test_perturbation_spec_validation(self):
        assert PerturbationSpec(0.1, 0.0, 4).ks == [1, 2, 3]
        assert PerturbationSpec(0.1, 0.0, 4, k=2).ks == [2]
        with pytest.raises(ConfigError):
            PerturbationSpec(0.1, 0.0, 3, k=3)
        with pytest.raises(ConfigError):
            PerturbationSpec(-0.1, 0.0, 3)


class TestCertification:
    def test_theorem1_holds(self):
        rng = np.random.default_rng(6)
        for gamma in (0.9, 0.98):
            spec = SyntheticQSpec.random(rng, gamma=gamma)
            rows = certify_theorem1(spec, PerturbationSpec(0.05, 0.001, 3), 50, rng, samples=3000)
            assert [row['k'] for row in rows] == [1, 2]
            assert total_violations(rows) == 0
            assert all(row['max_measured'] <= row['bound'] for row in rows)

    def test_exact_attention_stays_within_three_epsilon(self):
        rng = np.random.default_rng(7)
        spec = SyntheticQSpec.random(rng, gamma=0.9)
        rows = certify_theorem1(spec, PerturbationSpec(0.05, 0.0, 2), 100, rng, samples=2000)
        assert all(row['bound'] == pytest.approx(0.15) for row in rows)
        assert all(row['max_measured'] <= 0.15 for row in rows)

    def test_theorem3_on_separated_spec(self):
        rng = np.random.default_rng(8)
        spec = SyntheticQSpec.random(rng, gamma=0.9, lam=0.2, separation=0.1)
        rows = certify_theorem1(spec, PerturbationSpec(0.05, 0.0, 2), 30, rng, mode='theorem3', lam=0.2,
                                samples=2000)
        assert rows[0]['theorem'] == 'theorem3' and rows[0]['lambda'] == 0.2
        assert total_violations(rows) == 0

    def test_sweep_without_fault_is_clean(self):
        report = theorem_sweep(small_theory(), np.random.default_rng(9), 'theorem1')
        assert {(row['M'], row['k']) for row in report} == {(2, 1), (3, 1), (3, 2)}
        assert all(row['trials'] == 3 * 20 for row in report)
        assert total_violations(report) == 0

    def test_fault_injection_is_caught(self):
        report = theorem_sweep(small_theory(fault=True, trials=50), np.random.default_rng(10), 'theorem1')
        assert total_violations(report) > 0
        assert all(row['premise_q_deviation'] is None for row in report)


class TestDeepSets:
    def test_mean_of_close_values_stays_close(self):
        rng = np.random.default_rng(11)

        def v_star(states, actions):
            return states.sum(axis=-1)

        def v_hat(states, actions):
            return states.sum(axis=-1) + 0.05 * np.sin(7.0 * states[..., 0])

        rows = deepsets_check(v_star, v_hat, 0.05, 6, 40, rng)
        assert [row['N'] for row in rows] == list(range(1, 7))
        assert total_violations(rows) == 0

    def test_premise_violation(self):
        def v_star(states, actions):
            return np.zeros(states.shape[:-1])

        def v_hat(states, actions):
            return np.full(states.shape[:-1], 0.2)

        with pytest.raises(PremiseError):
            deepsets_check(v_star, v_hat, 0.1, 3, 10, np.random.default_rng(12))

    def test_sweep(self):
        report = deepsets_sweep(small_theory(), np.random.default_rng(13))
        assert total_violations(report) == 0
        assert all(row['max_measured'] <= 0.05 for row in report)


class TestCounterexample:
    def test_uniform_instance(self):
        spec = FixedQSpec([0.1, 0.2, 0.3])
        states = spec.states([0, 1, 2])
        assert q_star_eval(spec, states, [0.0]) == pytest.approx(0.2, abs=1e-12)
        assert counterexample_q(spec)(states, [0.0]) == pytest.approx(0.1, abs=1e-12)

    def test_exact_up_to_two_states(self):
        spec = FixedQSpec([0.4, 1.2, 0.7], weights=[[1.0, 2.0, 0.5], [3.0, 1.0, 1.0], [0.2, 0.3, 4.0]])
        for indices in ([0], [2], [0, 1], [2, 1]):
            states = spec.states(indices)
            assert abs(counterexample_q(spec)(states, [0.0]) - q_star_eval(spec, states, [0.0])) < 1e-12

    def test_tail_matches_error(self):
        rng = np.random.default_rng(14)
        spec = SyntheticQSpec.random(rng)
        states, actions = spec.sample(5, rng, 25)
        error = q_star_batch(spec, states, actions) - counterexample_q(spec).batch(states, actions)
        np.testing.assert_allclose(error, counterexample_tail(spec, states, actions), atol=1e-12)
        assert np.all(error > 0)

    def test_rows(self):
        rng = np.random.default_rng(15)
        rows = counterexample_rows(SyntheticQSpec.random(rng), 5, 10, rng)
        assert total_violations(rows) == 0
        assert rows[1]['max_measured'] < 1e-12 and rows[1]['bound'] == 0.0
        assert rows[2]['min_measured'] > 0 and rows[2]['bound'] is None

    def test_sweep(self):
        report = counterexample_sweep(small_theory(), np.random.default_rng(16))
        assert [row['N'] for row in report] == [1, 2, 3, 4, 5]
        assert all(row['trials'] == 5 for row in report)
        assert total_violations(report) == 0


class TestMerge:
    rows_a = [{'theorem': 'theorem1', 'M': 2, 'k': 1, 'max_measured': 0.1, 'trials': 5, 'violations': 0,
               'premise_q_deviation': None}]
    rows_b = [{'theorem': 'theorem1', 'M': 2, 'k': 1, 'max_measured': 0.3, 'trials': 5, 'violations': 1,
               'premise_q_deviation': 0.02},
              {'theorem': 'theorem1', 'M': 3, 'k': 1, 'max_measured': 0.2, 'trials': 5, 'violations': 0}]
    rows_c = [{'theorem': 'counterexample', 'N': 3, 'max_measured': 0.4, 'min_measured': 0.1, 'trials': 1,
               'violations': 0},
              {'theorem': 'theorem1', 'M': 2, 'k': 1, 'max_measured': 0.2, 'trials': 2, 'violations': 0}]

    def test_combines_matching_rows(self):
        merged = merge_reports(self.rows_a, self.rows_b)
        assert merged[0] == {'theorem': 'theorem1', 'M': 2, 'k': 1, 'max_measured': 0.3, 'trials': 10,
                             'violations': 1, 'premise_q_deviation': 0.02}
        assert len(merged) == 2
        assert total_violations(merged) == 1

    def test_associative(self):
        left = merge_reports(merge_reports(self.rows_a, self.rows_b), self.rows_c)
        right = merge_reports(self.rows_a, merge_reports(self.rows_b, self.rows_c))
        key = lambda row: (row['theorem'], row.get('M', 0), row.get('N', 0))
        assert sorted(left, key=key) == sorted(right, key=key)

    def test_min_field(self):
        other = [dict(self.rows_c[0], min_measured=0.05, max_measured=0.3)]
        merged = merge_reports(self.rows_c[:1], other)
        assert merged[0]['min_measured'] == 0.05 and merged[0]['max_measured'] == 0.4


class TestLemmas:
    def test_lemma1_example(self):
        assert abs(1.0 * 2.0 - 1.5 * 2.2) == pytest.approx(1.3)
        assert lemma1_bound(1.0, 1.5, 2.0, 2.2, 0.3, 0.6) == pytest.approx(1.635)

    def test_closed_forms(self):
        assert lemma3_bound(0.1, 0.01, 5, 2.0) == pytest.approx(0.2)
        assert lemma4_bound(0.1, 0.2) == pytest.approx(2.0)
        assert lemma4_bound(0.0, 0.2) == 0.0

    def test_identical_weights(self):
        f = np.array([0.5, 1.5, 2.0, 0.1])
        assert subset_weight_deviation(f, f.copy(), 3) == 0.0

    def test_cases_respect_bounds(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            measured, bound = lemma1_case(rng)
            assert measured <= bound + 1e-12
            measured, bound = lemma2_case(rng)
            assert measured <= bound + 1e-12

    def test_suite_is_clean(self):
        report = lemma_suite(300, np.random.default_rng(18))
        assert [row['theorem'] for row in report] == ['lemma1', 'lemma2', 'lemma3', 'lemma4']
        assert all(row['trials'] == 300 for row in report)
        assert total_violations(report) == 0


def test_theory_config_validation():
    with pytest.raises(ConfigError):
        TheoryConfig(M_values=[1, 2])
    with pytest.raises(ConfigError):
        TheoryConfig(gammas=[1.0])
    with pytest.raises(ConfigError):
        TheoryConfig(lam=0.0)


@pytest.mark.slow
def test_full_certification_sweep():
    cfg = TheoryConfig(M_values=[2, 3, 4], gammas=[0.9, 0.98], n_specs=500)
    rng = np.random.default_rng(0)
    for mode in ('theorem1', 'theorem3'):
        assert total_violations(theorem_sweep(cfg, rng, mode)) == 0
    assert total_violations(deepsets_sweep(cfg, rng)) == 0
    assert total_violations(counterexample_sweep(cfg, rng)) == 0
    assert total_violations(lemma_suite(cfg.lemma_trials, rng)) == 0
