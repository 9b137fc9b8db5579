import math

import numpy as np
import pytest

import _reference as ref
from gammavar import (
    EmpiricalL2Space,
    NormedSpace,
    RandomStream,
    SumEstimate,
    compare_estimates,
    gaussian_sum_sq,
    rademacher_sum_sq,
)
from gammavar.random_sums import (
    METHOD_EXACT_ENUMERATION,
    METHOD_EXACT_HILBERT,
    METHOD_MONTE_CARLO,
)


class TestRandomStream:
    def test_identical_addresses_reproduce_draws(self):
        a = RandomStream(42, (3,)).generator().standard_normal(8)
        b = RandomStream(42, (3,)).generator().standard_normal(8)
        np.testing.assert_array_equal(a, b)

    def test_different_substreams_differ(self):
        root = RandomStream(42)
        a = root.substream(0).generator().standard_normal(8)
        b = root.substream(1).generator().standard_normal(8)
        assert not np.array_equal(a, b)

    def test_substream_appends_to_the_address(self):
        stream = RandomStream(7, (1,)).substream(4).substream(2)
        assert stream.stream_id == (1, 4, 2)
        assert stream.seed == 7

    def test_integer_stream_id_normalizes_to_a_tuple(self):
        assert RandomStream(7, 5).stream_id == (5,)


class TestSumEstimate:
    def test_exactness_tracks_the_method(self):
        assert SumEstimate(1.0, 0.0, 0, METHOD_EXACT_HILBERT).is_exact
        assert SumEstimate(1.0, 0.0, 0, METHOD_EXACT_ENUMERATION).is_exact
        assert not SumEstimate(1.0, 0.1, 100, METHOD_MONTE_CARLO).is_exact

    def test_document_shape(self):
        doc = SumEstimate(2.0, 0.1, 50, METHOD_MONTE_CARLO).to_document()
        assert doc == {
            "value": 2.0,
            "std_error": 0.1,
            "samples": 50,
            "method": "monte_carlo",
        }


class TestCompareEstimates:
    def test_two_equal_exact_estimates_are_consistent(self):
        a = SumEstimate(2.0, 0.0, 0, METHOD_EXACT_HILBERT)
        b = SumEstimate(2.0, 0.0, 0, METHOD_EXACT_ENUMERATION)
        assert compare_estimates(a, b).consistent

    def test_exact_estimates_must_agree_to_the_tight_tolerance(self):
        a = SumEstimate(2.0, 0.0, 0, METHOD_EXACT_HILBERT)
        b = SumEstimate(2.0 + 5e-9, 0.0, 0, METHOD_EXACT_HILBERT)
        result = compare_estimates(a, b)
        assert not result.consistent
        assert result.tolerance == 1e-9

    def test_z_scaled_combined_error(self):
        a = SumEstimate(2.00, 0.01, 100, METHOD_MONTE_CARLO)
        b = SumEstimate(2.02, 0.01, 100, METHOD_MONTE_CARLO)
        result = compare_estimates(a, b, z=3.0)
        assert result.consistent
        assert abs(result.tolerance - 3.0 * math.hypot(0.01, 0.01)) <= 1e-15
        assert abs(result.gap - 0.02) <= 1e-15

    def test_far_apart_estimates_are_inconsistent(self):
        a = SumEstimate(1.0, 0.0, 0, METHOD_EXACT_HILBERT)
        b = SumEstimate(2.0, 0.1, 100, METHOD_MONTE_CARLO)
        assert not compare_estimates(a, b, z=3.0).consistent


class TestGaussianSumSq:
    def test_single_vector_in_l2(self):
        estimate = gaussian_sum_sq([[3.0, 4.0]], NormedSpace.l2(2))
        assert estimate.value == 25.0
        assert estimate.method == METHOD_EXACT_HILBERT
        assert estimate.std_error == 0.0

    def test_orthogonal_vectors_in_l2(self):
        estimate = gaussian_sum_sq([[1.0, 0.0], [0.0, 1.0]], NormedSpace.l2(2))
        assert estimate.value == 2.0

    def test_dimension_one_is_exact_for_any_p(self):
        estimate = gaussian_sum_sq([[1.0], [2.0]], NormedSpace(1, math.inf))
        assert estimate.method == METHOD_EXACT_HILBERT
        assert estimate.value == 5.0

    def test_sup_norm_pair_matches_the_quadrature_constant(self):
        estimate = gaussian_sum_sq(
            [[1.0, 0.0], [0.0, 1.0]],
            NormedSpace.linf(2),
            RandomStream(0, (901,)),
            100_000,
        )
        assert estimate.method == METHOD_MONTE_CARLO
        assert abs(estimate.value - ref.MAX_SQ_TWO_GAUSSIANS) <= 3.0 * estimate.std_error

    def test_monte_carlo_needs_a_stream_and_samples(self):
        with pytest.raises(ValueError):
            gaussian_sum_sq([[1.0, 0.0]], NormedSpace.linf(2))
        with pytest.raises(ValueError):
            gaussian_sum_sq([[1.0, 0.0]], NormedSpace.linf(2), RandomStream(0), 1)

    def test_value_shape_validation(self):
        with pytest.raises(ValueError):
            gaussian_sum_sq(np.empty((0, 2)), NormedSpace.l2(2))
        with pytest.raises(ValueError):
            gaussian_sum_sq([[1.0, 2.0, 3.0]], NormedSpace.l2(2))

    def test_reproducible_and_stream_sensitive(self):
        values = [[1.0, 2.0], [0.5, -1.0]]
        space = NormedSpace.l1(2)
        a = gaussian_sum_sq(values, space, RandomStream(5, (1,)), 4000)
        b = gaussian_sum_sq(values, space, RandomStream(5, (1,)), 4000)
        c = gaussian_sum_sq(values, space, RandomStream(5, (2,)), 4000)
        assert a == b
        assert a.value != c.value

    def test_sample_count_is_honored_when_not_divisible_by_batches(self):
        estimate = gaussian_sum_sq(
            [[1.0, 0.0]], NormedSpace.linf(2), RandomStream(0, (902,)), 1001
        )
        assert estimate.samples == 1001

    def test_scaling_is_exact_with_a_shared_stream(self):
        values = np.array([[1.0, 2.0], [0.5, -1.0]])
        space = NormedSpace.linf(2)
        stream = RandomStream(3, (7,))
        base = gaussian_sum_sq(values, space, stream, 2000)
        scaled = gaussian_sum_sq(2.0 * values, space, stream, 2000)
        assert abs(scaled.value - 4.0 * base.value) <= 1e-9 * abs(base.value)

    def test_hilbert_closed_form_agrees_with_monte_carlo(self):
        # the closed form and a forced-sampling run of the same quantity:
        # inside 3 sigma in at least 99 of 100 seeded repetitions
        rng = np.random.default_rng(18)
        hits = 0
        for rep in range(100):
            values = rng.standard_normal((3, 2))
            exact = gaussian_sum_sq(values, NormedSpace.l2(2))
            # p = 2.000001 defeats the Hilbert branch but not the geometry
            mc = gaussian_sum_sq(
                values, NormedSpace(2, 2.000001), RandomStream(100, (rep,)), 4000
            )
            if abs(exact.value - mc.value) <= 3.0 * mc.std_error:
                hits += 1
        assert hits >= 99

    def test_appending_a_vector_never_decreases_the_moment(self):
        space = NormedSpace.linf(2)
        rng = np.random.default_rng(20)
        for rep in range(10):
            values = rng.standard_normal((3, 2))
            extra = np.concatenate([values, rng.standard_normal((1, 2))])
            a = gaussian_sum_sq(values, space, RandomStream(21, (rep, 0)), 20_000)
            b = gaussian_sum_sq(extra, space, RandomStream(21, (rep, 1)), 20_000)
            assert b.value >= a.value - 3.0 * math.hypot(a.std_error, b.std_error)


class TestRademacherSumSq:
    def test_two_unit_scalars(self):
        estimate = rademacher_sum_sq([[1.0], [1.0]], NormedSpace.l2(1))
        assert estimate.value == 2.0
        assert estimate.is_exact

    def test_sup_norm_unit_vectors_are_constant(self):
        estimate = rademacher_sum_sq([[1.0, 0.0], [0.0, 1.0]], NormedSpace.linf(2))
        assert estimate.value == 1.0
        assert estimate.method == METHOD_EXACT_ENUMERATION
        assert estimate.std_error == 0.0

    def test_single_vector_gives_its_squared_norm(self):
        estimate = rademacher_sum_sq([[3.0, -4.0]], NormedSpace.l1(2))
        assert estimate.value == 49.0

    def test_opposite_vectors(self):
        estimate = rademacher_sum_sq([[1.0, 2.0], [-1.0, -2.0]], NormedSpace.linf(2))
        assert estimate.value == 8.0  # patterns give 0 or 2x, mean 2 ||x||^2

    @pytest.mark.parametrize("p", [1.0, 1.5, math.inf])
    def test_enumeration_matches_the_brute_force_reference(self, p):
        rng = np.random.default_rng(31)
        values = rng.standard_normal((5, 2))
        estimate = rademacher_sum_sq(values, NormedSpace(2, p))
        expected = ref.rademacher_moment_reference(values, p)
        assert estimate.method == METHOD_EXACT_ENUMERATION
        assert abs(estimate.value - expected) <= 1e-12

    def test_monte_carlo_engages_past_the_enumeration_cap(self):
        rng = np.random.default_rng(33)
        values = rng.standard_normal((21, 2))
        # p near 2 defeats both exact branches while the true moment stays
        # numerically indistinguishable from the Euclidean closed form
        space = NormedSpace(2, 2.000001)
        mc = rademacher_sum_sq(values, space, RandomStream(0, (903,)), 40_000)
        assert mc.method == METHOD_MONTE_CARLO
        assert mc.samples == 40_000
        assert abs(mc.value - float(np.sum(values**2))) <= 3.0 * mc.std_error


class TestEnsembleValues:
    def test_hilbert_base_reduces_to_per_path_sums(self):
        rng = np.random.default_rng(40)
        values = rng.standard_normal((3, 50, 2))
        space = EmpiricalL2Space(NormedSpace.l2(2))
        estimate = gaussian_sum_sq(values, space)
        expected = np.sum(values**2, axis=(0, 2)).mean()
        assert abs(estimate.value - expected) <= 1e-12
        assert estimate.samples == 50  # paths carry the uncertainty

    def test_rademacher_sign_enumeration_over_paths(self):
        rng = np.random.default_rng(41)
        values = rng.standard_normal((3, 40, 2))
        space = EmpiricalL2Space(NormedSpace.linf(2))
        estimate = rademacher_sum_sq(values, space)
        # direct average over all 8 sign patterns and all paths
        per_path = np.zeros(40)
        for signs in np.ndindex(2, 2, 2):
            s = np.array([1.0 - 2.0 * b for b in signs])
            combo = np.einsum("k,kpd->pd", s, values)
            per_path += np.max(np.abs(combo), axis=-1) ** 2
        expected = per_path / 8.0
        assert abs(estimate.value - expected.mean()) <= 1e-12

    def test_gaussian_ensemble_sampling_is_reproducible(self):
        rng = np.random.default_rng(42)
        values = rng.standard_normal((3, 30, 2))
        space = EmpiricalL2Space(NormedSpace.l1(2))
        a = gaussian_sum_sq(values, space, RandomStream(9, (0,)), 2000)
        b = gaussian_sum_sq(values, space, RandomStream(9, (0,)), 2000)
        assert a == b

    def test_ensemble_values_need_three_axes(self):
        space = EmpiricalL2Space(NormedSpace.l2(2))
        with pytest.raises(ValueError):
            gaussian_sum_sq([[1.0, 2.0]], space)
