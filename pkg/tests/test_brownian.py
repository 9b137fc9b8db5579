import math
import struct

import numpy as np
import pytest

from gammavar import (
    AtomPartition,
    BrownianEnsemble,
    Grouping,
    NormedSpace,
    RandomStream,
    SizeLimitError,
    StepFunction,
    check_randomisation_identity,
    dump_ensemble,
    induced_randomized_measure,
    integral_moment,
    load_ensemble_paths,
    measure_from_density,
    randomisation_identity_sweep,
    sample_brownian,
    stochastic_integral,
    verify_integral_identity,
)
from gammavar.brownian import BINARY_MAGIC, BINARY_VERSION


def _scalar_density(weights, values):
    return StepFunction(
        AtomPartition(weights), NormedSpace.l2(1), np.asarray(values)[:, None]
    )


class TestSampling:
    def test_shape_and_determinism(self):
        partition = AtomPartition([0.2, 0.3, 0.5])
        a = sample_brownian(partition, 50, RandomStream(7, (0,)))
        b = sample_brownian(partition, 50, RandomStream(7, (0,)))
        assert a.paths.shape == (50, 3)
        np.testing.assert_array_equal(a.paths, b.paths)
        c = sample_brownian(partition, 50, RandomStream(7, (1,)))
        assert not np.array_equal(a.paths, c.paths)

    def test_increment_variances_match_the_atom_masses(self):
        partition = AtomPartition.uniform(4)
        m = 20_000
        ensemble = sample_brownian(partition, m, RandomStream(11, (0,)))
        variances = ensemble.paths.var(axis=0)
        # sample variance of N(0, w) has std error about w * sqrt(2 / m)
        np.testing.assert_allclose(
            variances, partition.weights, atol=5.0 * 0.25 * math.sqrt(2.0 / m)
        )

    def test_disjoint_increments_are_uncorrelated(self):
        partition = AtomPartition.uniform(4)
        m = 20_000
        paths = sample_brownian(partition, m, RandomStream(12, (0,))).paths
        for i in range(4):
            for j in range(i + 1, 4):
                cov = float(np.mean(paths[:, i] * paths[:, j]))
                assert abs(cov) <= 5.0 / math.sqrt(m)

    def test_evaluate_sums_atom_increments_per_path(self):
        partition = AtomPartition([0.5, 0.25, 0.25])
        ensemble = sample_brownian(partition, 10, RandomStream(13, (0,)))
        np.testing.assert_allclose(
            ensemble.evaluate({0, 2}), ensemble.paths[:, 0] + ensemble.paths[:, 2]
        )

    def test_two_paths_minimum(self):
        with pytest.raises(ValueError):
            sample_brownian(AtomPartition.uniform(2), 1, RandomStream(0, (0,)))

    def test_ensemble_validation_and_read_only(self):
        partition = AtomPartition.uniform(3)
        with pytest.raises(ValueError):
            BrownianEnsemble(partition, np.zeros((5, 2)))
        ensemble = BrownianEnsemble(partition, np.zeros((5, 3)))
        with pytest.raises(ValueError):
            ensemble.paths[0, 0] = 1.0


class TestBinaryDumps:
    def test_round_trip(self, tmp_path):
        partition = AtomPartition([0.25, 0.75])
        ensemble = sample_brownian(partition, 32, RandomStream(21, (0,)))
        target = tmp_path / "paths.gvlb"
        dump_ensemble(ensemble, target)
        np.testing.assert_array_equal(load_ensemble_paths(target), ensemble.paths)

    def test_header_fields(self, tmp_path):
        ensemble = BrownianEnsemble(AtomPartition.uniform(3), np.zeros((4, 3)))
        target = tmp_path / "paths.gvlb"
        dump_ensemble(ensemble, target)
        raw = target.read_bytes()
        magic, version, n_paths, n_atoms = struct.unpack("<4sIII", raw[:16])
        assert magic == BINARY_MAGIC
        assert version == BINARY_VERSION
        assert (n_paths, n_atoms) == (4, 3)
        assert len(raw) == 16 + 4 * 3 * 8

    @pytest.mark.parametrize(
        "mangle",
        [
            lambda raw: raw[:10],
            lambda raw: b"XXXX" + raw[4:],
            lambda raw: raw[:4] + struct.pack("<I", 99) + raw[8:],
            lambda raw: raw[:-8],
            lambda raw: raw + b"\x00" * 8,
        ],
        ids=["short-header", "bad-magic", "bad-version", "truncated", "oversized"],
    )
    def test_corrupt_dumps_are_rejected(self, tmp_path, mangle):
        ensemble = BrownianEnsemble(AtomPartition.uniform(3), np.ones((4, 3)))
        target = tmp_path / "paths.gvlb"
        dump_ensemble(ensemble, target)
        target.write_bytes(mangle(target.read_bytes()))
        with pytest.raises(ValueError):
            load_ensemble_paths(target)


class TestStochasticIntegral:
    def test_zero_density_integrates_to_zero(self):
        density = _scalar_density([0.5, 0.5], [0.0, 0.0])
        ensemble = sample_brownian(density.partition, 20, RandomStream(30, (0,)))
        np.testing.assert_array_equal(
            stochastic_integral(density, ensemble), np.zeros((20, 1))
        )

    def test_unit_density_reproduces_the_brownian_value(self):
        density = _scalar_density([0.2, 0.3, 0.5], [1.0, 1.0, 1.0])
        ensemble = sample_brownian(density.partition, 25, RandomStream(31, (0,)))
        np.testing.assert_allclose(
            stochastic_integral(density, ensemble)[:, 0],
            ensemble.evaluate({0, 1, 2}),
            atol=1e-12,
        )

    def test_second_moment_matches_the_weighted_density_norm(self):
        density = _scalar_density([0.5, 0.5], [1.0, 2.0])
        m = 20_000
        ensemble = sample_brownian(density.partition, m, RandomStream(32, (0,)))
        integral = stochastic_integral(density, ensemble)
        moment = float(np.mean(integral**2))
        # E of the square is 0.5 * 1 + 0.5 * 4 = 2.5
        assert abs(moment - 2.5) <= 3.0 * float(np.std(integral**2)) / math.sqrt(m)

    def test_atom_subsets_add_exactly(self):
        rng = np.random.default_rng(33)
        density = StepFunction(
            AtomPartition([0.1, 0.2, 0.3, 0.4]),
            NormedSpace.l2(2),
            rng.standard_normal((4, 2)),
        )
        ensemble = sample_brownian(density.partition, 8, RandomStream(33, (0,)))
        whole = stochastic_integral(density, ensemble)
        part = stochastic_integral(density, ensemble, {0, 3}) + stochastic_integral(
            density, ensemble, {1, 2}
        )
        np.testing.assert_allclose(part, whole, atol=1e-12)

    def test_partition_mismatch_is_rejected(self):
        density = _scalar_density([0.5, 0.5], [1.0, 1.0])
        other = sample_brownian(AtomPartition([0.4, 0.6]), 8, RandomStream(34, (0,)))
        with pytest.raises(ValueError):
            stochastic_integral(density, other)


class TestInducedMeasure:
    def test_total_value_collects_the_full_integral(self):
        rng = np.random.default_rng(40)
        density = StepFunction(
            AtomPartition([0.25, 0.25, 0.5]),
            NormedSpace.l2(2),
            rng.standard_normal((3, 2)),
        )
        ensemble = sample_brownian(density.partition, 12, RandomStream(40, (0,)))
        induced = induced_randomized_measure(density, ensemble)
        np.testing.assert_allclose(
            induced.total_value(), stochastic_integral(density, ensemble), atol=1e-12
        )

    def test_block_values_add_over_atoms(self):
        rng = np.random.default_rng(41)
        density = StepFunction(
            AtomPartition.uniform(4), NormedSpace.l2(2), rng.standard_normal((4, 2))
        )
        ensemble = sample_brownian(density.partition, 6, RandomStream(41, (0,)))
        induced = induced_randomized_measure(density, ensemble)
        np.testing.assert_allclose(
            induced.block_value({0, 2}),
            induced.block_value({0}) + induced.block_value({2}),
            atol=1e-12,
        )

    def test_atom_magnitudes_concentrate_at_root_mass(self):
        # |phi| = 1 everywhere, so each atom value has norm sqrt(w) on average
        n = 4
        density = _scalar_density([0.25] * n, [1.0] * n)
        m = 20_000
        ensemble = sample_brownian(density.partition, m, RandomStream(42, (0,)))
        induced = induced_randomized_measure(density, ensemble)
        for atom in range(n):
            magnitude_sq = float(np.mean(induced.block_value({atom}) ** 2))
            assert abs(magnitude_sq - 0.25) <= 5.0 * 0.25 * math.sqrt(2.0 / m)

    def test_zero_density_induces_the_zero_measure(self):
        density = _scalar_density([0.5, 0.5], [0.0, 0.0])
        ensemble = sample_brownian(density.partition, 6, RandomStream(43, (0,)))
        induced = induced_randomized_measure(density, ensemble)
        np.testing.assert_array_equal(induced.total_value(), np.zeros((6, 1)))


class TestIntegralMoment:
    def test_averages_the_path_statistics(self):
        density = _scalar_density([0.5, 0.5], [1.0, 2.0])
        ensemble = sample_brownian(density.partition, 5000, RandomStream(44, (0,)))
        estimate = integral_moment(density, ensemble)
        assert estimate.samples == 5000
        assert estimate.method == "monte_carlo"
        assert estimate.std_error > 0.0
        by_hand = float(np.mean(stochastic_integral(density, ensemble) ** 2))
        assert abs(estimate.value - by_hand) <= 1e-12


class TestIntegralIdentity:
    def test_euclidean_identity_holds(self):
        rng = np.random.default_rng(46)
        density = StepFunction(
            AtomPartition.uniform(4), NormedSpace.l2(2), rng.standard_normal((4, 2))
        )
        report = verify_integral_identity(density, 20_000, RandomStream(46, (0,)))
        assert report.consistent
        assert report.variation.moment.is_exact
        assert set(report.comparisons) == {
            "variation_vs_randomized",
            "variation_vs_integral",
            "randomized_vs_integral",
        }

    def test_constant_density_recovers_the_vector_norm(self):
        density = StepFunction(
            AtomPartition.uniform(4), NormedSpace.l2(2), [[3.0, 4.0]] * 4
        )
        report = verify_integral_identity(density, 20_000, RandomStream(47, (0,)))
        assert report.consistent
        assert abs(report.variation.norm - 5.0) <= 1e-12
        assert abs(report.integral.value - 25.0) <= 3.0 * report.integral.std_error

    def test_scalar_density_hand_value(self):
        density = _scalar_density([0.5, 0.5], [1.0, 2.0])
        report = verify_integral_identity(density, 20_000, RandomStream(48, (0,)))
        assert report.consistent
        assert abs(report.variation.norm - math.sqrt(2.5)) <= 1e-12

    def test_zero_density_is_exactly_zero(self):
        density = _scalar_density([0.5, 0.5], [0.0, 0.0])
        report = verify_integral_identity(density, 100, RandomStream(49, (0,)))
        assert report.consistent
        assert report.variation.norm == 0.0
        assert report.integral.value == 0.0

    def test_document_shape(self):
        density = _scalar_density([0.5, 0.5], [1.0, 1.0])
        doc = verify_integral_identity(
            density, 200, RandomStream(50, (0,))
        ).to_document()
        assert set(doc) == {"variation", "randomized", "integral", "comparisons"}


class TestRandomisationIdentity:
    def _measure(self, seed=51, n_atoms=4, dim=2, space=None, n_paths=20_000):
        rng = np.random.default_rng(seed)
        density = StepFunction(
            AtomPartition(rng.dirichlet(np.ones(n_atoms))),
            space or NormedSpace.l2(dim),
            rng.standard_normal((n_atoms, dim)),
        )
        ensemble = sample_brownian(density.partition, n_paths, RandomStream(seed, (0,)))
        return induced_randomized_measure(density, ensemble)

    def test_single_block_is_exactly_invariant(self):
        # one sign factors out of the norm, so both sides coincide path-wise
        measure = self._measure(n_paths=200)
        check = check_randomisation_identity(measure, Grouping([[0, 1, 2, 3]], 4))
        assert check.comparison.consistent
        assert abs(check.signed.value - check.plain.value) <= 1e-12

    def test_finest_grouping_keeps_the_euclidean_moment(self):
        measure = self._measure(seed=52)
        check = check_randomisation_identity(measure, Grouping.finest(4))
        assert check.comparison.consistent

    def test_two_block_covering_grouping_is_consistent(self):
        measure = self._measure(seed=53, space=NormedSpace.l1(2))
        check = check_randomisation_identity(measure, Grouping([[0, 2], [1, 3]], 4))
        assert check.comparison.consistent
        assert check.grouping == Grouping([[0, 2], [1, 3]], 4)

    def test_sweep_preserves_order_and_caches_plain_moments(self):
        measure = self._measure(seed=54, n_paths=500)
        groupings = [
            Grouping([[0, 1], [2, 3]], 4),
            Grouping([[0, 2], [1, 3]], 4),
            Grouping.finest(4),
        ]
        checks = randomisation_identity_sweep(measure, groupings)
        assert [c.grouping for c in checks] == groupings
        # same covered atom set: the unsigned side is shared across groupings
        assert checks[0].plain == checks[1].plain

    def test_sign_enumeration_cap(self):
        measure = self._measure(seed=55, n_atoms=21, dim=1, n_paths=10)
        with pytest.raises(ValueError, match="21"):
            check_randomisation_identity(measure, Grouping.finest(21))

    def test_non_covering_groupings_compare_against_their_own_restriction(self):
        measure = self._measure(seed=56, space=NormedSpace.linf(2))
        partial = Grouping([[0], [2]], 4)
        full = check_randomisation_identity(measure, Grouping.finest(4))
        restricted = check_randomisation_identity(measure, partial)
        assert restricted.comparison.consistent
        assert restricted.plain.value != full.plain.value
