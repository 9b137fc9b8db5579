"""Set-indexed Brownian ensembles and empirical stochastic integrals.

A Brownian ensemble holds M independent paths of atom increments, each entry
distributed N(0, mu(A_n)) and independent across atoms.  Pairing a step
density phi with an ensemble induces the empirical measure
G(A) = sum_{n in A} phi_n * dW_n, whose values live in the empirical
L2(paths; X) space.  The identities verified here: the gamma-variation norm of
the density's measure, the randomized variation norm of G, and the root second
moment of the full integral all estimate the same number, and block sign flips
leave the integral's second moment unchanged.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .groupings import Grouping
from .measures import StepFunction, measure_from_density
from .norms import NormReport, block_sums, gamma_variation_norm, randomized_variation_norm
from .random_sums import (
    ENUMERATION_LIMIT,
    Comparison,
    RandomStream,
    SumEstimate,
    _estimate_from_path_stats,
    _sign_patterns,
    compare_estimates,
)
from .spaces import AtomPartition, EmpiricalL2Space, NormedSpace

MIN_PATHS = 2

BINARY_MAGIC = b"GVLB"
BINARY_VERSION = 1
_HEADER = struct.Struct("<4sIII")  # magic, version, n_paths, n_atoms


class BrownianEnsemble:
    """M sampled paths of independent atom increments, entry n ~ N(0, mu(A_n))."""

    def __init__(self, partition: AtomPartition, paths):
        arr = np.asarray(paths, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != partition.n_atoms:
            raise ValueError(
                f"paths must have shape (n_paths, {partition.n_atoms}), got {arr.shape}"
            )
        if arr.shape[0] < MIN_PATHS:
            raise ValueError(
                f"an ensemble needs at least {MIN_PATHS} paths, got {arr.shape[0]}"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        self.partition = partition
        self.paths = arr

    @property
    def n_paths(self) -> int:
        return int(self.paths.shape[0])

    @property
    def n_atoms(self) -> int:
        return self.partition.n_atoms

    def evaluate(self, atoms) -> np.ndarray:
        """W of a union of atoms, per path; additive by construction."""
        idx = self.partition._indices(atoms)
        return np.sum(self.paths[:, idx], axis=1)


def sample_brownian(
    partition: AtomPartition, n_paths: int, stream: RandomStream
) -> BrownianEnsemble:
    """Draw an ensemble of independent scaled-Gaussian atom increments."""
    if n_paths < MIN_PATHS:
        raise ValueError(
            f"sampling an ensemble requires at least {MIN_PATHS} paths, got {n_paths}"
        )
    rng = stream.generator()
    raw = rng.standard_normal((n_paths, partition.n_atoms))
    return BrownianEnsemble(partition, raw * np.sqrt(partition.weights)[None, :])


def dump_ensemble(ensemble: BrownianEnsemble, file_path) -> None:
    """Write paths as a flat binary dump: 16-byte header (magic GVLB, version,
    n_paths, n_atoms as little-endian u32) then row-major little-endian doubles."""
    with open(file_path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                BINARY_MAGIC, BINARY_VERSION, ensemble.n_paths, ensemble.n_atoms
            )
        )
        fh.write(np.ascontiguousarray(ensemble.paths, dtype="<f8").tobytes())


def load_ensemble_paths(file_path) -> np.ndarray:
    """Read a binary dump back into an (n_paths, n_atoms) array."""
    with open(file_path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError("truncated ensemble dump header")
        magic, version, n_paths, n_atoms = _HEADER.unpack(header)
        if magic != BINARY_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {BINARY_MAGIC!r}")
        if version != BINARY_VERSION:
            raise ValueError(f"unsupported dump version {version}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n_paths * n_atoms:
        raise ValueError("ensemble dump payload does not match header shape")
    return data.reshape(n_paths, n_atoms).astype(float)


class EmpiricalVectorMeasure:
    """Per-atom, per-path vector contributions phi_n * dW_n.

    contributions has shape (n_atoms, n_paths, dim); the value of a union of
    atoms is the contribution sum, an (n_paths, dim) sample of the true
    measure's value in L2(paths; X)."""

    def __init__(self, partition: AtomPartition, space: NormedSpace, contributions):
        arr = np.asarray(contributions, dtype=float)
        if arr.ndim != 3 or arr.shape[0] != partition.n_atoms or arr.shape[2] != space.dim:
            raise ValueError(
                f"contributions must have shape (n_atoms, n_paths, dim) = "
                f"({partition.n_atoms}, *, {space.dim}), got {arr.shape}"
            )
        if arr.shape[1] < MIN_PATHS:
            raise ValueError(f"need at least {MIN_PATHS} paths, got {arr.shape[1]}")
        self.partition = partition
        self.space = space
        self.contributions = arr

    @property
    def n_atoms(self) -> int:
        return self.partition.n_atoms

    @property
    def n_paths(self) -> int:
        return int(self.contributions.shape[1])

    @property
    def empirical_space(self) -> EmpiricalL2Space:
        return EmpiricalL2Space(self.space)

    def block_value(self, atoms) -> np.ndarray:
        idx = self.partition._indices(atoms)
        return np.sum(self.contributions[idx], axis=0)

    def total_value(self) -> np.ndarray:
        return np.sum(self.contributions, axis=0)


def _check_same_partition(a: AtomPartition, b: AtomPartition) -> None:
    if a is not b and not np.array_equal(a.weights, b.weights):
        raise ValueError("density and ensemble must share the same partition")


def stochastic_integral(
    density: StepFunction, ensemble: BrownianEnsemble, atoms=None
) -> np.ndarray:
    """Per-path integral of the step density against the ensemble over a union
    of atoms (all atoms when unspecified); returns shape (n_paths, dim)."""
    _check_same_partition(density.partition, ensemble.partition)
    if atoms is None:
        idx = np.arange(density.n_atoms)
    else:
        idx = density.partition._indices(atoms)
    return ensemble.paths[:, idx] @ density.values[idx]


def induced_randomized_measure(
    density: StepFunction, ensemble: BrownianEnsemble
) -> EmpiricalVectorMeasure:
    """The empirical measure G(A_n) = phi_n * dW_n induced by density and ensemble."""
    _check_same_partition(density.partition, ensemble.partition)
    contributions = np.einsum("mn,nd->nmd", ensemble.paths, density.values)
    return EmpiricalVectorMeasure(density.partition, density.space, contributions)


def integral_moment(density: StepFunction, ensemble: BrownianEnsemble) -> SumEstimate:
    """Empirical second moment of the full-space integral, std error over paths."""
    integral = stochastic_integral(density, ensemble)
    return _estimate_from_path_stats(density.space.norm_sq(integral))


# --- identity checks -----------------------------------------------------------


@dataclass(frozen=True)
class IntegralIdentityReport:
    """Three routes to the same number, with pairwise consistency verdicts.

    variation: gamma-variation norm of the measure with density phi (exact for
    Hilbert targets).  randomized: randomized variation norm of the induced
    empirical measure.  integral: root second moment of the full integral.
    The two empirical legs share one path ensemble (paired comparison)."""

    variation: NormReport
    randomized: NormReport
    integral: SumEstimate
    comparisons: dict[str, Comparison]

    @property
    def consistent(self) -> bool:
        return all(c.consistent for c in self.comparisons.values())

    def to_document(self) -> dict:
        return {
            "variation": self.variation.to_document(),
            "randomized": self.randomized.to_document(),
            "integral": self.integral.to_document(),
            "comparisons": {k: c.to_document() for k, c in self.comparisons.items()},
        }


def verify_integral_identity(
    density: StepFunction,
    n_paths: int,
    stream: RandomStream,
    samples: int = 0,
    search_mode: str = "auto",
    z: float = 3.0,
) -> IntegralIdentityReport:
    """Check the triple identity between the variation norm of the density's
    measure, the randomized variation of the induced empirical measure, and
    the integral's root second moment."""
    variation = gamma_variation_norm(
        measure_from_density(density), stream.substream(0), samples, mode="fast_path"
    )
    ensemble = sample_brownian(density.partition, n_paths, stream.substream(1))
    empirical = induced_randomized_measure(density, ensemble)
    randomized = randomized_variation_norm(
        empirical.contributions,
        empirical.empirical_space,
        mode=search_mode,
        stream=stream.substream(2),
        samples=samples,
    )
    integral = integral_moment(density, ensemble)
    comparisons = {
        "variation_vs_randomized": compare_estimates(
            variation.moment, randomized.moment, z=z
        ),
        "variation_vs_integral": compare_estimates(variation.moment, integral, z=z),
        "randomized_vs_integral": compare_estimates(randomized.moment, integral, z=z),
    }
    return IntegralIdentityReport(variation, randomized, integral, comparisons)


@dataclass(frozen=True)
class RandomisationCheck:
    """Sign-averaged vs plain second moment of a grouping's block sum."""

    grouping: Grouping
    signed: SumEstimate
    plain: SumEstimate
    comparison: Comparison

    @property
    def consistent(self) -> bool:
        return self.comparison.consistent

    def to_document(self) -> dict:
        return {
            "grouping": self.grouping.to_lists(),
            "signed": self.signed.to_document(),
            "plain": self.plain.to_document(),
            "comparison": self.comparison.to_document(),
        }


def randomisation_identity_sweep(
    measure: EmpiricalVectorMeasure,
    groupings,
    z: float = 3.0,
) -> list[RandomisationCheck]:
    """check_randomisation_identity over many groupings, batched by block count.

    Independence and symmetry of the true block values make every sign pattern
    equidistributed, so the sign-enumerated average and the plain moment agree
    in expectation; both sides here share the measure's path ensemble."""
    groupings = list(groupings)
    n_paths, dim = measure.n_paths, measure.space.dim
    flat = measure.contributions.reshape(measure.n_atoms, n_paths * dim)
    norm_sq = measure.space.norm_sq

    plain_cache: dict[tuple[int, ...], SumEstimate] = {}

    def plain_for(grouping: Grouping) -> SumEstimate:
        covered = grouping.covered
        found = plain_cache.get(covered)
        if found is None:
            value = flat[list(covered)].sum(axis=0).reshape(n_paths, dim)
            found = _estimate_from_path_stats(norm_sq(value))
            plain_cache[covered] = found
        return found

    results: list[RandomisationCheck | None] = [None] * len(groupings)
    by_blocks: dict[int, list[int]] = {}
    for i, grouping in enumerate(groupings):
        if grouping.n_blocks > ENUMERATION_LIMIT:
            raise ValueError(
                f"sign enumeration is capped at {ENUMERATION_LIMIT} blocks, "
                f"got {grouping.n_blocks}"
            )
        by_blocks.setdefault(grouping.n_blocks, []).append(i)

    for k, indices in sorted(by_blocks.items()):
        patterns = _sign_patterns(k)
        # chunk so the (chunk, patterns, paths*dim) combo tensor stays small
        per_row = patterns.shape[0] * n_paths * dim
        chunk = max(1, (1 << 22) // max(1, per_row))
        for start in range(0, len(indices), chunk):
            part = indices[start : start + chunk]
            stacked = np.stack(
                [
                    np.stack([flat[list(b)].sum(axis=0) for b in groupings[i].blocks])
                    for i in part
                ]
            )  # (g, k, paths*dim)
            combos = np.einsum("pk,gkf->gpf", patterns, stacked)
            combos = combos.reshape(len(part), patterns.shape[0], n_paths, dim)
            path_stats = np.mean(norm_sq(combos), axis=1)  # (g, paths)
            for row, i in enumerate(part):
                signed = _estimate_from_path_stats(path_stats[row])
                plain = plain_for(groupings[i])
                results[i] = RandomisationCheck(
                    grouping=groupings[i],
                    signed=signed,
                    plain=plain,
                    comparison=compare_estimates(signed, plain, z=z),
                )
    return results  # type: ignore[return-value]


def check_randomisation_identity(
    measure: EmpiricalVectorMeasure, grouping: Grouping, z: float = 3.0
) -> RandomisationCheck:
    """Exact sign enumeration over the grouping's blocks against the plain
    empirical moment of the same block sum, paired on one path ensemble."""
    return randomisation_identity_sweep(measure, [grouping], z=z)[0]
