"""Variation norms of atomic vector measures and the dual operator norm.

For a measure F on weighted atoms, the gamma-variation squared moment of a
grouping {B_1..B_k} is E || sum_m g_m F(B_m)/sqrt(mu(B_m)) ||^2 with standard
Gaussian coefficients; the norm is the supremum over groupings.  The dual view
is the Gaussian-summing norm of the operator with columns F(A_n)/sqrt(mu(A_n)),
whose squared moment is E || T g ||^2 over the full normalized-indicator basis.

The randomized variation drops the 1/sqrt(mu) normalization and uses
Rademacher signs, so its supremum genuinely depends on the grouping and is
located by search.  The total variation is the exact sum of atom-value norms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .groupings import Grouping, enumerate_groupings
from .measures import DiscreteOperator, VectorMeasure, operator_from_measure
from .random_sums import (
    Comparison,
    RandomStream,
    SumEstimate,
    METHOD_EXACT_HILBERT,
    N_BATCHES,
    _batch_sizes,
    _estimate_from_moments,
    compare_estimates,
    gaussian_sum_sq,
    rademacher_sum_sq,
)
from .spaces import EmpiricalL2Space, NormedSpace

VARIATION_MODES = ("fast_path", "exhaustive", "contiguous")
RANDOMIZED_MODES = ("auto", "exhaustive", "contiguous", "greedy")


@dataclass(frozen=True)
class NormReport:
    """A norm value with its squared-moment estimate and attaining grouping."""

    norm: float
    moment: SumEstimate
    grouping: Grouping
    mode: str

    def to_document(self) -> dict:
        return {
            "norm": self.norm,
            "moment": self.moment.to_document(),
            "grouping": self.grouping.to_lists(),
            "mode": self.mode,
        }


@dataclass(frozen=True)
class DualityReport:
    """Measure-side and operator-side norms with their consistency verdict."""

    measure_report: NormReport
    operator_report: NormReport
    comparison: Comparison

    @property
    def consistent(self) -> bool:
        return self.comparison.consistent

    def to_document(self) -> dict:
        return {
            "measure": self.measure_report.to_document(),
            "operator": self.operator_report.to_document(),
            "comparison": self.comparison.to_document(),
        }


def block_sums(values: np.ndarray, grouping: Grouping) -> np.ndarray:
    """Sum values (atom-indexed on axis 0) over each block of the grouping."""
    return np.stack([np.sum(values[list(b)], axis=0) for b in grouping.blocks])


def _normalized_vectors(measure: VectorMeasure) -> np.ndarray:
    return measure.values / np.sqrt(measure.partition.weights)[:, None]


def _grouping_matrix(measure: VectorMeasure, grouping: Grouping) -> np.ndarray:
    """Atom-coefficient matrix realizing a grouping's Gaussian sum from the
    finest one.

    Row n is sqrt(w_n) F(B)/mu(B) for the block B containing atom n (zero for
    uncovered atoms), so right-multiplying a standard Gaussian matrix yields
    sum_m g_m F(B_m)/sqrt(mu(B_m)) in distribution, with draws shared across
    groupings for paired comparisons.
    """
    weights = measure.partition.weights
    mat = np.zeros_like(measure.values)
    for block in grouping.blocks:
        idx = list(block)
        mass = float(np.sum(weights[idx]))
        value = np.sum(measure.values[idx], axis=0)
        mat[idx] = np.sqrt(weights[idx])[:, None] * (value / mass)[None, :]
    return mat


def grouping_moment_exact(measure: VectorMeasure, grouping: Grouping) -> float:
    """Hilbert closed form of a grouping's squared moment: sum ||F(B)||^2/mu(B)."""
    weights = measure.partition.weights
    total = 0.0
    for block in grouping.blocks:
        idx = list(block)
        mass = float(np.sum(weights[idx]))
        value = np.sum(measure.values[idx], axis=0)
        total += float(measure.space.norm_sq(value)) / mass
    return total


class SharedDrawMoments:
    """Squared-moment estimates for many groupings of one measure, reusing one
    set of Gaussian draws (paired estimates; Hilbert spaces are exact)."""

    def __init__(
        self,
        measure: VectorMeasure,
        stream: RandomStream | None = None,
        samples: int = 0,
    ):
        self.measure = measure
        self.exact = measure.space.is_hilbert
        if not self.exact:
            if stream is None or samples < 2:
                raise ValueError(
                    "Monte Carlo estimation requires a RandomStream and at least 2 samples"
                )
            blocks = []
            for batch, size in enumerate(_batch_sizes(samples)):
                if size == 0:
                    continue
                rng = stream.substream(batch).generator()
                blocks.append(rng.standard_normal((size, measure.n_atoms)))
            self._draws = np.concatenate(blocks, axis=0)

    def moment(self, grouping: Grouping) -> SumEstimate:
        if self.exact:
            return SumEstimate(
                value=grouping_moment_exact(self.measure, grouping),
                std_error=0.0,
                samples=0,
                method=METHOD_EXACT_HILBERT,
            )
        stats = self.measure.space.norm_sq(
            self._draws @ _grouping_matrix(self.measure, grouping)
        )
        n = stats.size
        return _estimate_from_moments(n, float(np.sum(stats)), float(np.sum(stats * stats)))


def _search_best(
    candidates: Iterable[Grouping], evaluate
) -> tuple[Grouping, SumEstimate]:
    """Maximize the estimate over candidates.  Ties go to fewer blocks, then to
    the lexicographically smallest block structure."""
    best = None
    for grouping in candidates:
        estimate = evaluate(grouping)
        if best is None:
            best = (grouping, estimate)
            continue
        if estimate.value > best[1].value or (
            estimate.value == best[1].value
            and grouping.sort_key() < best[0].sort_key()
        ):
            best = (grouping, estimate)
    if best is None:
        raise ValueError("no candidate groupings to search")
    return best


def gamma_variation_norm(
    measure: VectorMeasure,
    stream: RandomStream | None = None,
    samples: int = 0,
    mode: str = "fast_path",
) -> NormReport:
    """Gamma-variation norm of a measure.

    mode="fast_path" evaluates only the finest covering grouping (the supremum
    sits there; the search modes exist to verify that).  "exhaustive" scans
    every grouping, covering or not; "contiguous" scans interval groupings.
    Hilbert values are exact; otherwise Monte Carlo draws are shared across
    all scanned groupings.
    """
    if mode not in VARIATION_MODES:
        raise ValueError(f"mode must be one of {VARIATION_MODES}, got {mode!r}")
    if mode == "fast_path":
        moment = gaussian_sum_sq(
            _normalized_vectors(measure), measure.space, stream, samples
        )
        grouping = Grouping.finest(measure.n_atoms)
        return NormReport(float(np.sqrt(moment.value)), moment, grouping, mode)
    shared = SharedDrawMoments(measure, stream, samples)
    enum_mode = "all" if mode == "exhaustive" else "contiguous"
    grouping, moment = _search_best(
        enumerate_groupings(measure.n_atoms, enum_mode), shared.moment
    )
    return NormReport(float(np.sqrt(moment.value)), moment, grouping, mode)


def gamma_summing_norm(
    operator: DiscreteOperator,
    stream: RandomStream | None = None,
    samples: int = 0,
) -> NormReport:
    """Gaussian-summing norm of an operator: sqrt(E || T g ||^2) over the full
    normalized-indicator basis (finite rank makes this the supremum over all
    orthonormal systems)."""
    moment = gaussian_sum_sq(operator.columns, operator.space, stream, samples)
    grouping = Grouping.finest(operator.n_atoms)
    return NormReport(float(np.sqrt(moment.value)), moment, grouping, "fast_path")


def verify_duality(
    measure: VectorMeasure,
    stream: RandomStream,
    samples: int = 0,
    z: float = 3.0,
) -> DualityReport:
    """Check that the measure norm matches the dual operator norm.

    The two sides use independent substreams; Hilbert spaces compare exactly.
    """
    measure_report = gamma_variation_norm(
        measure, stream.substream(0), samples, mode="fast_path"
    )
    operator_report = gamma_summing_norm(
        operator_from_measure(measure), stream.substream(1), samples
    )
    comparison = compare_estimates(measure_report.moment, operator_report.moment, z=z)
    return DualityReport(measure_report, operator_report, comparison)


def total_variation_norm(measure: VectorMeasure) -> float:
    """Exact total variation: the atom-value norms summed (the finest
    partition attains the supremum by the triangle inequality)."""
    return float(np.sum(measure.space.norm(measure.values)))


# --- randomized variation ------------------------------------------------------


def _greedy_trajectory(
    values: np.ndarray, space, evaluate
) -> Iterator[Grouping]:
    """Groupings visited by greedy merging from the finest covering grouping.

    Each round merges the pair of blocks whose merge most increases the
    objective; stops when no merge improves it.
    """
    n_atoms = values.shape[0]
    current = Grouping.finest(n_atoms)
    yield current
    current_value = evaluate(current).value
    while current.n_blocks > 1:
        best = None
        for i, j in itertools.combinations(range(current.n_blocks), 2):
            merged_blocks = [
                b for m, b in enumerate(current.blocks) if m not in (i, j)
            ]
            merged_blocks.append(current.blocks[i] + current.blocks[j])
            candidate = Grouping(merged_blocks, n_atoms)
            value = evaluate(candidate).value
            if best is None or value > best[1] or (
                value == best[1] and candidate.sort_key() < best[0].sort_key()
            ):
                best = (candidate, value)
        if best is None or best[1] <= current_value:
            return
        current, current_value = best
        yield current


def randomized_variation_norm(
    values,
    space,
    mode: str = "auto",
    stream: RandomStream | None = None,
    samples: int = 0,
) -> NormReport:
    """Randomized variation norm: sup over groupings of
    sqrt(E || sum_m r_m G(B_m) ||^2) with Rademacher signs and no weight
    normalization.

    values is atom-indexed on axis 0: shape (N, d) with a NormedSpace, or
    (N, paths, d) with an EmpiricalL2Space.  The supremum location depends on
    the input (merging aligned blocks can win), so the default search is
    exhaustive for N <= 12 and contiguous-plus-greedy-merge beyond that.
    Objectives are exact sign enumerations up to 20 blocks; the stream and
    samples are only consulted past that.
    """
    if mode not in RANDOMIZED_MODES:
        raise ValueError(f"mode must be one of {RANDOMIZED_MODES}, got {mode!r}")
    arr = np.asarray(values, dtype=float)
    n_atoms = arr.shape[0]

    cache: dict[Grouping, SumEstimate] = {}
    counter = itertools.count()

    def evaluate(grouping: Grouping) -> SumEstimate:
        found = cache.get(grouping)
        if found is None:
            sub = stream.substream(next(counter)) if stream is not None else None
            found = rademacher_sum_sq(
                block_sums(arr, grouping), space, sub, samples
            )
            cache[grouping] = found
        return found

    if mode == "auto":
        mode_used = "exhaustive" if n_atoms <= 12 else "contiguous+greedy"
    else:
        mode_used = mode

    if mode_used == "exhaustive":
        candidates: Iterable[Grouping] = enumerate_groupings(n_atoms, "all")
    elif mode_used == "contiguous":
        candidates = enumerate_groupings(n_atoms, "contiguous")
    elif mode_used == "greedy":
        candidates = _greedy_trajectory(arr, space, evaluate)
    else:  # contiguous+greedy
        def chain() -> Iterator[Grouping]:
            if n_atoms <= 20:
                yield from enumerate_groupings(n_atoms, "contiguous")
            yield from _greedy_trajectory(arr, space, evaluate)

        candidates = chain()

    grouping, moment = _search_best(candidates, evaluate)
    return NormReport(float(np.sqrt(moment.value)), moment, grouping, mode_used)
