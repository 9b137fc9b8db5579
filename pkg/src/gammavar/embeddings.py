"""Embedding constants between a density's L2 norm and its measure's variation norm.

The map phi -> F with dF = phi dmu sends the Bochner space L2(mu; X) into the
measures of finite gamma-variation.  For Hilbert X it is an isometry.  For X
of type 2 the variation norm is bounded by a constant times the L2 norm, and
for cotype 2 the reverse bound holds.  This module measures the empirical
ratio ||F||_variation / ||phi||_L2 on seeded random inputs and on canonical
witnesses; it records worst-case constants, leaving any assertion about them
to the verification suites.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import StepFunction
from .random_sums import RandomStream, gaussian_sum_sq
from .spaces import AtomPartition, NormedSpace

DIRECTIONS = ("type2", "cotype2")


def l2_bochner_norm(density: StepFunction) -> float:
    """The L2(mu; X) norm sqrt(sum_n mu(A_n) ||phi_n||^2) of a step density."""
    weights = density.partition.weights
    return float(np.sqrt(np.sum(weights * density.space.norm_sq(density.values))))


def embedding_ratio(
    density: StepFunction, stream: RandomStream | None = None, samples: int = 0
) -> tuple[float, float]:
    """Ratio of the density's measure variation norm to its L2 norm, with the
    Monte Carlo standard error of the ratio (0 when the moment is exact).

    The variation norm is evaluated at the finest covering grouping, which
    attains the supremum; a shared stream makes the ratio exactly invariant
    under rescaling the density."""
    denominator = l2_bochner_norm(density)
    if denominator == 0.0:
        raise ValueError("a vanishing density has no embedding ratio")
    rows = np.sqrt(density.partition.weights)[:, None] * density.values
    moment = gaussian_sum_sq(rows, density.space, stream=stream, samples=samples)
    ratio = float(np.sqrt(moment.value)) / denominator
    if moment.is_exact:
        return ratio, 0.0
    # delta method: se(sqrt(m)/b) = se(m) / (2 sqrt(m) b)
    return ratio, float(moment.std_error / (2.0 * np.sqrt(moment.value) * denominator))


@dataclass(frozen=True)
class EmbeddingReport:
    """Worst observed embedding ratio over seeded random trials.

    direction type2 looks for the largest ratio (upper constant), cotype2 for
    the smallest (lower constant).  ratios and std_errors are per-trial."""

    direction: str
    space: NormedSpace
    n_atoms: int
    trials: int
    samples: int
    ratios: np.ndarray
    std_errors: np.ndarray

    @property
    def worst_index(self) -> int:
        if self.direction == "type2":
            return int(np.argmax(self.ratios))
        return int(np.argmin(self.ratios))

    @property
    def worst_ratio(self) -> float:
        return float(self.ratios[self.worst_index])

    @property
    def worst_std_error(self) -> float:
        return float(self.std_errors[self.worst_index])

    def to_document(self) -> dict:
        return {
            "direction": self.direction,
            "space": {"dim": self.space.dim, "norm": self.space.norm_tag()},
            "n_atoms": self.n_atoms,
            "trials": self.trials,
            "samples": self.samples,
            "worst_ratio": self.worst_ratio,
            "worst_std_error": self.worst_std_error,
            "worst_trial": self.worst_index,
            "mean_ratio": float(np.mean(self.ratios)),
            "ratios": [float(r) for r in self.ratios],
            "std_errors": [float(s) for s in self.std_errors],
        }


def _validate_direction(direction: str, space: NormedSpace) -> None:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if direction == "type2" and not space.p >= 2:
        raise ValueError(f"the type-2 direction needs p >= 2, got p = {space.p}")
    if direction == "cotype2" and not space.p <= 2:
        raise ValueError(f"the cotype-2 direction needs p <= 2, got p = {space.p}")


def run_embedding_trials(
    direction: str,
    space: NormedSpace,
    n_atoms: int,
    trials: int,
    stream: RandomStream,
    samples: int = 0,
) -> EmbeddingReport:
    """Draw seeded random densities and report the worst embedding ratio.

    Trial t uses substream t: weights from a flat Dirichlet, density values
    with i.i.d. standard Gaussian coordinates, and an independent coefficient
    stream for the moment estimate, so the report is reproducible and each
    trial is unaffected by the total trial count."""
    _validate_direction(direction, space)
    if trials < 1:
        raise ValueError("need at least one trial")
    ratios = np.empty(trials)
    std_errors = np.empty(trials)
    for t in range(trials):
        trial_stream = stream.substream(t)
        rng = trial_stream.substream(0).generator()
        weights = rng.dirichlet(np.ones(n_atoms))
        weights = np.maximum(weights, 1e-9)  # guard against underflow
        weights = weights / weights.sum()
        values = rng.standard_normal((n_atoms, space.dim))
        density = StepFunction(AtomPartition(weights), space, values)
        ratios[t], std_errors[t] = embedding_ratio(
            density, stream=trial_stream.substream(1), samples=samples
        )
    return EmbeddingReport(
        direction=direction,
        space=space,
        n_atoms=n_atoms,
        trials=trials,
        samples=samples,
        ratios=ratios,
        std_errors=std_errors,
    )


def sup_norm_witness() -> StepFunction:
    """Two-atom density in sup-norm R^2 whose embedding ratio is sqrt(1 + 2/pi).

    With uniform weights and values (1, 1), (1, -1), the normalized Gaussian
    sum has independent standard coordinates, so the variation moment is
    E max(g1^2, g2^2) = 1 + 2/pi while the density's L2 norm is 1."""
    partition = AtomPartition([0.5, 0.5])
    space = NormedSpace(2, np.inf)
    return StepFunction(partition, space, [[1.0, 1.0], [1.0, -1.0]])
