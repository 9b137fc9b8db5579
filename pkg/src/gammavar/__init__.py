"""Variation norms of vector measures on weighted atoms.

The model: a finite partition of the unit interval into atoms of positive
mass, vector measures into a finite-dimensional l_p space, and the Gaussian
and Rademacher variation norms that link them to discrete operators and
stochastic integrals against independent-increment ensembles.  Everything an
experiment reports is reproducible from (seed, config).
"""

from ._version import __version__
from .spaces import AtomPartition, EmpiricalL2Space, NormedSpace
from .groupings import Grouping, SizeLimitError, bell_number, enumerate_groupings
from .measures import (
    DiscreteOperator,
    StepFunction,
    VectorMeasure,
    density_from_document,
    density_from_measure,
    measure_from_density,
    measure_from_document,
    measure_from_operator,
    operator_from_measure,
    to_document,
)
from .random_sums import (
    Comparison,
    RandomStream,
    SumEstimate,
    compare_estimates,
    gaussian_sum_sq,
    rademacher_sum_sq,
)
from .norms import (
    DualityReport,
    NormReport,
    SharedDrawMoments,
    gamma_summing_norm,
    gamma_variation_norm,
    grouping_moment_exact,
    randomized_variation_norm,
    total_variation_norm,
    verify_duality,
)
from .brownian import (
    BrownianEnsemble,
    EmpiricalVectorMeasure,
    IntegralIdentityReport,
    RandomisationCheck,
    check_randomisation_identity,
    dump_ensemble,
    induced_randomized_measure,
    integral_moment,
    load_ensemble_paths,
    randomisation_identity_sweep,
    sample_brownian,
    stochastic_integral,
    verify_integral_identity,
)
from .embeddings import (
    EmbeddingReport,
    embedding_ratio,
    l2_bochner_norm,
    run_embedding_trials,
    sup_norm_witness,
)
from .reports import CheckRecord, SuiteReport, render_csv, render_json, render_line_chart
from .suites import (
    ConfigError,
    ExperimentConfig,
    SUITE_NAMES,
    resolve_config,
    run_integrate,
    run_norms,
    run_suite,
)

__all__ = [
    "__version__",
    "AtomPartition",
    "BrownianEnsemble",
    "CheckRecord",
    "Comparison",
    "ConfigError",
    "DiscreteOperator",
    "DualityReport",
    "EmbeddingReport",
    "EmpiricalL2Space",
    "EmpiricalVectorMeasure",
    "ExperimentConfig",
    "Grouping",
    "IntegralIdentityReport",
    "NormReport",
    "NormedSpace",
    "RandomStream",
    "RandomisationCheck",
    "SharedDrawMoments",
    "SizeLimitError",
    "StepFunction",
    "SuiteReport",
    "SumEstimate",
    "SUITE_NAMES",
    "VectorMeasure",
    "bell_number",
    "check_randomisation_identity",
    "compare_estimates",
    "density_from_document",
    "density_from_measure",
    "dump_ensemble",
    "embedding_ratio",
    "enumerate_groupings",
    "gamma_summing_norm",
    "gamma_variation_norm",
    "gaussian_sum_sq",
    "grouping_moment_exact",
    "induced_randomized_measure",
    "integral_moment",
    "l2_bochner_norm",
    "load_ensemble_paths",
    "measure_from_density",
    "measure_from_document",
    "measure_from_operator",
    "operator_from_measure",
    "rademacher_sum_sq",
    "randomisation_identity_sweep",
    "randomized_variation_norm",
    "render_csv",
    "render_json",
    "render_line_chart",
    "resolve_config",
    "run_embedding_trials",
    "run_integrate",
    "run_norms",
    "run_suite",
    "sample_brownian",
    "stochastic_integral",
    "sup_norm_witness",
    "to_document",
    "total_variation_norm",
    "verify_duality",
    "verify_integral_identity",
]
