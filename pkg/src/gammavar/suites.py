"""Config resolution and the named verification suites behind the CLI.

Every suite derives all randomness from (seed, suite namespace, instance
index), so reports are reproducible and invariant to the thread count used to
run the instances.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._version import __version__
from .brownian import (
    induced_randomized_measure,
    randomisation_identity_sweep,
    sample_brownian,
    verify_integral_identity,
)
from .embeddings import embedding_ratio, run_embedding_trials, sup_norm_witness
from .groupings import Grouping, enumerate_groupings
from .measures import (
    StepFunction,
    VectorMeasure,
    measure_from_density,
    operator_from_measure,
)
from .norms import (
    SharedDrawMoments,
    gamma_summing_norm,
    gamma_variation_norm,
    randomized_variation_norm,
    total_variation_norm,
    verify_duality,
)
from .random_sums import (
    RandomStream,
    SumEstimate,
    METHOD_EXACT_HILBERT,
    compare_estimates,
    rademacher_sum_sq,
)
from .reports import CheckRecord, SuiteReport
from .spaces import AtomPartition, EmpiricalL2Space, NormedSpace

SUITE_NAMES = (
    "thm-2-3",
    "thm-3-3",
    "cor-2-5",
    "cor-2-6",
    "example-3-4",
    "finest-partition",
    "randomisation",
)

# substream namespaces; one per entry point, never reused
_NAMESPACES = {
    "thm-2-3": 1,
    "thm-3-3": 2,
    "cor-2-5": 3,
    "cor-2-6": 4,
    "example-3-4": 5,
    "finest-partition": 6,
    "randomisation": 7,
    "norms": 8,
    "integrate": 9,
}

ENGINE_DEFAULTS = {
    "seed": 0,
    "samples": 100_000,
    "paths": 100_000,
    "z": 3.0,
    "mode": "auto",
}

SUITE_DEFAULTS: dict[str, dict] = {
    "thm-2-3": {
        "instances": 100,
        "norms": ["l1", "linf"],
        "dims": [2, 3],
        "min_atoms": 2,
        "max_atoms": 8,
    },
    "thm-3-3": {
        "instances": 20,
        "norms": ["l2", "l1", "linf"],
        "dims": [2, 3],
        "n_atoms": 4,
    },
    "cor-2-5": {
        "isometry_trials": 1000,
        "isometry_atoms": 4,
        "isometry_dim": 2,
        "witness_samples": 100_000,
        "survey_trials": 200,
        "survey_samples": 10_000,
    },
    "cor-2-6": {
        "trials": 1000,
        "n_atoms": 2,
        "dim": 2,
        "norms": ["l1", {"lp": 1.5}],
        "trial_samples": 10_000,
    },
    "example-3-4": {
        "n_grid": [4, 16, 64, 100, 10_000],
        "empirical_limit": 100,
        "exhaustive_limit": 12,
        "dense_limit": 256,
    },
    "finest-partition": {
        "measures": 10,
        "n_atoms": 6,
        "dim": 2,
        "norms": ["l1", "l2", "linf"],
    },
    "randomisation": {
        "measures": 10,
        "n_atoms": 8,
        "dim": 2,
        "norms": ["l1", "l2", "linf"],
        "max_blocks": 8,
    },
}

_ENGINE_OVERRIDES: dict[str, dict] = {
    "thm-3-3": {"paths": 30_000},
    "cor-2-6": {"samples": 10_000},
    "randomisation": {"paths": 1500},
}


class ConfigError(ValueError):
    """A config document failed validation; the message names the field."""


@dataclass
class ExperimentConfig:
    """A fully resolved experiment configuration.

    Thread count and output paths are deliberately absent: they may not
    influence any reported numeric.
    """

    seed: int
    samples: int
    paths: int
    z: float
    mode: str
    partition: AtomPartition | None = None
    space: NormedSpace | None = None
    measure_values: list | None = None
    density_values: list | None = None
    suite: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """The config document a rerun needs to reproduce this report."""
        doc: dict = {
            "engine": {
                "seed": self.seed,
                "samples": self.samples,
                "paths": self.paths,
                "z": self.z,
                "mode": self.mode,
            }
        }
        if self.partition is not None:
            if self.partition.boundaries is not None:
                doc["partition"] = {
                    "boundaries": [float(b) for b in self.partition.boundaries]
                }
            else:
                doc["partition"] = {
                    "weights": [float(w) for w in self.partition.weights]
                }
        if self.space is not None:
            doc["space"] = {"dim": self.space.dim, "norm": self.space.norm_tag()}
        if self.measure_values is not None:
            doc["input"] = {"measure": self.measure_values}
        elif self.density_values is not None:
            doc["input"] = {"density": self.density_values}
        if self.suite:
            doc["suite"] = self.suite
        return doc

    def root_stream(self, entry: str) -> RandomStream:
        return RandomStream(self.seed, (_NAMESPACES[entry],))

    def measure(self) -> VectorMeasure:
        if self.partition is None or self.space is None:
            raise ConfigError("this command needs partition and space sections")
        if self.measure_values is not None:
            return VectorMeasure(self.partition, self.space, self.measure_values)
        if self.density_values is not None:
            return measure_from_density(self.density())
        raise ConfigError("input: needs measure or density values")

    def density(self) -> StepFunction:
        if self.partition is None or self.space is None:
            raise ConfigError("this command needs partition and space sections")
        if self.density_values is None:
            raise ConfigError("input: needs density values")
        return StepFunction(self.partition, self.space, self.density_values)


def _expect_mapping(doc, name: str) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(f"{name}: expected a JSON object, got {type(doc).__name__}")
    return doc


def _positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{name}: expected a positive integer, got {value!r}")
    return value


def _parse_partition(doc) -> AtomPartition:
    doc = _expect_mapping(doc, "partition")
    keys = set(doc)
    if len(keys & {"uniform", "weights", "boundaries"}) != 1 or keys - {
        "uniform",
        "weights",
        "boundaries",
    }:
        raise ConfigError(
            "partition: give exactly one of 'uniform', 'weights', 'boundaries'"
        )
    try:
        if "uniform" in doc:
            return AtomPartition.uniform(_positive_int(doc["uniform"], "partition.uniform"))
        if "weights" in doc:
            return AtomPartition(doc["weights"])
        return AtomPartition.from_boundaries(doc["boundaries"])
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"partition: {exc}") from exc


def _parse_space(doc) -> NormedSpace:
    doc = _expect_mapping(doc, "space")
    if set(doc) - {"dim", "norm"}:
        raise ConfigError(f"space: unknown keys {sorted(set(doc) - {'dim', 'norm'})}")
    dim = _positive_int(doc.get("dim", 0), "space.dim")
    try:
        return NormedSpace.from_tag(dim, doc.get("norm", "l2"))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"space.norm: {exc}") from exc


def _space_from_tag(tag, dim: int, name: str) -> NormedSpace:
    try:
        return NormedSpace.from_tag(dim, tag)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def resolve_config(
    document: dict | None,
    suite_name: str | None = None,
    overrides: dict | None = None,
) -> ExperimentConfig:
    """Merge defaults, a config document, and CLI overrides, then validate.

    Precedence: per-suite defaults < config file < CLI flags.
    """
    document = _expect_mapping(document or {}, "config")
    unknown = set(document) - {"partition", "space", "input", "engine", "suite", "output"}
    if unknown:
        raise ConfigError(f"config: unknown sections {sorted(unknown)}")

    engine = dict(ENGINE_DEFAULTS)
    if suite_name is not None:
        engine.update(_ENGINE_OVERRIDES.get(suite_name, {}))
    engine_doc = _expect_mapping(document.get("engine", {}), "engine")
    unknown = set(engine_doc) - set(ENGINE_DEFAULTS)
    if unknown:
        raise ConfigError(f"engine: unknown keys {sorted(unknown)}")
    engine.update(engine_doc)
    for key, value in (overrides or {}).items():
        if value is not None:
            engine[key] = value

    seed = engine["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"engine.seed: expected a nonnegative integer, got {seed!r}")
    samples = _positive_int(engine["samples"], "engine.samples")
    paths = _positive_int(engine["paths"], "engine.paths")
    z = engine["z"]
    if not isinstance(z, (int, float)) or isinstance(z, bool) or not z > 0:
        raise ConfigError(f"engine.z: expected a positive number, got {z!r}")
    mode = engine["mode"]
    if mode not in ("auto", "fast_path", "exhaustive", "contiguous", "greedy"):
        raise ConfigError(f"engine.mode: unknown mode {mode!r}")

    suite_params: dict = {}
    if suite_name is not None:
        suite_params = dict(SUITE_DEFAULTS.get(suite_name, {}))
        suite_doc = _expect_mapping(document.get("suite", {}), "suite")
        unknown = set(suite_doc) - set(suite_params)
        if unknown:
            raise ConfigError(
                f"suite: unknown parameters {sorted(unknown)} for {suite_name}"
            )
        suite_params.update(suite_doc)
    elif "suite" in document:
        raise ConfigError("suite: section only applies to 'verify' runs")

    partition = space = None
    if "partition" in document:
        partition = _parse_partition(document["partition"])
    if "space" in document:
        space = _parse_space(document["space"])

    measure_values = density_values = None
    if "input" in document:
        input_doc = _expect_mapping(document["input"], "input")
        if len(input_doc) != 1 or set(input_doc) - {"measure", "density"}:
            raise ConfigError("input: give exactly one of 'measure', 'density'")
        measure_values = input_doc.get("measure")
        density_values = input_doc.get("density")

    outputs = {}
    if "output" in document:
        output_doc = _expect_mapping(document["output"], "output")
        unknown = set(output_doc) - {"report", "csv", "svg"}
        if unknown:
            raise ConfigError(f"output: unknown keys {sorted(unknown)}")
        outputs = {k: str(v) for k, v in output_doc.items()}

    config = ExperimentConfig(
        seed=int(seed),
        samples=samples,
        paths=paths,
        z=float(z),
        mode=str(mode),
        partition=partition,
        space=space,
        measure_values=measure_values,
        density_values=density_values,
        suite=suite_params,
        outputs=outputs,
    )
    if measure_values is not None or density_values is not None:
        config.measure()  # validate shapes and finiteness up front
    return config


def _ordered_map(fn: Callable, items: list, threads: int) -> list:
    """Map preserving order; results are independent of the thread count."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _random_partition(rng: np.random.Generator, n_atoms: int) -> AtomPartition:
    weights = rng.dirichlet(np.ones(n_atoms))
    weights = np.maximum(weights, 1e-9)  # guard against underflow
    return AtomPartition(weights / weights.sum())


def _comparison_values(name_a: str, est_a: SumEstimate, name_b: str, est_b: SumEstimate):
    values = {name_a: est_a.value, name_b: est_b.value}
    errors = {name_a: est_a.std_error, name_b: est_b.std_error}
    return values, errors


def _report(suite: str, config: ExperimentConfig, checks: list[CheckRecord]) -> SuiteReport:
    return SuiteReport(
        suite=suite, config=config.echo(), checks=checks, version=__version__
    )


# --- thm-2-3: measure norm vs dual operator norm ---------------------------------


def _duality_instance(args) -> CheckRecord:
    index, norm_tag, dim, n_atoms, stream, samples, z = args
    rng = stream.substream(0).generator()
    partition = _random_partition(rng, n_atoms)
    space = _space_from_tag(norm_tag, dim, "suite.norms")
    values = rng.standard_normal((n_atoms, dim))
    measure = VectorMeasure(partition, space, values)
    result = verify_duality(measure, stream.substream(1), samples, z=z)
    values_doc, errors = _comparison_values(
        "variation_moment",
        result.measure_report.moment,
        "summing_moment",
        result.operator_report.moment,
    )
    comparison = result.comparison
    return CheckRecord(
        name=f"duality-{index:03d}",
        values={**values_doc, "gap": comparison.gap, "tolerance": comparison.tolerance},
        std_errors=errors,
        verdict="pass" if result.consistent else "fail",
        detail=f"norm={space.norm_tag()} dim={dim} atoms={n_atoms}",
    )


def _run_duality_suite(config: ExperimentConfig, threads: int) -> SuiteReport:
    params = config.suite
    root = config.root_stream("thm-2-3")
    if config.measure_values is not None or config.density_values is not None:
        measure = config.measure()
        result = verify_duality(measure, root.substream(0), config.samples, z=config.z)
        values, errors = _comparison_values(
            "variation_moment",
            result.measure_report.moment,
            "summing_moment",
            result.operator_report.moment,
        )
        checks = [
            CheckRecord(
                name="duality-explicit",
                values=values,
                std_errors=errors,
                verdict="pass" if result.consistent else "fail",
                detail="configured input",
            )
        ]
        return _report("thm-2-3", config, checks)

    cells = [
        (norm_tag, dim, n)
        for norm_tag in params["norms"]
        for dim in params["dims"]
        for n in range(params["min_atoms"], params["max_atoms"] + 1)
    ]
    if not cells:
        raise ConfigError("suite: empty instance grid")
    jobs = []
    for i in range(_positive_int(params["instances"], "suite.instances")):
        norm_tag, dim, n = cells[i % len(cells)]
        jobs.append((i, norm_tag, dim, n, root.substream(i), config.samples, config.z))
    checks = _ordered_map(_duality_instance, jobs, threads)
    failures = sum(1 for c in checks if c.verdict == "fail")
    checks.append(
        CheckRecord(
            name="duality-summary",
            values={"instances": len(jobs), "failures": failures},
            verdict="pass" if failures == 0 else "fail",
        )
    )
    return _report("thm-2-3", config, checks)


# --- thm-3-3: variation norm = randomized variation = integral moment ------------


def _identity_records(index: int, label: str, report) -> list[CheckRecord]:
    names = {
        "variation_vs_randomized": ("variation_moment", "randomized_moment"),
        "variation_vs_integral": ("variation_moment", "integral_moment"),
        "randomized_vs_integral": ("randomized_moment", "integral_moment"),
    }
    estimates = {
        "variation_moment": report.variation.moment,
        "randomized_moment": report.randomized.moment,
        "integral_moment": report.integral,
    }
    records = []
    for pair, (left, right) in names.items():
        comparison = report.comparisons[pair]
        values, errors = _comparison_values(left, estimates[left], right, estimates[right])
        records.append(
            CheckRecord(
                name=f"identity-{index:02d}-{pair.replace('_', '-')}",
                values={**values, "gap": comparison.gap, "tolerance": comparison.tolerance},
                std_errors=errors,
                verdict="pass" if comparison.consistent else "fail",
                detail=label,
            )
        )
    return records


def _identity_instance(args) -> list[CheckRecord]:
    index, norm_tag, dim, n_atoms, stream, paths, samples, mode, z = args
    rng = stream.substream(0).generator()
    partition = _random_partition(rng, n_atoms)
    space = _space_from_tag(norm_tag, dim, "suite.norms")
    density = StepFunction(partition, space, rng.standard_normal((n_atoms, dim)))
    report = verify_integral_identity(
        density, paths, stream.substream(1), samples, search_mode=mode, z=z
    )
    return _identity_records(
        index, f"norm={space.norm_tag()} dim={dim} atoms={n_atoms}", report
    )


def _run_identity_suite(config: ExperimentConfig, threads: int) -> SuiteReport:
    params = config.suite
    root = config.root_stream("thm-3-3")
    mode = "auto" if config.mode == "fast_path" else config.mode
    if config.density_values is not None:
        report = verify_integral_identity(
            config.density(),
            config.paths,
            root.substream(0),
            config.samples,
            search_mode=mode,
            z=config.z,
        )
        checks = _identity_records(0, "configured input", report)
        return _report("thm-3-3", config, checks)

    jobs = []
    norms, dims = params["norms"], params["dims"]
    for i in range(_positive_int(params["instances"], "suite.instances")):
        norm_tag = norms[i % len(norms)]
        dim = dims[(i // len(norms)) % len(dims)]
        jobs.append(
            (
                i,
                norm_tag,
                dim,
                params["n_atoms"],
                root.substream(i),
                config.paths,
                config.samples,
                mode,
                config.z,
            )
        )
    nested = _ordered_map(_identity_instance, jobs, threads)
    checks = [record for group in nested for record in group]
    failures = sum(1 for c in checks if c.verdict == "fail")
    checks.append(
        CheckRecord(
            name="identity-summary",
            values={"instances": len(jobs), "failures": failures},
            verdict="pass" if failures == 0 else "fail",
        )
    )
    return _report("thm-3-3", config, checks)


# --- cor-2-5: upper embedding constant (type-2 side) ------------------------------


def _run_upper_embedding_suite(config: ExperimentConfig, threads: int) -> SuiteReport:
    params = config.suite
    root = config.root_stream("cor-2-5")
    checks: list[CheckRecord] = []

    isometry = run_embedding_trials(
        "type2",
        NormedSpace.l2(params["isometry_dim"]),
        params["isometry_atoms"],
        _positive_int(params["isometry_trials"], "suite.isometry_trials"),
        root.substream(0),
        samples=0,
    )
    deviation = float(np.max(np.abs(isometry.ratios - 1.0)))
    checks.append(
        CheckRecord(
            name="hilbert-isometry",
            values={
                "max_abs_deviation": deviation,
                "trials": isometry.trials,
                "worst_ratio": isometry.worst_ratio,
            },
            verdict="pass" if deviation <= 1e-9 else "fail",
            detail="every trial ratio must equal 1 to 1e-9",
        )
    )

    target = math.sqrt(1.0 + 2.0 / math.pi)
    ratio, se = embedding_ratio(
        sup_norm_witness(),
        root.substream(1),
        _positive_int(params["witness_samples"], "suite.witness_samples"),
    )
    gap = abs(ratio - target)
    tolerance = config.z * se
    checks.append(
        CheckRecord(
            name="sup-norm-witness",
            values={"ratio": ratio, "target": target, "gap": gap, "tolerance": tolerance},
            std_errors={"ratio": se},
            verdict="pass" if gap <= tolerance else "fail",
            detail="canonical two-atom witness in sup-norm R^2",
        )
    )

    survey = run_embedding_trials(
        "type2",
        NormedSpace.linf(2),
        2,
        _positive_int(params["survey_trials"], "suite.survey_trials"),
        root.substream(2),
        samples=_positive_int(params["survey_samples"], "suite.survey_samples"),
    )
    checks.append(
        CheckRecord(
            name="sup-norm-survey",
            values={
                "largest_ratio": survey.worst_ratio,
                "mean_ratio": float(np.mean(survey.ratios)),
                "trials": survey.trials,
            },
            std_errors={"largest_ratio": survey.worst_std_error},
            verdict="info",
            detail="upper constant is reported, not asserted",
        )
    )
    return _report("cor-2-5", config, checks)


# --- cor-2-6: lower embedding constant (cotype-2 side) ----------------------------


def _run_lower_embedding_suite(config: ExperimentConfig, threads: int) -> SuiteReport:
    params = config.suite
    root = config.root_stream("cor-2-6")
    trials = _positive_int(params["trials"], "suite.trials")
    samples = _positive_int(params["trial_samples"], "suite.trial_samples")
    dim = _positive_int(params["dim"], "suite.dim")
    n_atoms = _positive_int(params["n_atoms"], "suite.n_atoms")

    def run_space(args):
        j, norm_tag = args
        space = _space_from_tag(norm_tag, dim, "suite.norms")
        report = run_embedding_trials(
            "cotype2", space, n_atoms, trials, root.substream(j), samples=samples
        )
        threshold = 1.0 - config.z * report.worst_std_error
        passed = report.worst_ratio >= threshold
        detail = (
            f"smallest ratio over {trials} trials at trial {report.worst_index}; "
            f"the lower bound requires at least {threshold!r}"
        )
        return CheckRecord(
            name=f"lower-bound-{_norm_label(norm_tag)}",
            values={
                "min_ratio": report.worst_ratio,
                "threshold": threshold,
                "mean_ratio": float(np.mean(report.ratios)),
                "trials_below_one": int(np.sum(report.ratios < 1.0)),
            },
            std_errors={"min_ratio": report.worst_std_error},
            verdict="pass" if passed else "fail",
            detail=detail,
        )

    jobs = list(enumerate(params["norms"]))
    checks = _ordered_map(run_space, jobs, threads)
    return _report("cor-2-6", config, checks)


def _norm_label(tag) -> str:
    if isinstance(tag, dict):
        return f"lp{tag.get('lp')}"
    return str(tag)


# --- example-3-4: bounded gamma-variation, unbounded total variation --------------


def _orthogonal_increments_measure(partition: AtomPartition) -> VectorMeasure:
    """Exact model of orthogonal atom increments: atom n maps to
    sqrt(mu(A_n)) e_n in R^N with the Euclidean norm."""
    n = partition.n_atoms
    values = np.zeros((n, n))
    np.fill_diagonal(values, np.sqrt(partition.weights))
    return VectorMeasure(partition, NormedSpace.l2(n), values)


def _scalar_magnitude_measure(partition: AtomPartition) -> VectorMeasure:
    """One-dimensional stand-in with the same atom norms; total variation
    depends on nothing else, so this avoids an N x N dense matrix."""
    values = np.sqrt(partition.weights)[:, None]
    return VectorMeasure(partition, NormedSpace.l2(1), values)


def _fixed_grouping_family(n_atoms: int) -> list[Grouping]:
    family = [Grouping.finest(n_atoms)]
    if n_atoms >= 2:
        half = n_atoms // 2
        family.append(
            Grouping([list(range(half)), list(range(half, n_atoms))], n_atoms)
        )
        family.append(Grouping([list(range(n_atoms))], n_atoms))
    return family


def _divergence_point(args) -> list[CheckRecord]:
    n, params, stream, paths, z = args
    partition = AtomPartition.uniform(n)
    expected_tv = math.sqrt(n)
    dense = n <= params["dense_limit"]
    measure = (
        _orthogonal_increments_measure(partition)
        if dense
        else _scalar_magnitude_measure(partition)
    )
    tv = total_variation_norm(measure)
    checks = [
        CheckRecord(
            name=f"total-variation-n{n}",
            values={"n": n, "total_variation": tv, "expected": expected_tv},
            verdict="pass" if abs(tv - expected_tv) <= 1e-9 else "fail",
            detail="exact sum of atom increment norms"
            + ("" if dense else " (scalar-magnitude model)"),
        )
    ]
    if not dense:
        return checks

    # exact randomized variation: orthogonality makes every covering grouping 1
    if n <= params["exhaustive_limit"]:
        exact = randomized_variation_norm(measure.values, measure.space, mode="exhaustive")
        exact_value, exact_detail = exact.norm, "exhaustive grouping search, exact"
    else:
        moments = [
            rademacher_sum_sq(measure.block_values(g), measure.space)
            for g in _fixed_grouping_family(n)
        ]
        exact_value = math.sqrt(max(m.value for m in moments))
        exact_detail = "fixed covering groupings, exact"
    checks.append(
        CheckRecord(
            name=f"randomized-exact-n{n}",
            values={"n": n, "randomized_variation": exact_value, "expected": 1.0},
            verdict="pass" if abs(exact_value - 1.0) <= 1e-12 else "fail",
            detail=exact_detail,
        )
    )

    if n <= params["empirical_limit"]:
        ensemble = sample_brownian(partition, paths, stream)
        contributions = np.ascontiguousarray(ensemble.paths.T)[:, :, None]
        empirical_space = EmpiricalL2Space(NormedSpace.l2(1))
        if n <= params["exhaustive_limit"]:
            report = randomized_variation_norm(
                contributions, empirical_space, mode="exhaustive"
            )
            estimate = report.moment
        else:
            family = _fixed_grouping_family(n)
            per_grouping = [
                rademacher_sum_sq(
                    np.stack([contributions[list(b)].sum(axis=0) for b in g.blocks]),
                    empirical_space,
                )
                for g in family
            ]
            estimate = max(per_grouping, key=lambda e: e.value)
        reference = SumEstimate(1.0, 0.0, 0, METHOD_EXACT_HILBERT)
        comparison = compare_estimates(reference, estimate, z=z)
        checks.append(
            CheckRecord(
                name=f"randomized-empirical-n{n}",
                values={
                    "n": n,
                    "randomized_moment": estimate.value,
                    "expected": 1.0,
                    "gap": comparison.gap,
                    "tolerance": comparison.tolerance,
                },
                std_errors={"randomized_moment": estimate.std_error},
                verdict="pass" if comparison.consistent else "fail",
                detail=f"path ensemble of {paths} draws",
            )
        )
    return checks


def _run_divergence_suite(config: ExperimentConfig, threads: int) -> SuiteReport:
    params = config.suite
    root = config.root_stream("example-3-4")
    grid = params["n_grid"]
    if not isinstance(grid, list) or not grid:
        raise ConfigError("suite.n_grid: expected a nonempty list of atom counts")
    jobs = [
        (_positive_int(n, "suite.n_grid"), params, root.substream(i), config.paths, config.z)
        for i, n in enumerate(grid)
    ]
    nested = _ordered_map(_divergence_point, jobs, threads)
    checks = [record for group in nested for record in group]
    return _report("example-3-4", config, checks)


# --- finest-partition: coarsenings never beat the finest covering grouping --------


def _domination_instance(args) -> CheckRecord:
    label, norm_tag, values, partition, stream, samples, z = args
    space = _space_from_tag(norm_tag, values.shape[1], "suite.norms")
    measure = VectorMeasure(partition, space, values)
    shared = SharedDrawMoments(measure, stream, samples)
    finest = Grouping.finest(measure.n_atoms)
    finest_moment = shared.moment(finest)
    worst_gap = -math.inf
    worst_grouping = finest
    failures = 0
    count = 0
    for grouping in enumerate_groupings(measure.n_atoms, "all", covering_only=True):
        if grouping == finest:
            continue
        count += 1
        moment = shared.moment(grouping)
        if moment.is_exact and finest_moment.is_exact:
            tolerance = 1e-12
        else:
            tolerance = z * float(
                np.hypot(moment.std_error, finest_moment.std_error)
            )
        gap = moment.value - finest_moment.value
        if gap > worst_gap:
            worst_gap = gap
            worst_grouping = grouping
        if gap > tolerance:
            failures += 1
    if count == 0:
        worst_gap = 0.0
    return CheckRecord(
        name=f"domination-{label}",
        values={
            "finest_moment": finest_moment.value,
            "worst_excess": worst_gap,
            "groupings": count,
            "failures": failures,
        },
        std_errors={"finest_moment": finest_moment.std_error},
        verdict="pass" if failures == 0 else "fail",
        detail=f"worst grouping {worst_grouping.to_lists()}",
    )


def _run_domination_suite(config: ExperimentConfig, threads: int) -> SuiteReport:
    params = config.suite
    root = config.root_stream("finest-partition")
    n_atoms = _positive_int(params["n_atoms"], "suite.n_atoms")
    dim = _positive_int(params["dim"], "suite.dim")

    if config.measure_values is not None or config.density_values is not None:
        base = config.measure()
        inputs = [("explicit", base.partition, base.values)]
    else:
        inputs = []
        for i in range(_positive_int(params["measures"], "suite.measures")):
            rng = root.substream(i).substream(0).generator()
            partition = _random_partition(rng, n_atoms)
            inputs.append((f"{i:02d}", partition, rng.standard_normal((n_atoms, dim))))

    jobs = []
    for j, norm_tag in enumerate(params["norms"]):
        for i, (label, partition, values) in enumerate(inputs):
            jobs.append(
                (
                    f"{_norm_label(norm_tag)}-{label}",
                    norm_tag,
                    values,
                    partition,
                    root.substream(1000 + j * len(inputs) + i),
                    config.samples,
                    config.z,
                )
            )
    checks = _ordered_map(_domination_instance, jobs, threads)
    return _report("finest-partition", config, checks)


# --- randomisation: sign-averaged block moments match plain ones -------------------


def _randomisation_instance(args) -> CheckRecord:
    index, norm_tag, dim, n_atoms, max_blocks, stream, paths, z = args
    rng = stream.substream(0).generator()
    partition = _random_partition(rng, n_atoms)
    space = _space_from_tag(norm_tag, dim, "suite.norms")
    density = StepFunction(partition, space, rng.standard_normal((n_atoms, dim)))
    ensemble = sample_brownian(partition, paths, stream.substream(1))
    empirical = induced_randomized_measure(density, ensemble)
    groupings = [
        g
        for g in enumerate_groupings(n_atoms, "all", covering_only=True)
        if g.n_blocks <= max_blocks
    ]
    results = randomisation_identity_sweep(empirical, groupings, z=z)
    failures = [r for r in results if not r.consistent]
    worst = max(
        results,
        key=lambda r: abs(r.comparison.gap) / r.comparison.tolerance
        if r.comparison.tolerance > 0
        else 0.0,
    )
    detail = (
        f"norm={space.norm_tag()} worst grouping {worst.grouping.to_lists()}"
        + (f"; first failure {failures[0].grouping.to_lists()}" if failures else "")
    )
    return CheckRecord(
        name=f"signs-{index:02d}",
        values={
            "groupings": len(results),
            "failures": len(failures),
            "worst_signed": worst.signed.value,
            "worst_plain": worst.plain.value,
            "worst_tolerance": worst.comparison.tolerance,
        },
        std_errors={
            "worst_signed": worst.signed.std_error,
            "worst_plain": worst.plain.std_error,
        },
        verdict="pass" if not failures else "fail",
        detail=detail,
    )


def _run_randomisation_suite(config: ExperimentConfig, threads: int) -> SuiteReport:
    params = config.suite
    root = config.root_stream("randomisation")
    norms = params["norms"]
    jobs = [
        (
            i,
            norms[i % len(norms)],
            _positive_int(params["dim"], "suite.dim"),
            _positive_int(params["n_atoms"], "suite.n_atoms"),
            _positive_int(params["max_blocks"], "suite.max_blocks"),
            root.substream(i),
            config.paths,
            config.z,
        )
        for i in range(_positive_int(params["measures"], "suite.measures"))
    ]
    checks = _ordered_map(_randomisation_instance, jobs, threads)
    return _report("randomisation", config, checks)


# --- entry points ------------------------------------------------------------------


_SUITE_RUNNERS = {
    "thm-2-3": _run_duality_suite,
    "thm-3-3": _run_identity_suite,
    "cor-2-5": _run_upper_embedding_suite,
    "cor-2-6": _run_lower_embedding_suite,
    "example-3-4": _run_divergence_suite,
    "finest-partition": _run_domination_suite,
    "randomisation": _run_randomisation_suite,
}


def run_suite(name: str, config: ExperimentConfig, threads: int = 1) -> SuiteReport:
    if name not in _SUITE_RUNNERS:
        raise ConfigError(
            f"unknown suite {name!r}; available: {', '.join(SUITE_NAMES)}"
        )
    return _SUITE_RUNNERS[name](config, threads)


def run_norms(config: ExperimentConfig, threads: int = 1) -> SuiteReport:
    """All norms of the configured measure or density, with the duality check."""
    measure = config.measure()
    root = config.root_stream("norms")
    mode = "fast_path" if config.mode == "auto" else config.mode
    needs_mc = not measure.space.is_hilbert
    stream = root.substream(0) if needs_mc else None
    samples = config.samples if needs_mc else 0

    variation = gamma_variation_norm(measure, stream, samples, mode=mode)
    duality = verify_duality(measure, root.substream(1), samples, z=config.z)
    tv = total_variation_norm(measure)
    randomized = randomized_variation_norm(
        measure.values,
        measure.space,
        mode="auto" if config.mode in ("auto", "fast_path") else config.mode,
        stream=root.substream(2),
        samples=config.samples,
    )

    checks = [
        CheckRecord(
            name="gamma-variation",
            values={"norm": variation.norm, "moment": variation.moment.value},
            std_errors={"moment": variation.moment.std_error},
            verdict="info",
            detail=f"mode={variation.mode} grouping={variation.grouping.to_lists()}",
        ),
        CheckRecord(
            name="duality",
            values={
                "variation_moment": duality.measure_report.moment.value,
                "summing_moment": duality.operator_report.moment.value,
                "gap": duality.comparison.gap,
                "tolerance": duality.comparison.tolerance,
            },
            std_errors={
                "variation_moment": duality.measure_report.moment.std_error,
                "summing_moment": duality.operator_report.moment.std_error,
            },
            verdict="pass" if duality.consistent else "fail",
        ),
        CheckRecord(
            name="total-variation",
            values={"norm": tv},
            verdict="info",
        ),
        CheckRecord(
            name="randomized-variation",
            values={"norm": randomized.norm, "moment": randomized.moment.value},
            std_errors={"moment": randomized.moment.std_error},
            verdict="info",
            detail=f"mode={randomized.mode} grouping={randomized.grouping.to_lists()}",
        ),
    ]
    return _report("norms", config, checks)


def run_integrate(config: ExperimentConfig, threads: int = 1) -> SuiteReport:
    """Ensemble statistics of the stochastic integral of the configured density."""
    if config.density_values is None:
        raise ConfigError("input: the integrate command needs density values")
    density = config.density()
    root = config.root_stream("integrate")
    mode = "auto" if config.mode == "fast_path" else config.mode
    report = verify_integral_identity(
        density,
        config.paths,
        root.substream(0),
        config.samples,
        search_mode=mode,
        z=config.z,
    )
    operator = operator_from_measure(measure_from_density(density))
    operator_moment = gamma_summing_norm(
        operator,
        root.substream(1),
        0 if density.space.is_hilbert else config.samples,
    )
    checks = _identity_records(0, "configured density", report)
    checks.append(
        CheckRecord(
            name="summing-moment",
            values={"moment": operator_moment.moment.value, "norm": operator_moment.norm},
            std_errors={"moment": operator_moment.moment.std_error},
            verdict="info",
            detail="dual operator of the density's measure",
        )
    )
    return _report("integrate", config, checks)
