"""Second moments of random signed sums: exact paths and seeded Monte Carlo.

The quantity of interest is E || sum_n c_n x_n ||^2 where the coefficients are
either independent standard Gaussians or independent Rademacher signs and the
x_n live in a normed space.  Exact routes: the Hilbert closed form
sum_n ||x_n||_2^2, and full sign enumeration for small families.  Everything
else is Monte Carlo with a reproducible substream layout: an estimate is a
deterministic function of (seed, stream_id, samples), independent of thread
count, because draws are generated in a fixed number of batches with one
substream per batch and combined in batch order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spaces import EmpiricalL2Space, NormedSpace

# Exact sign enumeration is capped at 2^20 patterns.
ENUMERATION_LIMIT = 20
# Fixed Monte Carlo batch structure (thread-count independent determinism).
N_BATCHES = 8
# Two exact estimates of the same quantity must agree to this tolerance.
EXACT_AGREEMENT_TOL = 1e-9
# Cap on floats materialized at once when sweeping sign patterns.
_CHUNK_FLOATS = 1 << 23

METHOD_EXACT_HILBERT = "exact_hilbert"
METHOD_EXACT_ENUMERATION = "exact_enumeration"
METHOD_MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class RandomStream:
    """Addressable randomness: (seed, stream_id) pins every draw bit-exactly.

    stream_id may be an int or a tuple of ints; substream(k) appends k, so a
    tree of fan-outs never collides.
    """

    seed: int
    stream_id: tuple[int, ...] = (0,)

    def __post_init__(self):
        sid = self.stream_id
        if isinstance(sid, int):
            sid = (sid,)
        object.__setattr__(self, "stream_id", tuple(int(s) for s in sid))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream_id)
        return np.random.Generator(np.random.PCG64(seq))

    def substream(self, k: int) -> "RandomStream":
        return RandomStream(self.seed, self.stream_id + (int(k),))


@dataclass(frozen=True)
class SumEstimate:
    """A second-moment estimate; std_error is 0 exactly when the method is exact."""

    value: float
    std_error: float
    samples: int
    method: str

    @property
    def is_exact(self) -> bool:
        return self.method in (METHOD_EXACT_HILBERT, METHOD_EXACT_ENUMERATION)

    def to_document(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "samples": self.samples,
            "method": self.method,
        }


@dataclass(frozen=True)
class Comparison:
    """Outcome of a z-test between two estimates of the same quantity."""

    consistent: bool
    gap: float
    tolerance: float
    z: float

    def to_document(self) -> dict:
        return {
            "consistent": self.consistent,
            "gap": self.gap,
            "tolerance": self.tolerance,
            "z": self.z,
        }


def compare_estimates(a: SumEstimate, b: SumEstimate, z: float = 3.0) -> Comparison:
    """Consistency of two estimates: |gap| <= z * sqrt(se_a^2 + se_b^2).

    Two exact estimates must agree to EXACT_AGREEMENT_TOL instead.
    """
    gap = abs(a.value - b.value)
    if a.is_exact and b.is_exact:
        tol = EXACT_AGREEMENT_TOL
    else:
        tol = z * float(np.hypot(a.std_error, b.std_error))
    return Comparison(consistent=bool(gap <= tol), gap=gap, tolerance=tol, z=z)


def _check_values(values, space) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    want = 3 if isinstance(space, EmpiricalL2Space) else 2
    if arr.ndim != want or arr.shape[0] < 1:
        raise ValueError(
            f"values must be a nonempty array with {want} axes, got shape {arr.shape}"
        )
    if arr.shape[-1] != space.dim:
        raise ValueError(
            f"value dimension {arr.shape[-1]} does not match space dim {space.dim}"
        )
    return arr


def _require_sampling(stream, samples: int) -> None:
    if stream is None or samples < 2:
        raise ValueError(
            "Monte Carlo estimation requires a RandomStream and at least 2 samples"
        )


def _batch_sizes(samples: int) -> list[int]:
    base, extra = divmod(samples, N_BATCHES)
    return [base + (1 if b < extra else 0) for b in range(N_BATCHES)]


def _estimate_from_moments(n: int, total: float, total_sq: float) -> SumEstimate:
    mean = total / n
    var = max(total_sq - n * mean * mean, 0.0) / (n - 1)
    return SumEstimate(
        value=float(mean),
        std_error=float(np.sqrt(var / n)),
        samples=n,
        method=METHOD_MONTE_CARLO,
    )


def _estimate_from_path_stats(path_stats: np.ndarray) -> SumEstimate:
    m = path_stats.size
    se = float(np.std(path_stats, ddof=1) / np.sqrt(m)) if m > 1 else 0.0
    return SumEstimate(
        value=float(np.mean(path_stats)),
        std_error=se,
        samples=int(m),
        method=METHOD_MONTE_CARLO,
    )


def _draw_coefficients(rng: np.random.Generator, kind: str, shape) -> np.ndarray:
    if kind == "gaussian":
        return rng.standard_normal(shape)
    return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0


def _monte_carlo_moment(
    values: np.ndarray, space, stream: RandomStream, samples: int, kind: str
) -> SumEstimate:
    """Plain-space MC estimate of E||sum_n c_n x_n||^2 with batched substreams."""
    _require_sampling(stream, samples)
    k = values.shape[0]
    n = total = total_sq = 0
    for batch, size in enumerate(_batch_sizes(samples)):
        if size == 0:
            continue
        rng = stream.substream(batch).generator()
        coeffs = _draw_coefficients(rng, kind, (size, k))
        stats = space.norm_sq(coeffs @ values)
        n += size
        total += float(np.sum(stats))
        total_sq += float(np.sum(stats * stats))
    return _estimate_from_moments(n, total, total_sq)


def _empirical_moment(
    values: np.ndarray, space: EmpiricalL2Space, stream, samples: int, kind: str
) -> SumEstimate:
    """Ensemble-valued estimate: exact over signs where possible, std error over paths."""
    k, n_paths, dim = values.shape
    base = space.base
    if base.is_hilbert:
        # coefficient cross terms vanish in the Hilbert case, for Gaussian and
        # Rademacher coefficients alike
        path_stats = np.sum(base.norm_sq(values), axis=0)
        return _estimate_from_path_stats(path_stats)
    if kind == "rademacher" and k <= ENUMERATION_LIMIT:
        flat = values.reshape(k, n_paths * dim)
        patterns = _sign_patterns(k)
        path_sums = np.zeros(n_paths)
        chunk = max(1, _CHUNK_FLOATS // max(1, n_paths * dim))
        for start in range(0, patterns.shape[0], chunk):
            part = patterns[start : start + chunk]
            combos = (part @ flat).reshape(part.shape[0], n_paths, dim)
            path_sums += np.sum(base.norm_sq(combos), axis=0)
        return _estimate_from_path_stats(path_sums / patterns.shape[0])
    # Monte Carlo over coefficients, still paired over paths
    _require_sampling(stream, samples)
    flat = values.reshape(k, n_paths * dim)
    path_sums = np.zeros(n_paths)
    drawn = 0
    for batch, size in enumerate(_batch_sizes(samples)):
        if size == 0:
            continue
        rng = stream.substream(batch).generator()
        coeffs = _draw_coefficients(rng, kind, (size, k))
        combos = (coeffs @ flat).reshape(size, n_paths, dim)
        path_sums += np.sum(base.norm_sq(combos), axis=0)
        drawn += size
    return _estimate_from_path_stats(path_sums / drawn)


@lru_cache(maxsize=64)
def _sign_patterns(k: int) -> np.ndarray:
    """All sign patterns on k coefficients up to global flip: 2^(k-1) rows with
    the first sign +1.  Averages of ||sum e_m x_m||^2 over these rows equal the
    average over all 2^k patterns."""
    if k > ENUMERATION_LIMIT:
        raise ValueError(f"sign enumeration is capped at {ENUMERATION_LIMIT} coefficients")
    half = 1 << (k - 1)
    idx = np.arange(half, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(k - 1, dtype=np.int64)[None, :]) & 1
    patterns = np.empty((half, k))
    patterns[:, 0] = 1.0
    patterns[:, 1:] = 1.0 - 2.0 * bits
    patterns.setflags(write=False)
    return patterns


def gaussian_sum_sq(
    values, space, stream: RandomStream | None = None, samples: int = 0
) -> SumEstimate:
    """E || sum_n g_n x_n ||^2 for independent standard Gaussian g_n.

    Hilbert spaces use the exact closed form sum_n ||x_n||_2^2; everything else
    is Monte Carlo and requires a stream and samples >= 2.  Ensemble values
    (EmpiricalL2Space) always carry a path-level std error.
    """
    arr = _check_values(values, space)
    if isinstance(space, EmpiricalL2Space):
        return _empirical_moment(arr, space, stream, samples, "gaussian")
    if space.is_hilbert:
        return SumEstimate(
            value=float(np.sum(space.norm_sq(arr))),
            std_error=0.0,
            samples=0,
            method=METHOD_EXACT_HILBERT,
        )
    return _monte_carlo_moment(arr, space, stream, samples, "gaussian")


def rademacher_sum_sq(
    values, space, stream: RandomStream | None = None, samples: int = 0
) -> SumEstimate:
    """E || sum_n r_n x_n ||^2 for independent Rademacher signs r_n.

    Hilbert closed form when available; exact enumeration of all sign patterns
    for at most ENUMERATION_LIMIT coefficients; Monte Carlo otherwise.
    """
    arr = _check_values(values, space)
    if isinstance(space, EmpiricalL2Space):
        return _empirical_moment(arr, space, stream, samples, "rademacher")
    if space.is_hilbert:
        return SumEstimate(
            value=float(np.sum(space.norm_sq(arr))),
            std_error=0.0,
            samples=0,
            method=METHOD_EXACT_HILBERT,
        )
    k = arr.shape[0]
    if k <= ENUMERATION_LIMIT:
        patterns = _sign_patterns(k)
        value = 0.0
        chunk = max(1, _CHUNK_FLOATS // max(1, arr.shape[1]))
        for start in range(0, patterns.shape[0], chunk):
            part = patterns[start : start + chunk]
            value += float(np.sum(space.norm_sq(part @ arr)))
        return SumEstimate(
            value=value / patterns.shape[0],
            std_error=0.0,
            samples=0,
            method=METHOD_EXACT_ENUMERATION,
        )
    return _monte_carlo_moment(arr, space, stream, samples, "rademacher")
