"""Correlated synthetic host generation.

Implements the host-creation flow: a core count drawn from the date's
discrete chain, per-core memory and the two benchmark speeds driven by a
blended triple of standard normals, and an independent log-normal free
disk draw. Per-host randomness comes from counter-based streams keyed by
(seed, host index), so populations are reproducible independent of
generation order or worker count.

Speeds are strictly positive by construction: each marginal is a
zero-truncated normal whose parameters are solved so its mean and variance
equal the law-predicted moments exactly (see solve_positive_normal).
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernel
from .model import (
    ModelParams,
    WeibullLaw,
    in_calibrated_range,
    lognormal_params_from_moments,
    lower_cholesky,
)
from .population import Population
from .rng import SeededStream, normal_cdf, normal_ppf

CHUNK = 16384

THREADS_ENV = "HOSTFORGE_THREADS"


class ExtrapolationWarning(UserWarning):
    """Raised as a warning when generating outside the calibrated range."""


def cholesky(matrix) -> np.ndarray:
    """Lower-triangular factor L with L @ L.T = matrix.

    The input must be symmetric positive definite; the error names the
    failing pivot otherwise.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-9):
        raise ValueError("matrix must be symmetric")
    return lower_cholesky(a)


def standard_normal_cdf(z: float) -> float:
    """Phi(z) for a scalar z."""
    return normal_cdf(z)


def standard_normal_ppf(p: float) -> float:
    """Inverse of standard_normal_cdf on (0, 1)."""
    return normal_ppf(p)


def sample_discrete(levels, pmf, u: float):
    """Inverse-CDF pick from a discrete distribution over ascending levels.

    Cumulative mass is accumulated in ascending level order, so larger u
    maps to weakly larger levels; u that falls past the accumulated total
    (possible only through rounding) lands on the largest level with mass.
    """
    if not 0.0 <= u < 1.0:
        raise ValueError(f"u must lie in [0, 1), got {u}")
    pmf = [float(p) for p in pmf]
    if len(pmf) != len(levels):
        raise ValueError("levels and pmf must have equal length")
    if any(p < 0.0 for p in pmf):
        raise ValueError("pmf entries must be nonnegative")
    total = math.fsum(pmf)
    if abs(total - 1.0) > 1e-9 or not any(p > 0.0 for p in pmf):
        raise ValueError(f"pmf must sum to 1, got {total}")
    acc = 0.0
    last_positive = levels[0]
    for level, p in zip(levels, pmf):
        acc += p
        if p > 0.0:
            last_positive = level
            if u < acc:
                return level
    return last_positive


def correlated_normals(low: np.ndarray, stream: SeededStream) -> np.ndarray:
    """Draw three normals whose correlation matrix converges to L @ L.T.

    Applies the factor to a fresh vector of independent standard normals:
    the standard construction z = L v.
    """
    low = np.asarray(low, dtype=float)
    v = np.array([stream.normal(), stream.normal(), stream.normal()])
    return low @ v


def sample_lifetime(law: WeibullLaw, stream: SeededStream) -> float:
    """One host lifetime in days, by inverse-CDF from the stream."""
    u = stream.uniform()
    return law.scale_days * math.pow(-math.log1p(-u), 1.0 / law.shape)


def solve_positive_normal(mean: float, sd: float) -> tuple[float, float, float]:
    """Parameters of a zero-truncated normal with the given mean and sd.

    Returns (mu, sigma, f0) such that X ~ N(mu, sigma^2) conditioned on
    X > 0 has exactly the requested moments; f0 = Phi(-mu/sigma) is the
    mass cut away, used to remap uniforms through the truncated inverse
    CDF. When the truncated mass is negligible the plain parameters are
    returned unchanged.
    """
    if not (mean > 0.0 and sd > 0.0):
        raise ValueError(f"need positive mean and sd, got ({mean}, {sd})")
    cv = sd / mean
    if cv >= 0.999:
        raise ValueError(
            f"coefficient of variation {cv:.4f} is not reachable by a "
            "zero-truncated normal"
        )

    def cv_of(h: float) -> float:
        lam = _phi(h) / normal_cdf(h)
        return math.sqrt(max(1.0 - h * lam - lam * lam, 0.0)) / (h + lam)

    lo, hi = -37.0, 37.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cv_of(mid) > cv:
            lo = mid
        else:
            hi = mid
    h = 0.5 * (lo + hi)
    if h >= 36.0:
        return mean, sd, 0.0
    lam = _phi(h) / normal_cdf(h)
    sigma = mean / (h + lam)
    return h * sigma, sigma, normal_cdf(-h)


def _phi(z: float) -> float:
    return math.exp(-0.5 * z * z) / 2.5066282746310005


@dataclass(frozen=True)
class GenContext:
    """Precomputed per-date constants shared by every host draw."""

    t: float
    core_levels: np.ndarray
    core_cdf: np.ndarray
    core_last: int
    mem_levels: np.ndarray
    mem_cdf: np.ndarray
    mem_last: int
    low: tuple[float, float, float, float, float, float]  # l00,l10,l11,l20,l21,l22
    scale: tuple[float, float, float]  # column norms of the factor
    whet_q: tuple[float, float, float]  # (mu, sigma, f0) of the positive normal
    dhry_q: tuple[float, float, float]
    disk_mu: float
    disk_sigma: float


def _chain_arrays(chain, t):
    pmf = [float(p) for p in chain.pmf(t)]
    acc = 0.0
    cdf = []
    last = 0
    for i, p in enumerate(pmf):
        acc += p
        cdf.append(acc)
        if p > 0.0:
            last = i
    return (
        np.asarray(chain.levels, dtype=np.int64),
        np.asarray(cdf, dtype=np.float64),
        last,
    )


def _prepare(params: ModelParams, t: float) -> GenContext:
    core_levels, core_cdf, core_last = _chain_arrays(params.core_chain, t)
    mem_levels, mem_cdf, mem_last = _chain_arrays(params.mem_chain, t)

    low = params.correlation.factor()
    l00, l10, l11 = low[0, 0], low[1, 0], low[1, 1]
    l20, l21, l22 = low[2, 0], low[2, 1], low[2, 2]
    # Column norms: the blended components z_j = sum_i v_i L[i][j] are
    # standardized before use so their marginals stay exactly N(0, 1).
    s1 = math.sqrt(l00 * l00 + l10 * l10 + l20 * l20)
    s2 = math.sqrt(l11 * l11 + l21 * l21)
    s3 = l22

    wm, wv = params.whetstone.moments(t)
    dm, dv = params.dhrystone.moments(t)
    whet_q = solve_positive_normal(wm, math.sqrt(wv))
    dhry_q = solve_positive_normal(dm, math.sqrt(dv))

    dkm, dkv = params.disk.moments(t)
    disk_mu, disk_sigma = lognormal_params_from_moments(dkm, dkv)

    return GenContext(
        t=t,
        core_levels=core_levels, core_cdf=core_cdf, core_last=core_last,
        mem_levels=mem_levels, mem_cdf=mem_cdf, mem_last=mem_last,
        low=(float(l00), float(l10), float(l11), float(l20), float(l21), float(l22)),
        scale=(s1, s2, s3),
        whet_q=whet_q, dhry_q=dhry_q,
        disk_mu=disk_mu, disk_sigma=disk_sigma,
    )


def _warn_extrapolation(t: float) -> None:
    if not in_calibrated_range(t):
        warnings.warn(
            f"date {t:.3f} lies outside the calibrated range [2006, 2014]; "
            "values are extrapolated",
            ExtrapolationWarning,
            stacklevel=3,
        )


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def _run_chunked(fill_args_for, n: int, threads: int, pop: Population) -> None:
    """Run a fill kernel over fixed-size chunks, optionally on a thread pool.

    Chunk boundaries never affect output because every host's draws depend
    only on (seed, index).
    """
    cols = (pop.cores, pop.per_core_memory_mb, pop.memory_mb,
            pop.whetstone_mips, pop.dhrystone_mips, pop.disk_gb)
    spans = [(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]

    def run(span):
        lo, hi = span
        fn, args = fill_args_for(lo, hi - lo)
        fn(*args, *(c[lo:hi] for c in cols))

    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, spans))
    else:
        for span in spans:
            run(span)


def generate_population(
    params: ModelParams,
    t: float,
    n: int,
    seed: int,
    threads: int | None = None,
) -> Population:
    """Generate n correlated hosts for date t.

    Host i is drawn from the stream keyed by (seed, i); the result is
    byte-identical for identical inputs regardless of thread count.
    """
    if n < 0:
        raise ValueError(f"count must be nonnegative, got {n}")
    _warn_extrapolation(t)
    ctx = _prepare(params, t)
    pop = Population.allocate(n)
    if n == 0:
        return pop
    threads = _default_threads() if threads is None else max(1, threads)

    def fill_args_for(start, count):
        return kernel.fill_correlated, (
            seed, start, count,
            ctx.core_levels, ctx.core_cdf, ctx.core_last,
            ctx.mem_levels, ctx.mem_cdf, ctx.mem_last,
            *ctx.low, *ctx.scale,
            *ctx.whet_q, *ctx.dhry_q,
            ctx.disk_mu, ctx.disk_sigma,
        )

    _run_chunked(fill_args_for, n, threads, pop)
    return pop


def generate_host(params: ModelParams, t: float, stream: SeededStream):
    """Generate the single host addressed by the stream's (seed, index).

    Equal to generate_population(params, t, ...)[stream.index] for the
    same seed.
    """
    if stream.draws:
        raise ValueError("generate_host needs a fresh stream")
    pop = Population.allocate(1)
    ctx = _prepare(params, t)
    kernel.fill_correlated(
        stream.seed, stream.index, 1,
        ctx.core_levels, ctx.core_cdf, ctx.core_last,
        ctx.mem_levels, ctx.mem_cdf, ctx.mem_last,
        *ctx.low, *ctx.scale,
        *ctx.whet_q, *ctx.dhry_q,
        ctx.disk_mu, ctx.disk_sigma,
        pop.cores, pop.per_core_memory_mb, pop.memory_mb,
        pop.whetstone_mips, pop.dhrystone_mips, pop.disk_gb,
    )
    return pop[0]


def uncorrelated_population(
    params: ModelParams,
    t: float,
    n: int,
    seed: int,
    threads: int | None = None,
) -> Population:
    """Baseline population with every resource drawn independently."""
    if n < 0:
        raise ValueError(f"count must be nonnegative, got {n}")
    _warn_extrapolation(t)
    ctx = _prepare(params, t)
    pop = Population.allocate(n)
    if n == 0:
        return pop
    threads = _default_threads() if threads is None else max(1, threads)

    def fill_args_for(start, count):
        return kernel.fill_uncorrelated, (
            seed, start, count,
            ctx.core_levels, ctx.core_cdf, ctx.core_last,
            ctx.mem_levels, ctx.mem_cdf, ctx.mem_last,
            *ctx.whet_q, *ctx.dhry_q,
            ctx.disk_mu, ctx.disk_sigma,
        )

    _run_chunked(fill_args_for, n, threads, pop)
    return pop


GRID_DISK_JITTER_SIGMA = 0.5


def grid_population(
    params: ModelParams,
    t: float,
    n: int,
    seed: int,
    threads: int | None = None,
) -> Population:
    """Grid-style baseline population.

    Speeds and per-core memory come from rank-coupled log-normals matched
    to the law moments at each host's creation date (ages drawn from the
    lifetime law); free disk follows pure exponential growth evaluated at
    the simulation date with median-one log-normal jitter, which is what
    makes this baseline overestimate disk.
    """
    if n < 0:
        raise ValueError(f"count must be nonnegative, got {n}")
    _warn_extrapolation(t)
    pop = Population.allocate(n)
    if n == 0:
        return pop
    threads = _default_threads() if threads is None else max(1, threads)

    core_a = np.array([law.a for law in params.core_chain.laws])
    core_b = np.array([law.b for law in params.core_chain.laws])
    mem_a = np.array([law.a for law in params.mem_chain.laws])
    mem_b = np.array([law.b for law in params.mem_chain.laws])
    disk_now = params.disk.mean_law.value(t)

    def fill_args_for(start, count):
        return kernel.fill_grid, (
            seed, start, count, t,
            np.asarray(params.core_chain.levels, dtype=np.int64), core_a, core_b,
            np.asarray(params.mem_chain.levels, dtype=np.int64), mem_a, mem_b,
            params.whetstone.mean_law.a, params.whetstone.mean_law.b,
            params.whetstone.variance_law.a, params.whetstone.variance_law.b,
            params.dhrystone.mean_law.a, params.dhrystone.mean_law.b,
            params.dhrystone.variance_law.a, params.dhrystone.variance_law.b,
            params.lifetime.shape, params.lifetime.scale_days,
            disk_now, GRID_DISK_JITTER_SIGMA,
        )

    _run_chunked(fill_args_for, n, threads, pop)
    return pop
