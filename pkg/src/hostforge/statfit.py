"""Statistical estimation: exponential-law fits, Pearson correlation,
seven-family maximum likelihood fits and subsampled Kolmogorov-Smirnov
model selection.

The KS p-value uses the asymptotic Kolmogorov series with the Stephens
small-sample correction, which is accurate at the 50-point subsample size
used for model selection. Subsampling draws without replacement inside a
round and independently across rounds; every family is scored on the same
rounds so rankings compare like with like.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .model import ExpLaw, YEAR_ORIGIN
from .rng import SeededStream

DIST_FAMILIES = (
    "normal",
    "lognormal",
    "exponential",
    "weibull",
    "pareto",
    "gamma",
    "loggamma",
)


def pearson(x, y) -> float:
    """Product-moment correlation coefficient of two equal-length series."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"series must be 1-d and equal length, got {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise ValueError("need at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(np.dot(dx, dx))
    vy = float(np.dot(dy, dy))
    if vx == 0.0 or vy == 0.0:
        raise ValueError("correlation is undefined for a zero-variance series")
    r = float(np.dot(dx, dy)) / math.sqrt(vx * vy)
    return min(1.0, max(-1.0, r))


RESOURCE_ORDER = ("cores", "memory", "mem_per_core", "whetstone", "dhrystone", "disk")


def resource_columns(records) -> dict[str, np.ndarray]:
    """Extract the six analysis columns from hosts or trace records."""
    if hasattr(records, "resource_columns"):
        return records.resource_columns()
    rows = list(records)
    if rows and hasattr(rows[0], "disk_free_gb"):
        cores = np.array([r.cores for r in rows], dtype=float)
        memory = np.array([r.memory_mb for r in rows], dtype=float)
        return {
            "cores": cores,
            "memory": memory,
            "mem_per_core": memory / cores,
            "whetstone": np.array([r.whetstone_mips for r in rows], dtype=float),
            "dhrystone": np.array([r.dhrystone_mips for r in rows], dtype=float),
            "disk": np.array([r.disk_free_gb for r in rows], dtype=float),
        }
    cores = np.array([r.cores for r in rows], dtype=float)
    return {
        "cores": cores,
        "memory": np.array([r.memory_mb for r in rows], dtype=float),
        "mem_per_core": np.array([r.per_core_memory_mb for r in rows], dtype=float),
        "whetstone": np.array([r.whetstone_mips for r in rows], dtype=float),
        "dhrystone": np.array([r.dhrystone_mips for r in rows], dtype=float),
        "disk": np.array([r.disk_gb for r in rows], dtype=float),
    }


def correlation_matrix(records, fields: Sequence[str] = RESOURCE_ORDER) -> np.ndarray:
    """Pairwise Pearson matrix over the six resources.

    Field order: cores, memory, mem/core, whetstone, dhrystone, disk.
    """
    cols = resource_columns(records)
    series = [cols[f] for f in fields]
    n = len(series)
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = pearson(series[i], series[j])
    return out


@dataclass(frozen=True)
class FitReport:
    """Result of a log-linear exponential-law fit."""

    law: ExpLaw
    r: float
    n_points: int
    residual_rms: float
    degenerate: bool = False

    def to_json_dict(self) -> dict:
        return {
            "a": self.law.a,
            "b": self.law.b,
            "r": self.r,
            "n_points": self.n_points,
            "residual_rms": self.residual_rms,
            "degenerate": self.degenerate,
        }


def fit_exp_law(times, values) -> FitReport:
    """Least-squares fit of a * e^(b (t - 2006)) through positive values.

    Fits a straight line to (t - 2006, ln value); r is the correlation of
    the transformed pairs. A constant series yields rate zero and is
    flagged degenerate rather than raising.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise ValueError("times and values must be 1-d and equal length")
    if len(t) < 3:
        raise ValueError(f"need at least 3 points to fit, got {len(t)}")
    if np.any(v <= 0.0):
        raise ValueError("values must be strictly positive")
    x = t - YEAR_ORIGIN
    y = np.log(v)
    dx = x - x.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise ValueError("all sample times are identical")
    b = float(np.dot(dx, y - y.mean())) / sxx
    log_a = float(y.mean()) - b * float(x.mean())
    resid = y - (log_a + b * x)
    rms = float(np.sqrt(np.mean(resid * resid)))
    if float(np.dot(y - y.mean(), y - y.mean())) == 0.0:
        return FitReport(ExpLaw(math.exp(log_a), 0.0), 0.0, len(t), 0.0, degenerate=True)
    return FitReport(ExpLaw(math.exp(log_a), b), pearson(x, y), len(t), rms)


def ks_statistic(sample, cdf: Callable) -> float:
    """Sup-distance between the empirical CDF of the sample and `cdf`."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = len(x)
    if n < 1:
        raise ValueError("need at least one sample point")
    f = _eval_cdf(cdf, x)
    i = np.arange(1, n + 1, dtype=float)
    d_plus = float(np.max(i / n - f))
    d_minus = float(np.max(f - (i - 1.0) / n))
    return min(1.0, max(d_plus, d_minus, 0.0))


def _eval_cdf(cdf, x: np.ndarray) -> np.ndarray:
    try:
        f = np.asarray(cdf(x), dtype=float)
        if f.shape == x.shape:
            return f
    except (TypeError, ValueError):
        pass
    return np.fromiter((float(cdf(float(v))) for v in x), dtype=float, count=len(x))


def ks_pvalue(d: float, n: int) -> float:
    """Asymptotic Kolmogorov p-value with the Stephens finite-n correction."""
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"statistic must lie in [0, 1], got {d}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    lam = d * (math.sqrt(n) + 0.12 + 0.11 / math.sqrt(n))
    if lam <= 0.0:
        return 1.0
    total = 0.0
    for k in range(1, 1000):
        term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-10:
            break
    return min(1.0, max(0.0, total))


def subsampled_ks(
    data,
    cdf: Callable,
    rounds: int = 100,
    subsample: int = 50,
    seed: int = 0,
) -> float:
    """Mean KS p-value over random subsamples of the data.

    Plain KS rejects everything at large n; averaging the p-value of many
    small random subsets (without replacement within a round, independent
    across rounds) keeps the test informative. Deterministic per seed.
    """
    x = np.asarray(data, dtype=float)
    n = len(x)
    if rounds < 1:
        raise ValueError("need at least one round")
    if subsample < 1 or subsample > n:
        raise ValueError(f"subsample size {subsample} not in [1, {n}]")
    idx = np.arange(n)
    total = 0.0
    for rnd in range(rounds):
        stream = SeededStream(seed, rnd)
        if subsample < n:
            for j in range(subsample):
                k = j + stream.below(n - j)
                idx[j], idx[k] = idx[k], idx[j]
            sel = x[idx[:subsample]]
        else:
            sel = x
        total += ks_pvalue(ks_statistic(sel, cdf), subsample)
    return total / rounds


@dataclass(frozen=True)
class DistFamily:
    """A fitted distribution family with its parameters and CDF."""

    tag: str
    params: dict
    degenerate: bool = False

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.tag == "normal":
            return special.ndtr((x - p["mu"]) / p["sigma"])
        if self.tag == "lognormal":
            z = np.log(np.maximum(x, np.finfo(float).tiny))
            return np.where(x > 0.0, special.ndtr((z - p["mu"]) / p["sigma"]), 0.0)
        if self.tag == "exponential":
            return np.where(x > 0.0, 1.0 - np.exp(-p["rate"] * np.maximum(x, 0.0)), 0.0)
        if self.tag == "weibull":
            z = np.maximum(x, 0.0) / p["scale"]
            return np.where(x > 0.0, 1.0 - np.exp(-(z ** p["shape"])), 0.0)
        if self.tag == "pareto":
            z = np.maximum(x, p["scale"])
            return np.where(x < p["scale"], 0.0, 1.0 - (p["scale"] / z) ** p["shape"])
        if self.tag == "gamma":
            return special.gammainc(p["shape"], np.maximum(x, 0.0) / p["scale"])
        if self.tag == "loggamma":
            z = np.log(np.maximum(x, 1.0))
            return special.gammainc(p["shape"], z / p["scale"])
        raise ValueError(f"unknown family {self.tag!r}")

    def to_json_dict(self) -> dict:
        return {"family": self.tag, "params": dict(self.params), "degenerate": self.degenerate}


def mle_fit(family: str, data) -> DistFamily:
    """Maximum likelihood fit of one family.

    Closed forms where they exist; safeguarded Newton iteration on the
    profile likelihood for the weibull/gamma/loggamma shapes. Data outside
    the family's support raises a ValueError.
    """
    x = np.asarray(data, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least two points to fit")
    if not np.all(np.isfinite(x)):
        raise ValueError("data must be finite")

    if family == "normal":
        mu = float(x.mean())
        var = float(np.mean((x - mu) ** 2))
        if var == 0.0:
            return DistFamily("normal", {"mu": mu, "sigma": 0.0}, degenerate=True)
        return DistFamily("normal", {"mu": mu, "sigma": math.sqrt(var)})

    if family == "lognormal":
        _require_support(x, 0.0, family)
        lx = np.log(x)
        mu = float(lx.mean())
        var = float(np.mean((lx - mu) ** 2))
        if var == 0.0:
            return DistFamily("lognormal", {"mu": mu, "sigma": 0.0}, degenerate=True)
        return DistFamily("lognormal", {"mu": mu, "sigma": math.sqrt(var)})

    if family == "exponential":
        if np.any(x < 0.0):
            raise ValueError("exponential requires nonnegative data")
        m = float(x.mean())
        if m <= 0.0:
            raise ValueError("exponential requires a positive mean")
        return DistFamily("exponential", {"rate": 1.0 / m})

    if family == "weibull":
        _require_support(x, 0.0, family)
        shape, scale = _weibull_mle(x)
        return DistFamily("weibull", {"shape": shape, "scale": scale})

    if family == "pareto":
        _require_support(x, 0.0, family)
        xm = float(x.min())
        s = float(np.sum(np.log(x / xm)))
        if s == 0.0:
            return DistFamily("pareto", {"shape": math.inf, "scale": xm}, degenerate=True)
        return DistFamily("pareto", {"shape": len(x) / s, "scale": xm})

    if family == "gamma":
        _require_support(x, 0.0, family)
        shape, scale = _gamma_mle(x)
        return DistFamily("gamma", {"shape": shape, "scale": scale})

    if family == "loggamma":
        # e^X with X gamma-distributed, so the log of the data must be
        # positive: values at or below 1 are outside the support.
        if np.any(x <= 1.0):
            raise ValueError("loggamma requires data strictly greater than 1")
        shape, scale = _gamma_mle(np.log(x))
        return DistFamily("loggamma", {"shape": shape, "scale": scale})

    raise ValueError(f"unknown family {family!r}, expected one of {DIST_FAMILIES}")


def _require_support(x: np.ndarray, lower: float, family: str) -> None:
    if np.any(x <= lower):
        raise ValueError(f"{family} requires data strictly greater than {lower:g}")


MAX_MLE_ITERATIONS = 200


def _weibull_mle(x: np.ndarray) -> tuple[float, float]:
    ly = np.log(x)
    mean_ly = float(ly.mean())
    top = float(ly.max())
    sd_ly = float(ly.std())
    if sd_ly == 0.0:
        raise ValueError("weibull shape is unbounded for constant data")
    k = 1.2 / sd_ly  # moment-style starting point
    for _ in range(MAX_MLE_ITERATIONS):
        w = np.exp(k * (ly - top))
        bw = float(w.sum())
        aw = float(np.dot(w, ly))
        a2 = float(np.dot(w, ly * ly))
        g = aw / bw - 1.0 / k - mean_ly
        gp = (a2 * bw - aw * aw) / (bw * bw) + 1.0 / (k * k)
        step = g / gp
        nk = k - step
        if nk <= 0.0:
            nk = k / 2.0
        if abs(nk - k) / k < 1e-10:
            k = nk
            break
        k = nk
    else:
        raise ValueError(f"weibull fit did not converge in {MAX_MLE_ITERATIONS} iterations")
    w = np.exp(k * (ly - top))
    scale = math.exp(top + math.log(float(w.mean())) / k)
    return k, scale


def _gamma_mle(x: np.ndarray) -> tuple[float, float]:
    m = float(x.mean())
    s = math.log(m) - float(np.mean(np.log(x)))
    if s <= 0.0:
        raise ValueError("gamma shape is unbounded for constant data")
    # standard closed-form starting point, then Newton on ln k - psi(k) = s
    k = (3.0 - s + math.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)
    for _ in range(MAX_MLE_ITERATIONS):
        f = math.log(k) - float(special.digamma(k)) - s
        fp = 1.0 / k - float(special.polygamma(1, k))
        nk = k - f / fp
        if nk <= 0.0:
            nk = k / 2.0
        if abs(nk - k) / k < 1e-10:
            k = nk
            break
        k = nk
    else:
        raise ValueError(f"gamma fit did not converge in {MAX_MLE_ITERATIONS} iterations")
    return k, m / k


@dataclass(frozen=True)
class FitRanking:
    """Families ranked by mean subsampled-KS p-value, best first."""

    ranked: tuple  # of (DistFamily, mean_p)
    skipped: tuple  # of (family_tag, reason)

    @property
    def best(self) -> DistFamily:
        return self.ranked[0][0]

    def to_json_dict(self) -> dict:
        return {
            "ranked": [
                {"family": fit.tag, "mean_p": p, "params": dict(fit.params)}
                for fit, p in self.ranked
            ],
            "skipped": [{"family": tag, "reason": reason} for tag, reason in self.skipped],
        }


def best_fit(
    data,
    families: Sequence[str] = DIST_FAMILIES,
    rounds: int = 100,
    subsample: int = 50,
    seed: int = 0,
) -> FitRanking:
    """Fit each family and rank them by mean subsampled-KS p-value.

    Families whose support excludes the data are skipped with a note; the
    same subsample rounds score every family, so ranks are paired.
    """
    if len(families) < 1:
        raise ValueError("need at least one candidate family")
    scored = []
    skipped = []
    for family in families:
        try:
            fit = mle_fit(family, data)
            if fit.degenerate:
                skipped.append((family, "degenerate fit"))
                continue
            p = subsampled_ks(data, fit.cdf, rounds=rounds, subsample=subsample, seed=seed)
        except ValueError as exc:
            skipped.append((family, str(exc)))
            continue
        scored.append((fit, p))
    if not scored:
        raise ValueError(f"no candidate family fits the data: {skipped}")
    scored.sort(key=lambda item: item[1], reverse=True)
    return FitRanking(tuple(scored), tuple(skipped))
