"""Time-evolving resource laws and the default host-model parameter set.

Everything in this module is pure and immutable: exponential time laws,
discrete level chains whose adjacent-level ratios follow those laws,
normal/log-normal moment laws for benchmark speeds and free disk, the
3x3 benchmark correlation model and the host lifetime law.

Calendar time is a fractional year throughout (2010.667 is Sep 1, 2010).
Year 2006.0 is the origin of every law; [2006, 2014] is the calibrated
range and dates outside it are treated as extrapolation.
"""

from __future__ import annotations

import datetime
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

YEAR_ORIGIN = 2006.0
CALIBRATED_RANGE = (2006.0, 2014.0)

CORE_LEVELS = (1, 2, 4, 8, 16)
MEMORY_LEVELS_MB = (256, 512, 768, 1024, 1536, 2048, 4096)


def year_fraction(year: int, month: int = 1, day: int = 1) -> float:
    """Convert a calendar date to fractional years.

    Month granularity is exact twelfths; days add (day-1)/365.25. The laws
    vary slowly enough that this resolution is more than sufficient.
    """
    if not 1 <= month <= 12:
        raise ValueError(f"month out of range: {month}")
    if not 1 <= day <= 31:
        raise ValueError(f"day out of range: {day}")
    return year + (month - 1) / 12.0 + (day - 1) / 365.25


def parse_when(text: str) -> float:
    """Parse a point in time given as fractional years or an ISO date.

    Accepts e.g. "2010.667" or "2010-09-01".
    """
    s = str(text).strip()
    try:
        return float(s)
    except ValueError:
        pass
    try:
        d = datetime.date.fromisoformat(s)
    except ValueError:
        raise ValueError(f"not a fractional year or ISO date: {text!r}") from None
    return year_fraction(d.year, d.month, d.day)


def in_calibrated_range(t: float) -> bool:
    """True when t lies inside the range the laws were calibrated on."""
    lo, hi = CALIBRATED_RANGE
    return lo <= t <= hi


@dataclass(frozen=True)
class ExpLaw:
    """Exponential time law a * e^(b * (t - 2006)).

    `a` is the value at the origin year, `b` the growth rate per year.
    Governs level ratios as well as distribution means and variances.
    """

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise ValueError(f"law scale must be finite and positive, got {self.a}")
        if not math.isfinite(self.b):
            raise ValueError(f"law rate must be finite, got {self.b}")

    def value(self, t: float) -> float:
        """Evaluate the law at fractional year t."""
        return self.a * math.exp(self.b * (t - YEAR_ORIGIN))

    def log_value(self, t: float) -> float:
        return math.log(self.a) + self.b * (t - YEAR_ORIGIN)


@dataclass(frozen=True)
class RatioChain:
    """Discrete resource levels tied together by adjacent-level ratio laws.

    laws[i].value(t) is the weight ratio of levels[i] to levels[i+1] at
    time t; chaining the ratios and normalizing yields a probability
    distribution over the levels for any date.
    """

    levels: tuple[int, ...]
    laws: tuple[ExpLaw, ...]

    def __post_init__(self):
        if len(self.laws) != len(self.levels) - 1:
            raise ValueError(
                f"need exactly {len(self.levels) - 1} laws for "
                f"{len(self.levels)} levels, got {len(self.laws)}"
            )
        if any(b >= c for b, c in zip(self.levels, self.levels[1:])):
            raise ValueError(f"levels must be strictly increasing: {self.levels}")

    def pmf(self, t: float) -> np.ndarray:
        """Probability of each level at time t.

        Weights are chained in log space from the top level down, so very
        lopsided ratios cannot overflow.
        """
        logw = [0.0]
        for law in reversed(self.laws):
            logw.append(logw[-1] + law.log_value(t))
        logw.reverse()
        top = max(logw)
        w = [math.exp(v - top) for v in logw]
        total = math.fsum(w)
        return np.array([v / total for v in w])

    def mean(self, t: float) -> float:
        """Expected level value at time t."""
        return float(np.dot(self.pmf(t), self.levels))


def ratio_chain_pmf(chain: RatioChain, t: float) -> np.ndarray:
    """Date-dependent probability vector over chain.levels."""
    return chain.pmf(t)


@dataclass(frozen=True)
class DistLaw:
    """A distribution family whose mean and variance follow exponential laws."""

    family: str
    mean_law: ExpLaw
    variance_law: ExpLaw

    _FAMILIES = ("normal", "lognormal")

    def __post_init__(self):
        if self.family not in self._FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {self._FAMILIES}")

    def moments(self, t: float) -> tuple[float, float]:
        """(mean, variance) predicted for time t."""
        return self.mean_law.value(t), self.variance_law.value(t)


def predicted_moments(dist: DistLaw, t: float) -> tuple[float, float]:
    """Law-predicted (mean, variance) of a distribution at time t."""
    return dist.moments(t)


def lognormal_params_from_moments(mean: float, variance: float) -> tuple[float, float]:
    """Underlying-normal (mu, sigma) of a log-normal with the given arithmetic moments.

    Inverts mean = exp(mu + sigma^2/2), variance = mean^2 * (exp(sigma^2) - 1).
    """
    if not (mean > 0.0 and math.isfinite(mean)):
        raise ValueError(f"mean must be positive and finite, got {mean}")
    if not (variance > 0.0 and math.isfinite(variance)):
        raise ValueError(f"variance must be positive and finite, got {variance}")
    sigma2 = math.log1p(variance / (mean * mean))
    mu = math.log(mean) - 0.5 * sigma2
    return mu, math.sqrt(sigma2)


def lower_cholesky(matrix) -> np.ndarray:
    """Lower-triangular L with L @ L.T equal to the given symmetric matrix.

    Raises ValueError naming the failing pivot when the matrix is not
    positive definite.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - float(np.dot(low[j, :j], low[j, :j]))
        if d <= 0.0:
            raise ValueError(f"matrix is not positive definite: pivot {j} = {d:.6g}")
        low[j, j] = math.sqrt(d)
        for i in range(j + 1, n):
            low[i, j] = (a[i, j] - float(np.dot(low[i, :j], low[j, :j]))) / low[j, j]
    return low


@dataclass(frozen=True)
class CorrelationModel:
    """Correlation matrix over (per-core memory, Whetstone, Dhrystone).

    Stores the matrix as nested tuples so the model stays hashable; the
    lower-triangular factor is recomputed on demand.
    """

    matrix: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        r = np.asarray(self.matrix, dtype=float)
        if r.shape != (len(r), len(r)):
            raise ValueError(f"correlation matrix must be square, got {r.shape}")
        if not np.allclose(r, r.T, rtol=0.0, atol=1e-12):
            raise ValueError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(r), 1.0, rtol=0.0, atol=1e-12):
            raise ValueError("correlation matrix must have a unit diagonal")
        off = r[~np.eye(len(r), dtype=bool)]
        if np.any(np.abs(off) >= 1.0):
            raise ValueError("off-diagonal correlations must lie in (-1, 1)")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    def factor(self) -> np.ndarray:
        """Lower-triangular Cholesky factor of the matrix."""
        return lower_cholesky(self.as_array())


@dataclass(frozen=True)
class WeibullLaw:
    """Weibull host-lifetime law; scale is in days."""

    shape: float
    scale_days: float

    def __post_init__(self):
        if not (self.shape > 0.0 and math.isfinite(self.shape)):
            raise ValueError(f"shape must be positive, got {self.shape}")
        if not (self.scale_days > 0.0 and math.isfinite(self.scale_days)):
            raise ValueError(f"scale must be positive, got {self.scale_days}")

    def quantile(self, u: float) -> float:
        """Inverse CDF: lifetime in days at cumulative probability u."""
        if not 0.0 <= u < 1.0:
            raise ValueError(f"u must lie in [0, 1), got {u}")
        return self.scale_days * (-math.log1p(-u)) ** (1.0 / self.shape)

    def median(self) -> float:
        return self.scale_days * math.log(2.0) ** (1.0 / self.shape)


@dataclass(frozen=True)
class ModelParams:
    """The complete host model: chains, speed and disk laws, correlation, lifetime."""

    core_chain: RatioChain
    mem_chain: RatioChain
    dhrystone: DistLaw
    whetstone: DistLaw
    disk: DistLaw
    correlation: CorrelationModel
    lifetime: WeibullLaw

    def to_json_dict(self) -> dict:
        def law(x: ExpLaw) -> dict:
            return {"a": x.a, "b": x.b}

        def chain(c: RatioChain) -> dict:
            return {"levels": list(c.levels), "laws": [law(x) for x in c.laws]}

        def dist(d: DistLaw) -> dict:
            return {
                "family": d.family,
                "mean_law": law(d.mean_law),
                "variance_law": law(d.variance_law),
            }

        return {
            "core_chain": chain(self.core_chain),
            "mem_chain": chain(self.mem_chain),
            "dhrystone": dist(self.dhrystone),
            "whetstone": dist(self.whetstone),
            "disk": dist(self.disk),
            "correlation": {"matrix": [list(row) for row in self.correlation.matrix]},
            "lifetime": {"shape": self.lifetime.shape, "scale_days": self.lifetime.scale_days},
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ModelParams":
        try:
            def law(d) -> ExpLaw:
                return ExpLaw(float(d["a"]), float(d["b"]))

            def chain(d) -> RatioChain:
                return RatioChain(
                    tuple(int(v) for v in d["levels"]),
                    tuple(law(x) for x in d["laws"]),
                )

            def dist(d) -> DistLaw:
                return DistLaw(str(d["family"]), law(d["mean_law"]), law(d["variance_law"]))

            return cls(
                core_chain=chain(doc["core_chain"]),
                mem_chain=chain(doc["mem_chain"]),
                dhrystone=dist(doc["dhrystone"]),
                whetstone=dist(doc["whetstone"]),
                disk=dist(doc["disk"]),
                correlation=CorrelationModel(
                    tuple(tuple(float(v) for v in row) for row in doc["correlation"]["matrix"])
                ),
                lifetime=WeibullLaw(
                    float(doc["lifetime"]["shape"]), float(doc["lifetime"]["scale_days"])
                ),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed model parameter document: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "ModelParams":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def default_params() -> ModelParams:
    """The calibrated default parameter set.

    Core and per-core-memory ratio laws, benchmark/disk moment laws, the
    benchmark correlation matrix and the lifetime Weibull. The 8:16 core
    ratio has no direct fit behind it (16-core hosts were too rare) and
    uses the (12, -0.2) projection instead.
    """
    return ModelParams(
        core_chain=RatioChain(
            levels=CORE_LEVELS,
            laws=(
                ExpLaw(3.369, -0.5004),
                ExpLaw(17.49, -0.3217),
                ExpLaw(12.8, -0.2377),
                ExpLaw(12.0, -0.2),
            ),
        ),
        mem_chain=RatioChain(
            levels=MEMORY_LEVELS_MB,
            laws=(
                ExpLaw(0.5829, -0.2517),
                ExpLaw(4.89, -0.1292),
                ExpLaw(0.3821, -0.1709),
                ExpLaw(3.98, -0.1367),
                ExpLaw(1.51, -0.0925),
                ExpLaw(4.951, -0.1008),
            ),
        ),
        dhrystone=DistLaw("normal", ExpLaw(2064.0, 0.1709), ExpLaw(1.379e6, 0.3313)),
        whetstone=DistLaw("normal", ExpLaw(1179.0, 0.1157), ExpLaw(3.237e5, 0.1057)),
        disk=DistLaw("lognormal", ExpLaw(31.59, 0.2691), ExpLaw(2890.0, 0.5224)),
        correlation=CorrelationModel(
            (
                (1.0, 0.250, 0.306),
                (0.250, 1.0, 0.639),
                (0.306, 0.639, 1.0),
            )
        ),
        lifetime=WeibullLaw(0.58, 135.0),
    )


def default_params_path() -> Path:
    """Path of the shipped default parameter JSON document."""
    return Path(resources.files("hostforge").joinpath("data/default_params.json"))
