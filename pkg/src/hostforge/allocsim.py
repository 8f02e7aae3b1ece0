"""Cobb-Douglas utility evaluation, greedy round-robin allocation and
model-vs-reference utility comparison.

An application's utility on a host is the product of the five resources
raised to per-application returns-to-scale exponents, computed in log
space. Units are fixed so totals are reproducible: cores as a count,
memory in MB, speeds in MIPS, disk in GB.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .population import Population
from .sampler import grid_population, uncorrelated_population  # re-exported baselines

__all__ = [
    "AppProfile",
    "Assignment",
    "default_profiles",
    "load_profiles",
    "utility",
    "utility_array",
    "greedy_round_robin",
    "uncorrelated_population",
    "grid_population",
    "compare_models",
]


@dataclass(frozen=True)
class AppProfile:
    """Returns-to-scale exponents for cores, memory, dhrystone, whetstone, disk."""

    name: str
    alpha: float   # cores
    beta: float    # memory (MB)
    gamma: float   # dhrystone (MIPS)
    delta: float   # whetstone (MIPS)
    epsilon: float  # disk (GB)

    def __post_init__(self):
        for label in ("alpha", "beta", "gamma", "delta", "epsilon"):
            v = getattr(self, label)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{self.name}: exponent {label} must be finite and >= 0, got {v}")

    def exponents(self) -> tuple[float, float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.delta, self.epsilon)


def default_profiles() -> tuple[AppProfile, ...]:
    """The four stock application profiles shipped with the package."""
    return (
        AppProfile("SETI@home", 0.05, 0.1, 0.2, 0.4, 0.05),
        AppProfile("Folding@home", 0.4, 0.05, 0.2, 0.3, 0.05),
        AppProfile("Climate Prediction", 0.2, 0.2, 0.1, 0.35, 0.15),
        AppProfile("P2P", 0.05, 0.1, 0.1, 0.05, 0.7),
    )


def profiles_to_json(profiles: Sequence[AppProfile]) -> list:
    return [
        {
            "name": p.name,
            "alpha": p.alpha,
            "beta": p.beta,
            "gamma": p.gamma,
            "delta": p.delta,
            "epsilon": p.epsilon,
        }
        for p in profiles
    ]


def load_profiles(path) -> tuple[AppProfile, ...]:
    """Load application profiles from a JSON document (a list of objects)."""
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, list) or not doc:
        raise ValueError("profile document must be a non-empty JSON list")
    out = []
    for i, entry in enumerate(doc):
        try:
            out.append(AppProfile(
                name=str(entry["name"]),
                alpha=float(entry["alpha"]),
                beta=float(entry["beta"]),
                gamma=float(entry["gamma"]),
                delta=float(entry["delta"]),
                epsilon=float(entry["epsilon"]),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"profile entry {i} is malformed: {exc}") from exc
    return tuple(out)


def default_profiles_path() -> Path:
    return Path(resources.files("hostforge").joinpath("data/default_apps.json"))


def utility(app: AppProfile, host) -> float:
    """Utility of running `app` on one host (product of powers, log space)."""
    c, m = host.cores, host.memory_mb
    i, f, d = host.dhrystone_mips, host.whetstone_mips, host.disk_gb
    if min(c, m, i, f, d) <= 0:
        raise ValueError("host resources must be strictly positive")
    return math.exp(
        app.alpha * math.log(c)
        + app.beta * math.log(m)
        + app.gamma * math.log(i)
        + app.delta * math.log(f)
        + app.epsilon * math.log(d)
    )


def utility_array(app: AppProfile, pop: Population) -> np.ndarray:
    """Vectorized utility of every host in a population."""
    if len(pop) and (
        pop.cores.min() <= 0
        or pop.memory_mb.min() <= 0
        or min(pop.dhrystone_mips.min(), pop.whetstone_mips.min(), pop.disk_gb.min()) <= 0
    ):
        raise ValueError("host resources must be strictly positive")
    return np.exp(
        app.alpha * np.log(pop.cores)
        + app.beta * np.log(pop.memory_mb)
        + app.gamma * np.log(pop.dhrystone_mips)
        + app.delta * np.log(pop.whetstone_mips)
        + app.epsilon * np.log(pop.disk_gb)
    )


@dataclass(frozen=True)
class Assignment:
    """Result of an allocation: host-to-app mapping and per-app totals."""

    app_order: tuple
    owner: np.ndarray          # app index per host, -1 when unassigned
    totals: dict               # app name -> summed utility
    claimed: dict              # app name -> host indices in claim order

    @property
    def assignments(self) -> dict:
        return {
            int(i): self.app_order[a]
            for i, a in enumerate(self.owner)
            if a >= 0
        }


def greedy_round_robin(
    apps: Sequence[AppProfile],
    hosts,
    quota_per_app: int | None = None,
) -> Assignment:
    """Applications take turns claiming their best remaining host.

    Turn order follows the app list; on its turn an application claims the
    unassigned host with the highest utility for itself, ties broken
    toward the lowest host index. Rounds continue until hosts run out or
    every application reaches its quota.
    """
    if not apps:
        raise ValueError("need at least one application")
    names = [a.name for a in apps]
    if len(set(names)) != len(names):
        raise ValueError(f"application names must be unique: {names}")
    pop = hosts if isinstance(hosts, Population) else Population.from_hosts(list(hosts))
    n = len(pop)
    n_apps = len(apps)

    scores = [utility_array(app, pop) for app in apps]
    # stable argsort on the negated scores: equal utilities keep ascending
    # host index, which is the tie-break rule
    order = [np.argsort(-s, kind="stable") for s in scores]
    cursor = [0] * n_apps
    left = [n if quota_per_app is None else min(quota_per_app, n) for _ in apps]
    taken = np.zeros(n, dtype=bool)
    owner = np.full(n, -1, dtype=np.int64)
    claimed: dict = {name: [] for name in names}

    unassigned = n
    progress = True
    while unassigned > 0 and progress:
        progress = False
        for a in range(n_apps):
            if left[a] <= 0:
                continue
            ord_a = order[a]
            c = cursor[a]
            while c < n and taken[ord_a[c]]:
                c += 1
            cursor[a] = c
            if c >= n:
                left[a] = 0
                continue
            pick = int(ord_a[c])
            taken[pick] = True
            owner[pick] = a
            claimed[names[a]].append(pick)
            left[a] -= 1
            cursor[a] = c + 1
            unassigned -= 1
            progress = True
            if unassigned == 0:
                break

    totals = {
        name: float(scores[a][claimed[name]].sum()) if claimed[name] else 0.0
        for a, name in enumerate(names)
    }
    return Assignment(tuple(names), owner, totals, claimed)


def compare_models(actual, modeled, apps: Sequence[AppProfile]) -> dict:
    """Per-application percent difference of allocated utility totals.

    Runs the same greedy allocation on both populations and reports
    100 * |U_model - U_actual| / U_actual per application.
    """
    if len(actual) == 0 or len(modeled) == 0:
        raise ValueError("both populations must be nonempty")
    base = greedy_round_robin(apps, actual)
    test = greedy_round_robin(apps, modeled)
    out = {}
    for app in apps:
        u0 = base.totals[app.name]
        u1 = test.totals[app.name]
        if u0 == 0.0:
            raise ValueError(f"reference utility for {app.name!r} is zero")
        out[app.name] = 100.0 * abs(u1 - u0) / u0
    return out
