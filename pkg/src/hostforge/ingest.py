"""Host trace ingestion: parsing, validity filters, activity windows,
snapshot statistics, ratio time series and lifetime extraction.

The trace schema is a flat table (CSV or JSON lines) with one row per
host: host_id, first_seen, last_seen, cores, memory_mb, whetstone_mips,
dhrystone_mips, disk_free_gb. Timestamps may be fractional years or ISO
dates. A host is active at time T when first_seen < T < last_seen, both
strict.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import ModelParams, parse_when
from .rng import SeededStream
from .sampler import sample_lifetime, uncorrelated_population

TRACE_FIELDS = (
    "host_id",
    "first_seen",
    "last_seen",
    "cores",
    "memory_mb",
    "whetstone_mips",
    "dhrystone_mips",
    "disk_free_gb",
)

TRACE_CSV_HEADER = ",".join(TRACE_FIELDS)

DAYS_PER_YEAR = 365.25

# A record is discarded when any resource exceeds these caps; values at the
# cap are kept.
MAX_CORES = 128
MAX_WHETSTONE_MIPS = 1e5
MAX_DHRYSTONE_MIPS = 1e5
MAX_MEMORY_MB = 102400.0  # 10^2 GB
MAX_DISK_GB = 1e4


class TraceFormatError(ValueError):
    """Unusable trace input: bad header or too many malformed rows."""


@dataclass(frozen=True)
class TraceRecord:
    """One host's summary row in a trace."""

    host_id: str
    first_seen: float
    last_seen: float
    cores: int
    memory_mb: float
    whetstone_mips: float
    dhrystone_mips: float
    disk_free_gb: float


@dataclass(frozen=True)
class RowError:
    line: int
    reason: str
    content: str


@dataclass(frozen=True)
class ParseResult:
    records: list
    errors: list

    def __iter__(self):
        return iter(self.records)


def _coerce_record(values: dict, line_no: int, raw: str):
    try:
        rec = TraceRecord(
            host_id=str(values["host_id"]),
            first_seen=parse_when(values["first_seen"]),
            last_seen=parse_when(values["last_seen"]),
            cores=int(float(values["cores"])),
            memory_mb=float(values["memory_mb"]),
            whetstone_mips=float(values["whetstone_mips"]),
            dhrystone_mips=float(values["dhrystone_mips"]),
            disk_free_gb=float(values["disk_free_gb"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        return None, RowError(line_no, f"unparseable field: {exc}", raw)
    if rec.last_seen < rec.first_seen:
        return None, RowError(line_no, "last_seen precedes first_seen", raw)
    if rec.cores < 1:
        return None, RowError(line_no, "cores must be at least 1", raw)
    if min(rec.memory_mb, rec.whetstone_mips, rec.dhrystone_mips, rec.disk_free_gb) < 0:
        return None, RowError(line_no, "negative resource value", raw)
    return rec, None


def parse_trace(source, fmt: str = "csv") -> ParseResult:
    """Parse a trace from a path, file object or iterable of lines.

    Malformed rows are collected into the error report instead of being
    dropped silently; an unreadable header or more than 10% malformed rows
    raises TraceFormatError.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as f:
            return parse_trace(f, fmt=fmt)

    lines = iter(source)
    records: list[TraceRecord] = []
    errors: list[RowError] = []
    total = 0

    if fmt == "csv":
        try:
            header = next(lines).strip()
        except StopIteration:
            raise TraceFormatError("empty input, expected a header row") from None
        if [c.strip() for c in header.split(",")] != list(TRACE_FIELDS):
            raise TraceFormatError(f"unexpected trace header: {header!r}")
        for line_no, raw in enumerate(lines, start=2):
            raw = raw.rstrip("\n")
            if not raw.strip():
                continue
            total += 1
            parts = raw.split(",")
            if len(parts) != len(TRACE_FIELDS):
                errors.append(RowError(line_no, f"expected {len(TRACE_FIELDS)} fields, got {len(parts)}", raw))
                continue
            rec, err = _coerce_record(dict(zip(TRACE_FIELDS, parts)), line_no, raw)
            if err is not None:
                errors.append(err)
            else:
                records.append(rec)
    elif fmt == "jsonl":
        for line_no, raw in enumerate(lines, start=1):
            raw = raw.rstrip("\n")
            if not raw.strip():
                continue
            total += 1
            try:
                doc = json.loads(raw)
            except json.JSONDecodeError as exc:
                errors.append(RowError(line_no, f"invalid JSON: {exc}", raw))
                continue
            if not isinstance(doc, dict):
                errors.append(RowError(line_no, "row is not an object", raw))
                continue
            rec, err = _coerce_record(doc, line_no, raw)
            if err is not None:
                errors.append(err)
            else:
                records.append(rec)
    else:
        raise ValueError(f"unknown trace format {fmt!r}")

    if total > 0 and len(errors) > 0.10 * total:
        raise TraceFormatError(
            f"{len(errors)} of {total} rows are malformed (>10%); "
            f"first error at line {errors[0].line}: {errors[0].reason}"
        )
    return ParseResult(records, errors)


def write_trace_csv(records: Iterable[TraceRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(TRACE_CSV_HEADER + "\n")
        for r in records:
            f.write(
                f"{r.host_id},{r.first_seen!r},{r.last_seen!r},{r.cores},"
                f"{r.memory_mb!r},{r.whetstone_mips!r},{r.dhrystone_mips!r},"
                f"{r.disk_free_gb!r}\n"
            )


def write_trace_jsonl(records: Iterable[TraceRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in records:
            f.write(json.dumps({
                "host_id": r.host_id,
                "first_seen": r.first_seen,
                "last_seen": r.last_seen,
                "cores": r.cores,
                "memory_mb": r.memory_mb,
                "whetstone_mips": r.whetstone_mips,
                "dhrystone_mips": r.dhrystone_mips,
                "disk_free_gb": r.disk_free_gb,
            }) + "\n")


def filter_outliers(records: Sequence[TraceRecord]) -> tuple[list, list]:
    """Split records into (kept, discarded) by the implausibility caps."""
    kept, discarded = [], []
    for r in records:
        if (
            r.cores > MAX_CORES
            or r.whetstone_mips > MAX_WHETSTONE_MIPS
            or r.dhrystone_mips > MAX_DHRYSTONE_MIPS
            or r.memory_mb > MAX_MEMORY_MB
            or r.disk_free_gb > MAX_DISK_GB
        ):
            discarded.append(r)
        else:
            kept.append(r)
    return kept, discarded


def active_at(records: Sequence[TraceRecord], t: float) -> list:
    """Hosts whose first contact strictly precedes t and last strictly follows it."""
    return [r for r in records if r.first_seen < t < r.last_seen]


SNAPSHOT_RESOURCES = (
    "cores",
    "memory_mb",
    "per_core_memory_mb",
    "whetstone_mips",
    "dhrystone_mips",
    "disk_free_gb",
)


@dataclass(frozen=True)
class Snapshot:
    """Per-resource mean and population standard deviation at one time."""

    t: float
    active_count: int
    mean: dict
    std: dict
    defined: bool


def snapshot_stats(records: Sequence[TraceRecord], t: float) -> Snapshot:
    """Statistics over the hosts active at t; flagged undefined when empty."""
    active = active_at(records, t)
    if not active:
        nan = {k: math.nan for k in SNAPSHOT_RESOURCES}
        return Snapshot(t, 0, dict(nan), dict(nan), defined=False)
    cols = {
        "cores": np.array([r.cores for r in active], dtype=float),
        "memory_mb": np.array([r.memory_mb for r in active], dtype=float),
        "per_core_memory_mb": np.array([r.memory_mb / r.cores for r in active]),
        "whetstone_mips": np.array([r.whetstone_mips for r in active]),
        "dhrystone_mips": np.array([r.dhrystone_mips for r in active]),
        "disk_free_gb": np.array([r.disk_free_gb for r in active]),
    }
    mean = {k: float(v.mean()) for k, v in cols.items()}
    std = {k: float(v.std()) for k, v in cols.items()}
    return Snapshot(t, len(active), mean, std, defined=True)


@dataclass(frozen=True)
class RatioPoint:
    t: float
    numerator: int
    denominator: int

    @property
    def ratio(self) -> float:
        return self.numerator / self.denominator


@dataclass(frozen=True)
class RatioSeries:
    """Count ratio of two adjacent levels over the sample dates."""

    lo: int
    hi: int
    points: tuple
    skipped: tuple  # dates where the ratio was undefined or zero

    def times(self):
        return [p.t for p in self.points]

    def ratios(self):
        return [p.ratio for p in self.points]


def ratio_series(
    records: Sequence[TraceRecord],
    levels: Sequence[int],
    dates: Sequence[float],
    resource: str = "cores",
) -> list:
    """Adjacent-level active-count ratios at each date.

    `resource` selects what is matched against the levels: "cores" or
    "per_core_memory" (memory divided by cores, matched to within half a
    megabyte). Dates with a zero numerator or denominator are flagged and
    left out of the usable points.
    """
    if len(dates) < 1:
        raise ValueError("need at least one sample date")
    levels = list(levels)
    if any(a >= b for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly increasing")

    if resource == "cores":
        def level_of(r):
            return r.cores
    elif resource == "per_core_memory":
        def level_of(r):
            return r.memory_mb / r.cores
    else:
        raise ValueError(f"unknown resource {resource!r}")

    counts = {t: dict.fromkeys(levels, 0) for t in dates}
    for t in dates:
        for r in active_at(records, t):
            v = level_of(r)
            for level in levels:
                if abs(v - level) <= 0.5:
                    counts[t][level] += 1
                    break

    out = []
    for lo, hi in zip(levels, levels[1:]):
        points, skipped = [], []
        for t in dates:
            num, den = counts[t][lo], counts[t][hi]
            if num > 0 and den > 0:
                points.append(RatioPoint(t, num, den))
            else:
                skipped.append(t)
        out.append(RatioSeries(lo, hi, tuple(points), tuple(skipped)))
    return out


def lifetimes(records: Sequence[TraceRecord], cutoff: float) -> list:
    """Observed lifetimes in days of hosts first seen at or before the cutoff.

    Zero-length lifetimes (a single contact) carry no duration information
    and are omitted.
    """
    out = []
    for r in records:
        if r.first_seen <= cutoff:
            days = (r.last_seen - r.first_seen) * DAYS_PER_YEAR
            if days > 0.0:
                out.append(days)
    return out


def synthesize_trace(
    params: ModelParams,
    dates: Sequence[float],
    per_date: int,
    seed: int,
    stratified: bool = True,
    windows: str = "cohort",
) -> list:
    """Build a synthetic trace with one host cohort per sample date.

    With the default "cohort" windows each host's activity brackets only
    its own date, so the active population at each date is exactly that
    cohort (the shape law fits rely on this). The "lifetime" windows mode
    instead spawns hosts with a creation date inside the cohort year and a
    lifetime drawn from the model's Weibull law, for availability-window
    experiments; windows then overlap freely across dates.

    With `stratified` the core and memory levels are assigned by
    expected-count quotas (shuffled, independently paired), which removes
    multinomial noise from downstream ratio fits; speeds and disk stay
    random. Speed columns are normal draws clamped at zero, mirroring how
    raw trace exports bound measurements below.
    """
    if per_date < 1:
        raise ValueError("need at least one host per date")
    if windows not in ("cohort", "lifetime"):
        raise ValueError(f"unknown windows mode {windows!r}")
    dates = sorted(float(t) for t in dates)
    if len(dates) > 1:
        gap = min(b - a for a, b in zip(dates, dates[1:]))
        if gap <= 0.0:
            raise ValueError("sample dates must be distinct")
        max_half = min(0.45, 0.45 * gap)
    else:
        max_half = 0.45

    records = []
    for di, t in enumerate(dates):
        cohort_seed = SeededStream(seed, di).u64()
        pop = uncorrelated_population(params, t, per_date, cohort_seed)
        whet = np.maximum(_raw_normal_speeds(params, t, per_date, cohort_seed, "whetstone"), 0.0)
        dhry = np.maximum(_raw_normal_speeds(params, t, per_date, cohort_seed, "dhrystone"), 0.0)

        if stratified:
            cores = _quota_levels(params.core_chain, t, per_date)
            pcm = _quota_levels(params.mem_chain, t, per_date)
            # salted streams keep the shuffles out of the host-draw key space
            _shuffle(cores, SeededStream(cohort_seed ^ _CORE_SHUFFLE_SALT, 0))
            _shuffle(pcm, SeededStream(cohort_seed ^ _PCM_SHUFFLE_SALT, 0))
        else:
            cores = pop.cores.tolist()
            pcm = pop.per_core_memory_mb.tolist()

        for j in range(per_date):
            stream = SeededStream(cohort_seed ^ _WINDOW_SALT, j)
            if windows == "cohort":
                h1 = max_half * (0.7 + 0.3 * stream.uniform())
                h2 = max_half * (0.7 + 0.3 * stream.uniform())
                first, last = t - h1, t + h2
            else:
                first = t - 0.5 + stream.uniform()
                last = first + sample_lifetime(params.lifetime, stream) / DAYS_PER_YEAR
            records.append(TraceRecord(
                host_id=f"h{di:02d}-{j:06d}",
                first_seen=first,
                last_seen=last,
                cores=int(cores[j]),
                memory_mb=float(int(cores[j]) * int(pcm[j])),
                whetstone_mips=float(whet[j]),
                dhrystone_mips=float(dhry[j]),
                disk_free_gb=float(pop.disk_gb[j]),
            ))
    return records


# salts partition one cohort seed into independent draw namespaces
_WHET_SALT = 0x57484554
_DHRY_SALT = 0x44485259
_CORE_SHUFFLE_SALT = 0x434F5245
_PCM_SHUFFLE_SALT = 0x50434D00
_WINDOW_SALT = 0x57494E44


def _raw_normal_speeds(params, t, n, seed, which):
    """Plain normal speed draws (no truncation), one per host index."""
    dist = params.whetstone if which == "whetstone" else params.dhrystone
    mean, var = dist.moments(t)
    sd = math.sqrt(var)
    salt = _WHET_SALT if which == "whetstone" else _DHRY_SALT
    out = np.empty(n)
    for i in range(n):
        stream = SeededStream(seed ^ salt, i)
        out[i] = mean + sd * stream.normal()
    return out


def _quota_levels(chain, t, n) -> list:
    """Largest-remainder assignment of n hosts to the chain's levels."""
    pmf = chain.pmf(t)
    raw = pmf * n
    counts = np.floor(raw).astype(int)
    rema = raw - counts
    short = n - int(counts.sum())
    for idx in np.argsort(-rema, kind="stable")[:short]:
        counts[idx] += 1
    values = []
    for level, c in zip(chain.levels, counts):
        values.extend([level] * int(c))
    return values


def _shuffle(values: list, stream: SeededStream) -> None:
    for i in range(len(values) - 1, 0, -1):
        j = stream.below(i + 1)
        values[i], values[j] = values[j], values[i]
