"""Command-line interface.

Subcommands: generate, fit, predict, simulate, validate. All randomness
flows from a single --seed flag; when absent a seed is drawn from system
entropy and printed to stderr so the run can be reproduced. Data goes to
files or standard output, warnings and notes to standard error.
"""

from __future__ import annotations

import argparse
import json
import math
import secrets
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .allocsim import (
    compare_models,
    default_profiles,
    greedy_round_robin,
    load_profiles,
)
from .ingest import (
    TraceFormatError,
    filter_outliers,
    lifetimes,
    parse_trace,
    ratio_series,
    snapshot_stats,
)
from .model import ModelParams, default_params, in_calibrated_range, parse_when
from .population import POPULATION_FIELDS, Population
from .rng import SeededStream
from .sampler import generate_population, grid_population, uncorrelated_population
from .statfit import best_fit, correlation_matrix, fit_exp_law, mle_fit, pearson, subsampled_ks


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, TraceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hostforge",
        description="Synthesize, fit, predict and evaluate Internet end-host resource populations.",
    )
    parser.add_argument("--version", action="version", version=f"hostforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic host population for a date")
    p.add_argument("--date", required=True, help="target date (ISO or fractional year)")
    p.add_argument("--count", type=int, required=True, help="number of hosts")
    p.add_argument("--seed", type=_seed_arg, default=None)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--output", required=True, help="output path, or - for stdout")
    p.add_argument("--params", default=None, help="model parameter JSON (default: built-in)")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit model parameters from a host trace")
    p.add_argument("--input", required=True, help="trace file (CSV or JSON lines)")
    p.add_argument("--format", choices=("csv", "jsonl"), default=None,
                   help="trace format (default: by extension)")
    p.add_argument("--seed", type=_seed_arg, default=None)
    p.add_argument("--output", default="-", help="fitted parameter JSON path, or - for stdout")
    p.add_argument("--report", default=None, help="write the detailed fit report JSON here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="tabulate predicted distributions over a date range")
    p.add_argument("--start", required=True, help="first date (ISO or fractional year)")
    p.add_argument("--end", required=True, help="last date, inclusive")
    p.add_argument("--step", type=float, default=1.0, help="step in years (default 1)")
    p.add_argument("--output", default="-")
    p.add_argument("--params", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="compare allocation utility across population models")
    p.add_argument("--date", required=True)
    p.add_argument("--count", type=int, default=100000)
    p.add_argument("--seed", type=_seed_arg, default=None)
    p.add_argument("--apps", default=None, help="application profile JSON (default: built-in)")
    p.add_argument("--output", default="-", help="result CSV path, or - for stdout")
    p.add_argument("--summary", default=None, help="also write a JSON summary here")
    p.add_argument("--params", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="compare two population files statistically")
    p.add_argument("reference", help="reference population file")
    p.add_argument("candidate", help="candidate population file")
    p.add_argument("--seed", type=_seed_arg, default=None)
    p.add_argument("--output", default="-", help="report JSON path, or - for stdout")
    p.set_defaults(func=cmd_validate)

    return parser


def _seed_arg(text: str) -> int:
    return int(text, 0)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(63)
    print(f"seed: {seed} (auto-generated; pass --seed {seed} to reproduce)", file=sys.stderr)
    return seed


def _load_params(args) -> ModelParams:
    if getattr(args, "params", None):
        return ModelParams.load(args.params)
    return default_params()


def _note_extrapolation(t: float) -> None:
    if not in_calibrated_range(t):
        print(
            f"warning: date {t:.3f} is outside the calibrated range [2006, 2014]; "
            "values are extrapolated",
            file=sys.stderr,
        )


def _write_text(target: str, text: str) -> None:
    if target == "-":
        sys.stdout.write(text)
    else:
        Path(target).write_text(text)


# -- generate ---------------------------------------------------------------

def cmd_generate(args) -> int:
    t = parse_when(args.date)
    if args.count < 0:
        raise ValueError("--count must be nonnegative")
    _note_extrapolation(t)
    seed = _resolve_seed(args)
    params = _load_params(args)
    pop = generate_population(params, t, args.count, seed, threads=args.threads)

    if args.output == "-":
        pop.save(sys.stdout, fmt=args.format)
        out = sys.stderr
    else:
        pop.save(args.output, fmt=args.format)
        out = sys.stdout

    print(f"hosts: {len(pop)}  date: {t:.4f}  seed: {seed}", file=out)
    for name, stats in pop.summary().items():
        print(f"  {name}: mean={stats['mean']:.4g} std={stats['std']:.4g}", file=out)
    return 0


# -- fit --------------------------------------------------------------------

CORE_FIT_LEVELS = (1, 2, 4, 8, 16)
MEM_FIT_LEVELS = (256, 512, 768, 1024, 1536, 2048, 4096)


def cmd_fit(args) -> int:
    seed = _resolve_seed(args)
    fmt = args.format or ("jsonl" if str(args.input).endswith((".jsonl", ".ndjson")) else "csv")
    parsed = parse_trace(args.input, fmt=fmt)
    warnings: list[str] = []
    if parsed.errors:
        warnings.append(f"{len(parsed.errors)} malformed rows routed to the error report")
    kept, discarded = filter_outliers(parsed.records)
    if discarded:
        warnings.append(f"{len(discarded)} hosts discarded by the outlier filter")
    if not kept:
        raise ValueError("no usable hosts after filtering")

    dates = _yearly_dates(kept)
    if len(dates) < 3:
        warnings.append(f"only {len(dates)} yearly samples with active hosts; fits need 3")

    doc, report = _fit_model(kept, dates, seed, warnings)
    report["rows"] = {
        "parsed": len(parsed.records),
        "malformed": len(parsed.errors),
        "kept": len(kept),
        "discarded": len(discarded),
    }

    _write_text(args.output, json.dumps(doc, indent=2) + "\n")
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    for resource, ranking in report["family_rankings"].items():
        if ranking and ranking["ranked"]:
            lead = ranking["ranked"][0]
            print(f"{resource}: best family {lead['family']} (mean p {lead['mean_p']:.3f})",
                  file=sys.stderr)
    return 0


def _yearly_dates(records) -> list:
    lo = min(r.first_seen for r in records)
    hi = max(r.last_seen for r in records)
    out = []
    for year in range(math.floor(lo), math.floor(hi) + 2):
        t = float(year)
        if lo < t < hi and any(r.first_seen < t < r.last_seen for r in records):
            out.append(t)
    return out


def _fit_model(kept, dates, seed, warnings):
    """Run every estimation stage; nulls mark laws the data cannot support."""
    core = _fit_chain(kept, CORE_FIT_LEVELS, dates, "cores", warnings)
    mem = _fit_chain(kept, MEM_FIT_LEVELS, dates, "per_core_memory", warnings)

    snaps = [snapshot_stats(kept, t) for t in dates]
    snaps = [s for s in snaps if s.defined]
    moment_laws = {}
    for resource, key in (
        ("whetstone", "whetstone_mips"),
        ("dhrystone", "dhrystone_mips"),
        ("disk", "disk_free_gb"),
    ):
        for stat in ("mean", "variance"):
            label = f"{resource}_{stat}"
            try:
                times = [s.t for s in snaps]
                vals = [s.mean[key] if stat == "mean" else s.std[key] ** 2 for s in snaps]
                moment_laws[label] = fit_exp_law(times, vals).to_json_dict()
            except ValueError as exc:
                moment_laws[label] = None
                warnings.append(f"could not fit {label}: {exc}")

    rankings = {}
    for resource, key in (
        ("whetstone", "whetstone_mips"),
        ("dhrystone", "dhrystone_mips"),
        ("disk", "disk_free_gb"),
    ):
        data = np.array([getattr(r, key) for r in kept])
        try:
            rankings[resource] = best_fit(data, seed=seed).to_json_dict()
        except ValueError as exc:
            rankings[resource] = None
            warnings.append(f"family ranking failed for {resource}: {exc}")

    corr = None
    try:
        cols = _correlation_columns(kept)
        corr = [[_pearson_or_one(cols, i, j) for j in range(3)] for i in range(3)]
    except ValueError as exc:
        warnings.append(f"could not estimate the correlation matrix: {exc}")

    life = None
    try:
        # hosts first seen near the end of the trace would bias lifetimes
        # short, so the cutoff sits two months before the last contact
        cutoff = max(r.last_seen for r in kept) - 2.0 / 12.0
        fit = mle_fit("weibull", np.array(lifetimes(kept, cutoff)))
        life = {"shape": fit.params["shape"], "scale_days": fit.params["scale"]}
    except ValueError as exc:
        warnings.append(f"could not fit the lifetime law: {exc}")

    doc = {
        "core_chain": _chain_doc(CORE_FIT_LEVELS, core),
        "mem_chain": _chain_doc(MEM_FIT_LEVELS, mem),
        "dhrystone": _dist_doc("normal", moment_laws, "dhrystone"),
        "whetstone": _dist_doc("normal", moment_laws, "whetstone"),
        "disk": _dist_doc("lognormal", moment_laws, "disk"),
        "correlation": {"matrix": corr},
        "lifetime": life,
    }
    report = {
        "dates": dates,
        "core_ratio_laws": {f"{lo}:{hi}": fit for (lo, hi), fit in core.items()},
        "mem_ratio_laws": {f"{lo}:{hi}": fit for (lo, hi), fit in mem.items()},
        "moment_laws": moment_laws,
        "family_rankings": rankings,
        "warnings": warnings,
    }
    return doc, report


def _fit_chain(records, levels, dates, resource, warnings):
    out = {}
    for series in ratio_series(records, levels, dates, resource=resource):
        pair = (series.lo, series.hi)
        if len(series.points) < 3:
            out[pair] = None
            warnings.append(
                f"{resource} ratio {series.lo}:{series.hi} has only "
                f"{len(series.points)} usable dates; law left null"
            )
            continue
        try:
            out[pair] = fit_exp_law(series.times(), series.ratios()).to_json_dict()
        except ValueError as exc:
            out[pair] = None
            warnings.append(f"{resource} ratio {series.lo}:{series.hi} fit failed: {exc}")
    return out


def _chain_doc(levels, fits):
    laws = []
    for lo, hi in zip(levels, levels[1:]):
        fit = fits.get((lo, hi))
        laws.append(None if fit is None else {"a": fit["a"], "b": fit["b"]})
    return {"levels": list(levels), "laws": laws}


def _dist_doc(family, moment_laws, resource):
    mean = moment_laws.get(f"{resource}_mean")
    var = moment_laws.get(f"{resource}_variance")
    return {
        "family": family,
        "mean_law": None if mean is None else {"a": mean["a"], "b": mean["b"]},
        "variance_law": None if var is None else {"a": var["a"], "b": var["b"]},
    }


def _correlation_columns(records):
    mem_core = np.array([r.memory_mb / r.cores for r in records])
    whet = np.array([r.whetstone_mips for r in records])
    dhry = np.array([r.dhrystone_mips for r in records])
    return (mem_core, whet, dhry)


def _pearson_or_one(cols, i, j):
    return 1.0 if i == j else pearson(cols[i], cols[j])


# -- predict ----------------------------------------------------------------

def cmd_predict(args) -> int:
    start = parse_when(args.start)
    end = parse_when(args.end)
    if args.step <= 0:
        raise ValueError("--step must be positive")
    if end < start:
        raise ValueError("--end precedes --start")
    params = _load_params(args)

    dates = []
    t = start
    while t <= end + 1e-9:
        dates.append(round(t, 9))
        t += args.step
    for t in (dates[0], dates[-1]):
        _note_extrapolation(t)

    core_levels = params.core_chain.levels
    mem_levels = params.mem_chain.levels
    header = (
        ["date"]
        + [f"core_p{v}" for v in core_levels]
        + [f"mem_p{v}" for v in mem_levels]
        + ["whetstone_mean", "whetstone_std", "dhrystone_mean", "dhrystone_std",
           "disk_mean", "disk_std"]
    )
    lines = [",".join(header)]
    for t in dates:
        row = [f"{t:.4f}"]
        # full-precision probabilities so each emitted pmf row sums to one
        row += [repr(float(p)) for p in params.core_chain.pmf(t)]
        row += [repr(float(p)) for p in params.mem_chain.pmf(t)]
        for dist in (params.whetstone, params.dhrystone, params.disk):
            mean, var = dist.moments(t)
            row += [f"{mean:.6f}", f"{math.sqrt(var):.6f}"]
        lines.append(",".join(row))
    _write_text(args.output, "\n".join(lines) + "\n")
    return 0


# -- simulate ---------------------------------------------------------------

SIM_MODELS = ("correlated", "uncorrelated", "grid")


def cmd_simulate(args) -> int:
    t = parse_when(args.date)
    if args.count < 1:
        raise ValueError("--count must be positive")
    _note_extrapolation(t)
    seed = _resolve_seed(args)
    params = _load_params(args)
    apps = load_profiles(args.apps) if args.apps else default_profiles()
    if not apps:
        raise ValueError("the application list is empty")

    sub = [SeededStream(seed, k).u64() for k in range(4)]
    reference = generate_population(params, t, args.count, sub[0], threads=args.threads)
    models = {
        "correlated": generate_population(params, t, args.count, sub[1], threads=args.threads),
        "uncorrelated": uncorrelated_population(params, t, args.count, sub[2], threads=args.threads),
        "grid": grid_population(params, t, args.count, sub[3], threads=args.threads),
    }

    rows = []
    summary = {"date": t, "count": args.count, "seed": seed, "models": {}}
    for model in SIM_MODELS:
        diffs = compare_models(reference, models[model], apps)
        totals = greedy_round_robin(apps, models[model]).totals
        summary["models"][model] = {
            app.name: {"total_utility": totals[app.name], "percent_difference": diffs[app.name]}
            for app in apps
        }
        for app in apps:
            rows.append((app.name, model, totals[app.name], diffs[app.name]))

    lines = ["app,model,total_utility,percent_difference"]
    for name, model, total, diff in rows:
        lines.append(f"{name},{model},{total!r},{diff!r}")
    _write_text(args.output, "\n".join(lines) + "\n")
    if args.summary:
        Path(args.summary).write_text(json.dumps(summary, indent=2) + "\n")
    return 0


# -- validate ---------------------------------------------------------------

def cmd_validate(args) -> int:
    seed = _resolve_seed(args)
    ref = Population.load(args.reference)
    cand = Population.load(args.candidate)
    if len(ref) == 0 or len(cand) == 0:
        raise ValueError("both population files must be nonempty")

    moment_diffs = {}
    for name in POPULATION_FIELDS:
        a = ref.column(name).astype(float)
        b = cand.column(name).astype(float)
        moment_diffs[name] = {
            "mean_pct": 100.0 * abs(b.mean() - a.mean()) / abs(a.mean()),
            "std_pct": (
                100.0 * abs(b.std() - a.std()) / a.std() if a.std() > 0 else math.nan
            ),
        }

    corr_ref = correlation_matrix(ref)
    corr_cand = correlation_matrix(cand)

    ks = {}
    for resource, family in (
        ("whetstone_mips", "normal"),
        ("dhrystone_mips", "normal"),
        ("disk_gb", "lognormal"),
    ):
        data = cand.column(resource)
        fit = mle_fit(family, data)
        ks[resource] = {
            "family": family,
            "params": dict(fit.params),
            "mean_p": subsampled_ks(data, fit.cdf, seed=seed),
        }

    report = {
        "sizes": {"reference": len(ref), "candidate": len(cand)},
        "moment_differences_pct": moment_diffs,
        "correlation_reference": corr_ref.tolist(),
        "correlation_candidate": corr_cand.tolist(),
        "marginal_ks": ks,
        "seed": seed,
    }
    _write_text(args.output, json.dumps(report, indent=2) + "\n")

    worst = max(d["mean_pct"] for d in moment_diffs.values())
    print(f"largest mean difference: {worst:.3f}%", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
