"""Pure-Python host generation kernels.

Fallback twin of the compiled extension `hostforge._kernel`. The two share
one flat argument ABI and must produce bit-identical output arrays; any
change here has to be mirrored expression-for-expression in the .pyx file.

Each kernel fills column slices for hosts [start, start+count) where host i
draws from the counter-based stream keyed by (seed, i):

  correlated    draws: core, v1, v2, v3, disk
  uncorrelated  draws: core, per-core-memory, whetstone, dhrystone, disk
  grid          draws: age, core, rank (shared by speeds and memory), jitter
"""

from __future__ import annotations

import math

from .rng import GOLDEN, MASK64, mix64, normal_cdf, normal_ppf, unit_double

BACKEND = "python"


def _pick(levels, cdf, last, u):
    # Smallest level whose cumulative mass exceeds u; trailing rounding in
    # the cdf falls through to the last level that carries any mass.
    for k in range(last + 1):
        if u < cdf[k]:
            return levels[k]
    return levels[last]


def fill_correlated(
    seed, start, count,
    core_levels, core_cdf, core_last,
    mem_levels, mem_cdf, mem_last,
    l00, l10, l11, l20, l21, l22, s1, s2, s3,
    w_mu, w_sigma, w_f0, d_mu, d_sigma, d_f0,
    disk_mu, disk_sigma,
    cores_out, pcm_out, mem_out, whet_out, dhry_out, disk_out,
):
    core_levels = [int(v) for v in core_levels]
    mem_levels = [int(v) for v in mem_levels]
    core_cdf = [float(v) for v in core_cdf]
    mem_cdf = [float(v) for v in mem_cdf]
    base = mix64(seed)
    for i in range(count):
        key = mix64((base + (start + i + 1) * GOLDEN) & MASK64)
        u_core = unit_double(mix64((key + 1 * GOLDEN) & MASK64))
        v1 = normal_ppf(unit_double(mix64((key + 2 * GOLDEN) & MASK64)))
        v2 = normal_ppf(unit_double(mix64((key + 3 * GOLDEN) & MASK64)))
        v3 = normal_ppf(unit_double(mix64((key + 4 * GOLDEN) & MASK64)))
        u_disk = unit_double(mix64((key + 5 * GOLDEN) & MASK64))

        z1 = (l00 * v1 + l10 * v2 + l20 * v3) / s1
        z2 = (l11 * v2 + l21 * v3) / s2
        z3 = (l22 * v3) / s3

        c = _pick(core_levels, core_cdf, core_last, u_core)
        g = _pick(mem_levels, mem_cdf, mem_last, normal_cdf(z1))
        whet = w_mu + w_sigma * normal_ppf(w_f0 + normal_cdf(z2) * (1.0 - w_f0))
        dhry = d_mu + d_sigma * normal_ppf(d_f0 + normal_cdf(z3) * (1.0 - d_f0))
        disk = math.exp(disk_mu + disk_sigma * normal_ppf(u_disk))

        cores_out[i] = c
        pcm_out[i] = g
        mem_out[i] = c * g
        whet_out[i] = whet
        dhry_out[i] = dhry
        disk_out[i] = disk


def fill_uncorrelated(
    seed, start, count,
    core_levels, core_cdf, core_last,
    mem_levels, mem_cdf, mem_last,
    w_mu, w_sigma, w_f0, d_mu, d_sigma, d_f0,
    disk_mu, disk_sigma,
    cores_out, pcm_out, mem_out, whet_out, dhry_out, disk_out,
):
    core_levels = [int(v) for v in core_levels]
    mem_levels = [int(v) for v in mem_levels]
    core_cdf = [float(v) for v in core_cdf]
    mem_cdf = [float(v) for v in mem_cdf]
    base = mix64(seed)
    for i in range(count):
        key = mix64((base + (start + i + 1) * GOLDEN) & MASK64)
        u_core = unit_double(mix64((key + 1 * GOLDEN) & MASK64))
        u_pcm = unit_double(mix64((key + 2 * GOLDEN) & MASK64))
        u_whet = unit_double(mix64((key + 3 * GOLDEN) & MASK64))
        u_dhry = unit_double(mix64((key + 4 * GOLDEN) & MASK64))
        u_disk = unit_double(mix64((key + 5 * GOLDEN) & MASK64))

        c = _pick(core_levels, core_cdf, core_last, u_core)
        g = _pick(mem_levels, mem_cdf, mem_last, u_pcm)
        whet = w_mu + w_sigma * normal_ppf(w_f0 + u_whet * (1.0 - w_f0))
        dhry = d_mu + d_sigma * normal_ppf(d_f0 + u_dhry * (1.0 - d_f0))
        disk = math.exp(disk_mu + disk_sigma * normal_ppf(u_disk))

        cores_out[i] = c
        pcm_out[i] = g
        mem_out[i] = c * g
        whet_out[i] = whet
        dhry_out[i] = dhry
        disk_out[i] = disk


def fill_grid(
    seed, start, count, t,
    core_levels, core_law_a, core_law_b,
    mem_levels, mem_law_a, mem_law_b,
    wm_a, wm_b, wv_a, wv_b, dm_a, dm_b, dv_a, dv_b,
    life_shape, life_scale_days,
    disk_now, jitter_sigma,
    cores_out, pcm_out, mem_out, whet_out, dhry_out, disk_out,
):
    core_levels = [int(v) for v in core_levels]
    mem_levels = [int(v) for v in mem_levels]
    core_law_a = [float(v) for v in core_law_a]
    core_law_b = [float(v) for v in core_law_b]
    mem_law_a = [float(v) for v in mem_law_a]
    mem_law_b = [float(v) for v in mem_law_b]
    n_core = len(core_levels)
    n_mem = len(mem_levels)
    inv_shape = 1.0 / life_shape
    base = mix64(seed)
    for i in range(count):
        key = mix64((base + (start + i + 1) * GOLDEN) & MASK64)
        u_age = unit_double(mix64((key + 1 * GOLDEN) & MASK64))
        u_core = unit_double(mix64((key + 2 * GOLDEN) & MASK64))
        u_rank = unit_double(mix64((key + 3 * GOLDEN) & MASK64))
        u_jit = unit_double(mix64((key + 4 * GOLDEN) & MASK64))

        age_days = life_scale_days * math.pow(-math.log1p(-u_age), inv_shape)
        born = t - age_days / 365.25
        dt = born - 2006.0

        # cores from the ratio chain evaluated at the host's creation date
        c = core_levels[n_core - 1]
        w = 1.0
        tot = 1.0
        weights = [0.0] * n_core
        weights[n_core - 1] = 1.0
        for k in range(n_core - 2, -1, -1):
            w = core_law_a[k] * math.exp(core_law_b[k] * dt) * w
            weights[k] = w
            tot += w
        acc = 0.0
        for k in range(n_core):
            acc += weights[k] / tot
            if u_core < acc:
                c = core_levels[k]
                break

        # per-core memory: log-normal matched to the chain's moments at the
        # creation date, rank-coupled to the speed draw, snapped to a level
        w = 1.0
        tot = 1.0
        mean_g = float(mem_levels[n_mem - 1])
        sq_g = float(mem_levels[n_mem - 1]) * float(mem_levels[n_mem - 1])
        for k in range(n_mem - 2, -1, -1):
            w = mem_law_a[k] * math.exp(mem_law_b[k] * dt) * w
            mean_g += w * mem_levels[k]
            sq_g += w * float(mem_levels[k]) * float(mem_levels[k])
            tot += w
        mean_g /= tot
        sq_g /= tot
        var_g = sq_g - mean_g * mean_g
        z_rank = normal_ppf(u_rank)
        if var_g > 0.0:
            s2 = math.log(1.0 + var_g / (mean_g * mean_g))
            raw = math.exp(math.log(mean_g) - 0.5 * s2 + math.sqrt(s2) * z_rank)
        else:
            raw = mean_g
        g = mem_levels[0]
        best = abs(raw - mem_levels[0])
        for k in range(1, n_mem):
            d = abs(raw - mem_levels[k])
            if d < best:
                best = d
                g = mem_levels[k]

        # speeds: log-normals matched to the law moments at the creation
        # date, fully rank-coupled through the same draw
        wm = wm_a * math.exp(wm_b * dt)
        wv = wv_a * math.exp(wv_b * dt)
        s2 = math.log(1.0 + wv / (wm * wm))
        whet = math.exp(math.log(wm) - 0.5 * s2 + math.sqrt(s2) * z_rank)
        dm = dm_a * math.exp(dm_b * dt)
        dv = dv_a * math.exp(dv_b * dt)
        s2 = math.log(1.0 + dv / (dm * dm))
        dhry = math.exp(math.log(dm) - 0.5 * s2 + math.sqrt(s2) * z_rank)

        # disk: deterministic growth at the simulation date with median-one
        # log-normal jitter
        disk = disk_now * math.exp(jitter_sigma * normal_ppf(u_jit))

        cores_out[i] = c
        pcm_out[i] = g
        mem_out[i] = c * g
        whet_out[i] = whet
        dhry_out[i] = dhry
        disk_out[i] = disk
