# cython: boundscheck=False, wraparound=False, initializedcheck=False, nonecheck=False
# cython: language_level=3
"""Compiled host generation kernels.

C twin of hostforge._kernel_py: same flat ABI, bit-identical output. Every
expression here mirrors the pure-Python module operation for operation;
the build disables fp contraction so no fused multiply-adds sneak in.
Change the Python twin first, then copy the change here.
"""

from libc.math cimport exp, fabs, log, log1p, pow, sqrt

BACKEND = "compiled"

cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV_2_52 = 1.0 / 4503599627370496.0


cdef inline unsigned long long _mix64(unsigned long long z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _unit(unsigned long long x) nogil:
    return ((x >> 12) + 0.5) * INV_2_52


cdef inline double _normal_cdf(double x) nogil:
    cdef double z = fabs(x)
    cdef double e, num, den, b, tail
    if z > 37.0:
        tail = 0.0
    elif z < 7.071067811865475:
        e = exp(-z * z / 2.0)
        num = ((((((3.52624965998911e-02 * z + 0.700383064443688) * z
                   + 6.37396220353165) * z + 33.912866078383) * z
                 + 112.079291497871) * z + 221.213596169931) * z
               + 220.206867912376)
        den = (((((((8.83883476483184e-02 * z + 1.75566716318264) * z
                    + 16.064177579207) * z + 86.7807322029461) * z
                  + 296.564248779674) * z + 637.333633378831) * z
                + 793.826512519948) * z + 440.413735824752)
        tail = e * num / den
    else:
        b = z + 1.0 / (z + 2.0 / (z + 3.0 / (z + 4.0 / (z + 0.65))))
        tail = exp(-z * z / 2.0) / (b * 2.506628274631000502)
    if x <= 0.0:
        return tail
    return 1.0 - tail


cdef inline double _normal_ppf(double p) nogil:
    cdef double q = p - 0.5
    cdef double r, num, den, val
    if fabs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = sqrt(-log(r))
    if r <= 5.0:
        r = r - 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r = r - 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    val = num / den
    if q < 0.0:
        return -val
    return val


# test shims: the scalar primitives are cdef inline, so parity checks
# against the pure-Python twin need these thin wrappers
def scalar_mix64(unsigned long long z):
    return _mix64(z)


def scalar_unit(unsigned long long x):
    return _unit(x)


def scalar_normal_cdf(double x):
    return _normal_cdf(x)


def scalar_normal_ppf(double p):
    return _normal_ppf(p)


cdef inline long long _pick(long long[::1] levels, double[::1] cdf,
                            long long last, double u) nogil:
    cdef long long k
    for k in range(last + 1):
        if u < cdf[k]:
            return levels[k]
    return levels[last]


def fill_correlated(
    unsigned long long seed, long long start, long long count,
    long long[::1] core_levels, double[::1] core_cdf, long long core_last,
    long long[::1] mem_levels, double[::1] mem_cdf, long long mem_last,
    double l00, double l10, double l11, double l20, double l21, double l22,
    double s1, double s2, double s3,
    double w_mu, double w_sigma, double w_f0,
    double d_mu, double d_sigma, double d_f0,
    double disk_mu, double disk_sigma,
    long long[::1] cores_out, long long[::1] pcm_out, long long[::1] mem_out,
    double[::1] whet_out, double[::1] dhry_out, double[::1] disk_out,
):
    cdef unsigned long long base = _mix64(seed)
    cdef unsigned long long key
    cdef long long i, c, g
    cdef double u_core, v1, v2, v3, u_disk, z1, z2, z3, whet, dhry, disk
    with nogil:
        for i in range(count):
            key = _mix64(base + (<unsigned long long> (start + i + 1)) * GOLDEN)
            u_core = _unit(_mix64(key + 1 * GOLDEN))
            v1 = _normal_ppf(_unit(_mix64(key + 2 * GOLDEN)))
            v2 = _normal_ppf(_unit(_mix64(key + 3 * GOLDEN)))
            v3 = _normal_ppf(_unit(_mix64(key + 4 * GOLDEN)))
            u_disk = _unit(_mix64(key + 5 * GOLDEN))

            z1 = (l00 * v1 + l10 * v2 + l20 * v3) / s1
            z2 = (l11 * v2 + l21 * v3) / s2
            z3 = (l22 * v3) / s3

            c = _pick(core_levels, core_cdf, core_last, u_core)
            g = _pick(mem_levels, mem_cdf, mem_last, _normal_cdf(z1))
            whet = w_mu + w_sigma * _normal_ppf(w_f0 + _normal_cdf(z2) * (1.0 - w_f0))
            dhry = d_mu + d_sigma * _normal_ppf(d_f0 + _normal_cdf(z3) * (1.0 - d_f0))
            disk = exp(disk_mu + disk_sigma * _normal_ppf(u_disk))

            cores_out[i] = c
            pcm_out[i] = g
            mem_out[i] = c * g
            whet_out[i] = whet
            dhry_out[i] = dhry
            disk_out[i] = disk


def fill_uncorrelated(
    unsigned long long seed, long long start, long long count,
    long long[::1] core_levels, double[::1] core_cdf, long long core_last,
    long long[::1] mem_levels, double[::1] mem_cdf, long long mem_last,
    double w_mu, double w_sigma, double w_f0,
    double d_mu, double d_sigma, double d_f0,
    double disk_mu, double disk_sigma,
    long long[::1] cores_out, long long[::1] pcm_out, long long[::1] mem_out,
    double[::1] whet_out, double[::1] dhry_out, double[::1] disk_out,
):
    cdef unsigned long long base = _mix64(seed)
    cdef unsigned long long key
    cdef long long i, c, g
    cdef double u_core, u_pcm, u_whet, u_dhry, u_disk, whet, dhry, disk
    with nogil:
        for i in range(count):
            key = _mix64(base + (<unsigned long long> (start + i + 1)) * GOLDEN)
            u_core = _unit(_mix64(key + 1 * GOLDEN))
            u_pcm = _unit(_mix64(key + 2 * GOLDEN))
            u_whet = _unit(_mix64(key + 3 * GOLDEN))
            u_dhry = _unit(_mix64(key + 4 * GOLDEN))
            u_disk = _unit(_mix64(key + 5 * GOLDEN))

            c = _pick(core_levels, core_cdf, core_last, u_core)
            g = _pick(mem_levels, mem_cdf, mem_last, u_pcm)
            whet = w_mu + w_sigma * _normal_ppf(w_f0 + u_whet * (1.0 - w_f0))
            dhry = d_mu + d_sigma * _normal_ppf(d_f0 + u_dhry * (1.0 - d_f0))
            disk = exp(disk_mu + disk_sigma * _normal_ppf(u_disk))

            cores_out[i] = c
            pcm_out[i] = g
            mem_out[i] = c * g
            whet_out[i] = whet
            dhry_out[i] = dhry
            disk_out[i] = disk


def fill_grid(
    unsigned long long seed, long long start, long long count, double t,
    long long[::1] core_levels, double[::1] core_law_a, double[::1] core_law_b,
    long long[::1] mem_levels, double[::1] mem_law_a, double[::1] mem_law_b,
    double wm_a, double wm_b, double wv_a, double wv_b,
    double dm_a, double dm_b, double dv_a, double dv_b,
    double life_shape, double life_scale_days,
    double disk_now, double jitter_sigma,
    long long[::1] cores_out, long long[::1] pcm_out, long long[::1] mem_out,
    double[::1] whet_out, double[::1] dhry_out, double[::1] disk_out,
):
    cdef long long n_core = core_levels.shape[0]
    cdef long long n_mem = mem_levels.shape[0]
    if n_core > 32 or n_mem > 32:
        raise ValueError("too many levels for the compiled kernel")
    cdef double inv_shape = 1.0 / life_shape
    cdef unsigned long long base = _mix64(seed)
    cdef unsigned long long key
    cdef long long i, k, c, g
    cdef double u_age, u_core, u_rank, u_jit
    cdef double age_days, born, dt, w, tot, acc
    cdef double mean_g, sq_g, var_g, s2, raw, best, d, z_rank
    cdef double wm, wv, dm, dv, whet, dhry, disk
    cdef double weights[32]
    with nogil:
        for i in range(count):
            key = _mix64(base + (<unsigned long long> (start + i + 1)) * GOLDEN)
            u_age = _unit(_mix64(key + 1 * GOLDEN))
            u_core = _unit(_mix64(key + 2 * GOLDEN))
            u_rank = _unit(_mix64(key + 3 * GOLDEN))
            u_jit = _unit(_mix64(key + 4 * GOLDEN))

            age_days = life_scale_days * pow(-log1p(-u_age), inv_shape)
            born = t - age_days / 365.25
            dt = born - 2006.0

            c = core_levels[n_core - 1]
            w = 1.0
            tot = 1.0
            weights[n_core - 1] = 1.0
            for k in range(n_core - 2, -1, -1):
                w = core_law_a[k] * exp(core_law_b[k] * dt) * w
                weights[k] = w
                tot += w
            acc = 0.0
            for k in range(n_core):
                acc += weights[k] / tot
                if u_core < acc:
                    c = core_levels[k]
                    break

            w = 1.0
            tot = 1.0
            mean_g = <double> mem_levels[n_mem - 1]
            sq_g = (<double> mem_levels[n_mem - 1]) * (<double> mem_levels[n_mem - 1])
            for k in range(n_mem - 2, -1, -1):
                w = mem_law_a[k] * exp(mem_law_b[k] * dt) * w
                mean_g += w * mem_levels[k]
                sq_g += w * (<double> mem_levels[k]) * (<double> mem_levels[k])
                tot += w
            mean_g /= tot
            sq_g /= tot
            var_g = sq_g - mean_g * mean_g
            z_rank = _normal_ppf(u_rank)
            if var_g > 0.0:
                s2 = log(1.0 + var_g / (mean_g * mean_g))
                raw = exp(log(mean_g) - 0.5 * s2 + sqrt(s2) * z_rank)
            else:
                raw = mean_g
            g = mem_levels[0]
            best = fabs(raw - mem_levels[0])
            for k in range(1, n_mem):
                d = fabs(raw - mem_levels[k])
                if d < best:
                    best = d
                    g = mem_levels[k]

            wm = wm_a * exp(wm_b * dt)
            wv = wv_a * exp(wv_b * dt)
            s2 = log(1.0 + wv / (wm * wm))
            whet = exp(log(wm) - 0.5 * s2 + sqrt(s2) * z_rank)
            dm = dm_a * exp(dm_b * dt)
            dv = dv_a * exp(dv_b * dt)
            s2 = log(1.0 + dv / (dm * dm))
            dhry = exp(log(dm) - 0.5 * s2 + sqrt(s2) * z_rank)

            disk = disk_now * exp(jitter_sigma * _normal_ppf(u_jit))

            cores_out[i] = c
            pcm_out[i] = g
            mem_out[i] = c * g
            whet_out[i] = whet
            dhry_out[i] = dhry
            disk_out[i] = disk
