"""Counter-based random streams and scalar normal transforms.

This is the reference implementation mirrored expression-for-expression by
the compiled kernel. Both sides must produce bit-identical doubles, so only
plain IEEE arithmetic and libm calls (exp, log, sqrt) appear here; nothing
is vectorized and no platform-specific special functions are used.

A host's stream depends only on (seed, index): the seed and index are mixed
through the splitmix64 finalizer into a per-host key, and draw j is the
finalizer applied to key + (j+1)*GOLDEN. Streams can therefore be evaluated
in any order, from any worker, with identical results.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

_INV_2_52 = 1.0 / 4503599627370496.0  # exactly 2^-52


def mix64(z: int) -> int:
    """splitmix64 output function: a 64-bit avalanche bijection."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def unit_double(x: int) -> float:
    """Map a 64-bit word to a double strictly inside (0, 1).

    The top 52 bits are centered on half-steps; every value is exactly
    representable (the half-offset stays below 2^53), so 0.0 and 1.0 are
    never produced and inverse-CDF transforms stay finite.
    """
    return ((x >> 12) + 0.5) * _INV_2_52


def host_key(seed: int, index: int) -> int:
    """Avalanche-mixed stream key for host `index` under `seed`."""
    if index < 0:
        raise ValueError(f"index must be nonnegative, got {index}")
    return mix64((mix64(seed) + ((index + 1) * GOLDEN)) & MASK64)


class SeededStream:
    """Deterministic draw sequence for one host, keyed by (seed, index)."""

    __slots__ = ("seed", "index", "_key", "_drawn")

    def __init__(self, seed: int, index: int):
        self.seed = seed & MASK64
        self.index = index
        self._key = host_key(seed, index)
        self._drawn = 0

    def u64(self) -> int:
        self._drawn += 1
        return mix64((self._key + self._drawn * GOLDEN) & MASK64)

    def uniform(self) -> float:
        """Next uniform draw in the open interval (0, 1)."""
        return unit_double(self.u64())

    def normal(self) -> float:
        """Next standard normal draw (inverse CDF of a uniform)."""
        return normal_ppf(self.uniform())

    def below(self, n: int) -> int:
        """Next integer in [0, n), by the multiply-shift reduction."""
        if n <= 0:
            raise ValueError(f"bound must be positive, got {n}")
        return (self.u64() * n) >> 64

    @property
    def draws(self) -> int:
        return self._drawn


def normal_cdf(x: float) -> float:
    """Standard normal CDF via Hart's rational approximation.

    Double-precision accurate (~1e-15 relative on the tail); uses only
    arithmetic and exp so the compiled twin reproduces it bit-for-bit.
    """
    z = abs(x)
    if z > 37.0:
        tail = 0.0
    elif z < 7.071067811865475:
        e = math.exp(-z * z / 2.0)
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
        tail = math.exp(-z * z / 2.0) / (b * 2.506628274631000502)
    return tail if x <= 0.0 else 1.0 - tail


def normal_ppf(p: float) -> float:
    """Standard normal inverse CDF (Wichura's PPND16 algorithm).

    Accurate to ~1e-15 over (0, 1); raises outside the open interval.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly inside (0, 1), got {p}")
    q = p - 0.5
    if abs(q) <= 0.425:
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
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    val = num / den
    return -val if q < 0.0 else val
