import math

import mpmath as mp
import numpy as np
import pytest

from hostforge.model import WeibullLaw, year_fraction
from hostforge.rng import SeededStream, normal_cdf
from hostforge.sampler import (
    ExtrapolationWarning,
    GRID_DISK_JITTER_SIGMA,
    cholesky,
    correlated_normals,
    generate_host,
    generate_population,
    grid_population,
    sample_discrete,
    sample_lifetime,
    solve_positive_normal,
    standard_normal_cdf,
    standard_normal_ppf,
    uncorrelated_population,
    _prepare,
)

T_SEP_2010 = year_fraction(2010, 9, 1)

PAPER_R = np.array([
    [1.0, 0.250, 0.306],
    [0.250, 1.0, 0.639],
    [0.306, 0.639, 1.0],
])


class _FixedStream:
    """Stands in for SeededStream with a scripted draw sequence."""

    def __init__(self, uniforms=(), normals=()):
        self._u = list(uniforms)
        self._n = list(normals)

    def uniform(self):
        return self._u.pop(0)

    def normal(self):
        return self._n.pop(0)


class TestCholesky:
    def test_benchmark_correlation_factor(self):
        low = cholesky(PAPER_R)
        np.testing.assert_allclose(
            low,
            [[1.0, 0.0, 0.0], [0.250, 0.968, 0.0], [0.306, 0.581, 0.754]],
            atol=1e-3,
        )
        np.testing.assert_allclose(low @ low.T, PAPER_R, atol=1e-9)

    def test_identity(self):
        np.testing.assert_array_equal(cholesky(np.eye(4)), np.eye(4))

    def test_two_by_two(self):
        low = cholesky([[1.0, 0.5], [0.5, 1.0]])
        np.testing.assert_allclose(low, [[1.0, 0.0], [0.5, 0.86603]], atol=1e-5)

    def test_non_positive_definite_names_pivot(self):
        with pytest.raises(ValueError, match="pivot 1"):
            cholesky([[1.0, 2.0], [2.0, 1.0]])

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            cholesky([[1.0, 0.3], [0.1, 1.0]])


class TestStandardNormal:
    def test_cdf_center_and_table(self):
        assert standard_normal_cdf(0.0) == 0.5
        assert standard_normal_cdf(1.96) == pytest.approx(0.9750, abs=1e-4)

    def test_symmetry_identity(self):
        for z in (0.1, 0.77, 2.5, 6.0):
            assert standard_normal_cdf(-z) == pytest.approx(1.0 - standard_normal_cdf(z), abs=1e-12)

    def test_ppf_inverts_cdf(self):
        for u in (0.01, 0.3, 0.5, 0.92, 0.999):
            assert standard_normal_cdf(standard_normal_ppf(u)) == pytest.approx(u, abs=1e-9)


class TestSampleDiscrete:
    LEVELS = (1, 2, 4, 8, 16)
    PMF = (0.76, 0.226, 0.013, 0.0009, 0.0001)

    def test_zero_maps_to_smallest_level_with_mass(self):
        assert sample_discrete(self.LEVELS, self.PMF, 0.0) == 1
        assert sample_discrete((1, 2, 4), (0.0, 0.4, 0.6), 0.0) == 2

    def test_cumulative_selection(self):
        assert sample_discrete(self.LEVELS, self.PMF, 0.9) == 2

    def test_near_one_maps_to_largest_level_with_mass(self):
        assert sample_discrete(self.LEVELS, self.PMF, 1.0 - 1e-12) == 16
        assert sample_discrete((1, 2, 4), (0.5, 0.5, 0.0), 1.0 - 1e-12) == 2

    def test_larger_u_never_smaller_level(self):
        picks = [sample_discrete(self.LEVELS, self.PMF, u) for u in np.linspace(0, 0.999999, 500)]
        assert picks == sorted(picks)

    def test_rejects_bad_pmf(self):
        with pytest.raises(ValueError):
            sample_discrete((1, 2), (0.4, 0.4), 0.9)
        with pytest.raises(ValueError):
            sample_discrete((1, 2), (-0.1, 1.1), 0.5)


class TestCorrelatedNormals:
    def test_zero_vector_maps_to_zero(self):
        low = cholesky(PAPER_R)
        z = correlated_normals(low, _FixedStream(normals=[0.0, 0.0, 0.0]))
        np.testing.assert_array_equal(z, [0.0, 0.0, 0.0])

    def test_unit_first_component_gives_first_column(self):
        low = cholesky(PAPER_R)
        z = correlated_normals(low, _FixedStream(normals=[1.0, 0.0, 0.0]))
        np.testing.assert_allclose(z, [1.0, 0.250, 0.306], atol=1e-12)

    def test_sample_correlation_converges_to_target(self):
        low = cholesky(PAPER_R)
        n = 300_000
        zs = np.empty((n, 3))
        for i in range(n):
            zs[i] = correlated_normals(low, SeededStream(1701, i))
        r23 = np.corrcoef(zs[:, 1], zs[:, 2])[0, 1]
        assert r23 == pytest.approx(0.639, abs=0.01)


class TestSolvePositiveNormal:
    @pytest.mark.parametrize("mean,sd", [(2064.0, 1174.3), (4582.2, 2543.9), (2023.0, 728.1)])
    def test_truncated_moments_match_targets(self, mean, sd):
        mu, sigma, f0 = solve_positive_normal(mean, sd)
        # independent high-precision check of the truncated-normal moments
        mp.mp.dps = 30
        mmu, msig = mp.mpf(mu), mp.mpf(sigma)
        keep = mp.ncdf(mmu / msig)
        phi = mp.exp(-(mmu / msig) ** 2 / 2) / mp.sqrt(2 * mp.pi)
        e1 = mmu + msig * phi / keep
        e2 = mmu ** 2 + msig ** 2 + mmu * msig * phi / keep
        assert float(e1) == pytest.approx(mean, rel=1e-9)
        assert float(mp.sqrt(e2 - e1 ** 2)) == pytest.approx(sd, rel=1e-7)
        assert 0.0 <= f0 < 1.0

    def test_negligible_truncation_passthrough(self):
        mu, sigma, f0 = solve_positive_normal(100.0, 1.0)
        assert (mu, sigma, f0) == (100.0, 1.0, 0.0)

    def test_unreachable_spread_rejected(self):
        with pytest.raises(ValueError):
            solve_positive_normal(10.0, 11.0)


class TestGenerateHost:
    def test_matches_population_row(self, params):
        pop = generate_population(params, T_SEP_2010, 50, seed=99)
        for idx in (0, 7, 49):
            host = generate_host(params, T_SEP_2010, SeededStream(99, idx))
            assert host == pop[idx]

    def test_memory_is_cores_times_per_core(self, params):
        for idx in range(100):
            h = generate_host(params, 2008.5, SeededStream(3, idx))
            assert h.memory_mb == h.cores * h.per_core_memory_mb
            assert h.whetstone_mips > 0 and h.dhrystone_mips > 0 and h.disk_gb > 0

    def test_requires_fresh_stream(self, params):
        s = SeededStream(1, 0)
        s.uniform()
        with pytest.raises(ValueError):
            generate_host(params, 2010.0, s)

    def test_centered_draws_track_law_means(self, params):
        # a host built from the exact centers of all its draws lands on the
        # positive-normal medians, which sit near the law means
        ctx = _prepare(params, 2010.0)
        wm, wv = params.whetstone.moments(2010.0)
        mu, sigma, f0 = ctx.whet_q
        whet_mid = mu + sigma * standard_normal_ppf(f0 + 0.5 * (1.0 - f0))
        assert whet_mid == pytest.approx(1873.0, rel=0.01)
        assert whet_mid == pytest.approx(wm, rel=0.01)

        mu, sigma, f0 = ctx.dhry_q
        dhry_mid = mu + sigma * standard_normal_ppf(f0 + 0.5 * (1.0 - f0))
        # the zero-truncated dhrystone is visibly skew: its median sits a
        # few percent below the law mean (high-precision value frozen)
        assert dhry_mid == pytest.approx(3920.537426394, rel=1e-9)

    def test_larger_memory_draw_never_smaller_level(self, params):
        pmf = params.mem_chain.pmf(T_SEP_2010)
        picks = [
            sample_discrete(params.mem_chain.levels, pmf, normal_cdf(z))
            for z in np.linspace(-4, 4, 200)
        ]
        assert picks == sorted(picks)


class TestGeneratePopulation:
    def test_zero_hosts(self, params):
        pop = generate_population(params, 2010.0, 0, seed=1)
        assert len(pop) == 0

    def test_same_seed_identical(self, params):
        a = generate_population(params, T_SEP_2010, 2000, seed=42)
        b = generate_population(params, T_SEP_2010, 2000, seed=42)
        for f in ("cores", "memory_mb", "whetstone_mips", "disk_gb"):
            np.testing.assert_array_equal(a.column(f), b.column(f))

    def test_different_seed_differs(self, params):
        a = generate_population(params, T_SEP_2010, 2000, seed=42)
        b = generate_population(params, T_SEP_2010, 2000, seed=43)
        assert not np.array_equal(a.whetstone_mips, b.whetstone_mips)

    def test_core_pmf_tracks_chain(self, params):
        pop = generate_population(params, T_SEP_2010, 30_000, seed=8)
        pmf = params.core_chain.pmf(T_SEP_2010)
        for level, p in zip(params.core_chain.levels, pmf):
            observed = np.mean(pop.cores == level)
            assert observed == pytest.approx(p, abs=0.01)

    @pytest.mark.parametrize("t", [2006.0, 2007.25, 2013.5])
    def test_marginal_means_track_laws_across_dates(self, params, t):
        pop = generate_population(params, t, 100_000, seed=31)
        for column, dist in (
            ("whetstone_mips", params.whetstone),
            ("dhrystone_mips", params.dhrystone),
            ("disk_gb", params.disk),
        ):
            mean, _ = dist.moments(t)
            assert pop.column(column).mean() == pytest.approx(mean, rel=0.02)
        pmf = params.core_chain.pmf(t)
        for level, p in zip(params.core_chain.levels, pmf):
            assert np.mean(pop.cores == level) == pytest.approx(p, abs=0.01)

    def test_extrapolation_warns(self, params):
        with pytest.warns(ExtrapolationWarning):
            generate_population(params, 2016.0, 10, seed=1)

    def test_negative_count_rejected(self, params):
        with pytest.raises(ValueError):
            generate_population(params, 2010.0, -1, seed=1)


class TestSampleLifetime:
    def test_unit_exponent_point(self):
        law = WeibullLaw(1.0, 135.0)
        u = 1.0 - math.exp(-1.0)
        assert sample_lifetime(law, _FixedStream(uniforms=[u])) == pytest.approx(135.0, rel=1e-12)

    def test_median_over_draws(self, params):
        draws = [sample_lifetime(params.lifetime, SeededStream(17, i)) for i in range(40_000)]
        assert np.median(draws) == pytest.approx(71.76, rel=0.03)

    def test_small_u_gives_small_lifetime(self, params):
        assert sample_lifetime(params.lifetime, _FixedStream(uniforms=[1e-12])) < 1e-4


class TestBaselinePopulations:
    def test_uncorrelated_independence(self, params):
        pop = uncorrelated_population(params, T_SEP_2010, 100_000, seed=55)
        assert abs(np.corrcoef(pop.whetstone_mips, pop.dhrystone_mips)[0, 1]) < 0.02
        wm, wv = params.whetstone.moments(T_SEP_2010)
        assert pop.whetstone_mips.mean() == pytest.approx(wm, rel=0.02)
        km, kv = params.disk.moments(T_SEP_2010)
        assert pop.disk_gb.mean() == pytest.approx(km, rel=0.02)

    def test_uncorrelated_empty(self, params):
        assert len(uncorrelated_population(params, 2010.0, 0, seed=1)) == 0

    def test_grid_overestimates_disk(self, params):
        grid = grid_population(params, T_SEP_2010, 100_000, seed=56)
        corr = generate_population(params, T_SEP_2010, 100_000, seed=57)
        assert grid.disk_gb.mean() > corr.disk_gb.mean()
        # median-one jitter lifts the mean by exp(sigma^2 / 2)
        lift = math.exp(GRID_DISK_JITTER_SIGMA ** 2 / 2.0)
        assert grid.disk_gb.mean() == pytest.approx(
            params.disk.mean_law.value(T_SEP_2010) * lift, rel=0.02
        )

    def test_grid_all_speeds_positive(self, params):
        grid = grid_population(params, T_SEP_2010, 20_000, seed=58)
        assert grid.whetstone_mips.min() > 0.0
        assert grid.dhrystone_mips.min() > 0.0

    def test_grid_empty(self, params):
        assert len(grid_population(params, 2010.0, 0, seed=1)) == 0
