import io
import math

import numpy as np
import pytest

from hostforge.ingest import (
    TraceFormatError,
    TraceRecord,
    active_at,
    filter_outliers,
    lifetimes,
    parse_trace,
    ratio_series,
    snapshot_stats,
    synthesize_trace,
    write_trace_csv,
    write_trace_jsonl,
)
from hostforge.model import WeibullLaw, year_fraction
from hostforge.rng import SeededStream
from hostforge.sampler import sample_lifetime
from hostforge.statfit import mle_fit

HEADER = "host_id,first_seen,last_seen,cores,memory_mb,whetstone_mips,dhrystone_mips,disk_free_gb"


def _rec(host_id="h1", first=2007.0, last=2009.0, cores=2, memory=2048.0,
         whet=1861.0, dhry=4120.0, disk=98.0):
    return TraceRecord(host_id, first, last, cores, memory, whet, dhry, disk)


class TestParseTrace:
    def test_empty_body_with_header(self):
        result = parse_trace(io.StringIO(HEADER + "\n"))
        assert result.records == [] and result.errors == []

    def test_three_row_fixture_exact(self):
        body = (
            f"{HEADER}\n"
            "a,2007.5,2009.25,2,2048.0,1861.0,4120.0,98.0\n"
            "b,2006-03-01,2010-09-01,4,4096.0,2200.5,5000.25,150.125\n"
            "c,2008.0,2008.5,1,512.0,900.0,2000.0,20.0\n"
        )
        result = parse_trace(io.StringIO(body))
        assert len(result.records) == 3 and not result.errors
        a, b, c = result.records
        assert a == TraceRecord("a", 2007.5, 2009.25, 2, 2048.0, 1861.0, 4120.0, 98.0)
        assert b.first_seen == pytest.approx(year_fraction(2006, 3, 1))
        assert b.last_seen == pytest.approx(year_fraction(2010, 9, 1))
        assert c.cores == 1

    def test_reversed_window_routed_to_errors(self):
        good = [f"g{i},2007.0,2009.0,2,1024,1000,2000,10" for i in range(10)]
        body = "\n".join([HEADER, "x,2009.0,2007.0,2,1024,1000,2000,10"] + good) + "\n"
        result = parse_trace(io.StringIO(body))
        assert len(result.records) == 10
        assert result.errors[0].reason == "last_seen precedes first_seen"

    def test_negative_resource_routed_to_errors(self):
        good = [f"g{i},2007.0,2009.0,2,1024,1000,2000,10" for i in range(10)]
        body = "\n".join([HEADER, "x,2007.0,2009.0,2,-5,1000,2000,10"] + good) + "\n"
        result = parse_trace(io.StringIO(body))
        assert len(result.records) == 10 and len(result.errors) == 1

    def test_bad_header_raises(self):
        with pytest.raises(TraceFormatError, match="header"):
            parse_trace(io.StringIO("a,b,c\n1,2,3\n"))

    def test_mostly_malformed_aborts(self):
        rows = [f"{HEADER}"] + ["x,not-a-date,2009.0,2,1024,1,2,3"] * 5 + [
            "y,2007.0,2009.0,2,1024,1000,2000,10"
        ]
        with pytest.raises(TraceFormatError, match="malformed"):
            parse_trace(io.StringIO("\n".join(rows) + "\n"))

    def test_jsonl_round_trip(self, tmp_path):
        records = [_rec(host_id=f"h{i}", cores=1 + i % 4) for i in range(10)]
        path = tmp_path / "t.jsonl"
        write_trace_jsonl(records, path)
        back = parse_trace(path, fmt="jsonl")
        assert back.records == records

    def test_csv_round_trip_identity(self, tmp_path):
        records = [
            _rec(host_id=f"h{i}", first=2006.123456789 + i, last=2009.987654321 + i)
            for i in range(5)
        ]
        path = tmp_path / "t.csv"
        write_trace_csv(records, path)
        back = parse_trace(path)
        assert back.records == records
        write_trace_csv(back.records, tmp_path / "t2.csv")
        assert (tmp_path / "t.csv").read_text() == (tmp_path / "t2.csv").read_text()


class TestFilterOutliers:
    def test_thresholds(self):
        keep_cases = [
            _rec(),  # nominal 2010 host
            _rec(cores=128),
            _rec(whet=1e5),
            _rec(memory=102400.0),
            _rec(disk=1e4),
        ]
        drop_cases = [
            _rec(cores=200),
            _rec(whet=1e5 + 1),
            _rec(dhry=2e5),
            _rec(memory=102401.0),
            _rec(disk=1e4 + 0.5),
        ]
        kept, discarded = filter_outliers(keep_cases + drop_cases)
        assert kept == keep_cases
        assert discarded == drop_cases

    def test_idempotent(self):
        records = [_rec(cores=c, disk=d) for c in (1, 100, 200) for d in (5.0, 2e4)]
        once, _ = filter_outliers(records)
        twice, dropped_again = filter_outliers(once)
        assert twice == once and not dropped_again


class TestActiveAt:
    def test_inside_window(self):
        assert active_at([_rec()], 2008.0)

    def test_after_last_contact(self):
        assert not active_at([_rec()], 2009.5)

    def test_boundaries_are_strict(self):
        r = _rec(first=2007.0, last=2009.0)
        assert not active_at([r], 2007.0)
        assert not active_at([r], 2009.0)

    def test_shrinking_window_never_adds_hosts(self):
        wide = _rec(first=2006.0, last=2010.0)
        narrow = _rec(first=2007.5, last=2008.5)
        for t in np.linspace(2005.5, 2010.5, 40):
            act = active_at([wide, narrow], float(t))
            if narrow in act:
                assert wide in act


class TestSnapshotStats:
    def test_single_host_zero_std(self):
        snap = snapshot_stats([_rec()], 2008.0)
        assert snap.active_count == 1
        assert snap.std["whetstone_mips"] == 0.0
        assert snap.mean["per_core_memory_mb"] == 1024.0

    def test_empty_flagged(self):
        snap = snapshot_stats([_rec()], 2012.0)
        assert snap.active_count == 0 and not snap.defined
        assert math.isnan(snap.mean["cores"])

    def test_synthetic_cohort_matches_laws(self, params):
        t = 2010.0
        records = synthesize_trace(params, [t], 8000, seed=21)
        snap = snapshot_stats(records, t)
        wm, _ = params.whetstone.moments(t)
        dm, _ = params.dhrystone.moments(t)
        km, _ = params.disk.moments(t)
        assert snap.mean["whetstone_mips"] == pytest.approx(wm, rel=0.02)
        assert snap.mean["dhrystone_mips"] == pytest.approx(dm, rel=0.02)
        assert snap.mean["disk_free_gb"] == pytest.approx(km, rel=0.05)


class TestRatioSeries:
    def test_all_single_core_flagged(self):
        records = [_rec(host_id=f"h{i}", cores=1, memory=1024.0) for i in range(20)]
        series = ratio_series(records, (1, 2, 4), [2008.0], resource="cores")
        assert all(not s.points and s.skipped == (2008.0,) for s in series)

    def test_equal_counts_give_unit_ratio(self):
        records = [_rec(host_id=f"a{i}", cores=1, memory=512.0) for i in range(10)]
        records += [_rec(host_id=f"b{i}", cores=2, memory=1024.0) for i in range(10)]
        series = ratio_series(records, (1, 2), [2008.0], resource="cores")
        assert series[0].points[0].ratio == 1.0

    def test_memory_levels_matched_per_core(self):
        records = [_rec(host_id="a", cores=2, memory=2048.0),
                   _rec(host_id="b", cores=1, memory=1024.0),
                   _rec(host_id="c", cores=4, memory=2048.0)]
        series = ratio_series(records, (512, 1024), [2008.0], resource="per_core_memory")
        (point,) = series[0].points
        assert point.numerator == 1 and point.denominator == 2

    def test_needs_dates(self):
        with pytest.raises(ValueError):
            ratio_series([_rec()], (1, 2), [])


class TestLifetimes:
    def test_one_year_host(self):
        days = lifetimes([_rec(first=2007.0, last=2008.0)], cutoff=2010.0)
        assert days[0] == pytest.approx(365.25)

    def test_cutoff_excludes_late_arrivals(self):
        records = [_rec(first=2010.6, last=2010.9), _rec(first=2010.4, last=2010.8)]
        days = lifetimes(records, cutoff=2010.5)
        assert len(days) == 1
        assert days[0] == pytest.approx(0.4 * 365.25)

    def test_weibull_fit_round_trip(self, params):
        law = WeibullLaw(0.58, 135.0)
        records = []
        for i in range(30_000):
            stream = SeededStream(88, i)
            first = 2006.0 + 2.0 * stream.uniform()
            life_years = sample_lifetime(law, stream) / 365.25
            records.append(_rec(host_id=f"h{i}", first=first, last=first + life_years))
        fit = mle_fit("weibull", lifetimes(records, cutoff=2009.0))
        assert fit.params["shape"] == pytest.approx(0.58, rel=0.02)
        assert fit.params["scale"] == pytest.approx(135.0, rel=0.02)


class TestSynthesizeTrace:
    def test_cohorts_active_only_at_own_date(self, params):
        dates = [2009.0, 2010.0, 2011.0]
        records = synthesize_trace(params, dates, 300, seed=5)
        assert len(records) == 900
        for t in dates:
            assert len(active_at(records, t)) == 300

    def test_quota_counts_track_pmf(self, params):
        t = 2010.0
        records = synthesize_trace(params, [t], 5000, seed=5)
        pmf = params.core_chain.pmf(t)
        counts = np.array([sum(r.cores == lv for r in records) for lv in (1, 2, 4, 8, 16)])
        np.testing.assert_allclose(counts, pmf * 5000, atol=1.0)

    def test_deterministic(self, params):
        a = synthesize_trace(params, [2010.0], 200, seed=5)
        b = synthesize_trace(params, [2010.0], 200, seed=5)
        assert a == b

    def test_lifetime_windows_follow_the_weibull_law(self, params):
        records = synthesize_trace(params, [2008.0], 30_000, seed=9, windows="lifetime")
        fit = mle_fit("weibull", lifetimes(records, cutoff=2010.0))
        assert fit.params["shape"] == pytest.approx(params.lifetime.shape, rel=0.02)
        assert fit.params["scale"] == pytest.approx(params.lifetime.scale_days, rel=0.02)

    def test_lifetime_windows_span_dates(self, params):
        records = synthesize_trace(params, [2008.0], 3000, seed=9, windows="lifetime")
        # long-lived hosts from the heavy Weibull tail stay active years on
        assert len(active_at(records, 2010.5)) > 0

    def test_unknown_windows_mode_rejected(self, params):
        with pytest.raises(ValueError):
            synthesize_trace(params, [2008.0], 10, seed=1, windows="forever")
