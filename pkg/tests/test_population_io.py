import numpy as np
import pytest

from hostforge.model import year_fraction
from hostforge.population import CSV_HEADER, HostSpec, Population
from hostforge.sampler import generate_population


class TestHostSpec:
    def test_memory_consistency_enforced(self):
        with pytest.raises(ValueError):
            HostSpec(2, 1024, 1024, 1500.0, 2000.0, 50.0)

    def test_positive_resources_enforced(self):
        with pytest.raises(ValueError):
            HostSpec(2, 1024, 2048, 0.0, 2000.0, 50.0)
        with pytest.raises(ValueError):
            HostSpec(2, 1024, 2048, 1500.0, 2000.0, -1.0)


class TestPopulationContainer:
    def test_sequence_protocol(self, params):
        pop = generate_population(params, 2010.0, 25, seed=1)
        assert len(pop) == 25
        assert isinstance(pop[3], HostSpec)
        assert len(list(pop)) == 25
        assert len(pop[5:10]) == 5
        assert pop[5:10][0] == pop[5]

    def test_column_access(self, params):
        pop = generate_population(params, 2010.0, 10, seed=1)
        assert pop.column("cores").dtype == np.int64
        with pytest.raises(KeyError):
            pop.column("gpu")

    def test_from_hosts_round_trip(self, params):
        pop = generate_population(params, 2010.0, 8, seed=2)
        again = Population.from_hosts(list(pop))
        for f in ("cores", "memory_mb", "disk_gb"):
            np.testing.assert_array_equal(pop.column(f), again.column(f))

    def test_mismatched_columns_rejected(self):
        with pytest.raises(ValueError):
            Population([1, 2], [256], [256, 512], [1.0, 1.0], [1.0, 1.0], [1.0, 1.0])


class TestRoundTrips:
    def test_csv_is_lossless(self, params, tmp_path):
        pop = generate_population(params, year_fraction(2010, 9, 1), 500, seed=3)
        path = tmp_path / "hosts.csv"
        pop.to_csv(path)
        back = Population.from_csv(path)
        for f in ("cores", "per_core_memory_mb", "memory_mb",
                  "whetstone_mips", "dhrystone_mips", "disk_gb"):
            np.testing.assert_array_equal(pop.column(f), back.column(f))

    def test_csv_write_is_stable(self, params, tmp_path):
        pop = generate_population(params, 2012.25, 200, seed=4)
        pop.to_csv(tmp_path / "a.csv")
        Population.from_csv(tmp_path / "a.csv").to_csv(tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_jsonl_is_lossless(self, params, tmp_path):
        pop = generate_population(params, 2008.75, 300, seed=5)
        path = tmp_path / "hosts.jsonl"
        pop.to_jsonl(path)
        back = Population.from_jsonl(path)
        for f in ("whetstone_mips", "dhrystone_mips", "disk_gb"):
            np.testing.assert_array_equal(pop.column(f), back.column(f))

    def test_empty_population_keeps_header(self, tmp_path):
        path = tmp_path / "empty.csv"
        Population.allocate(0).to_csv(path)
        assert path.read_text() == CSV_HEADER + "\n"
        assert len(Population.from_csv(path)) == 0

    def test_header_validated(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError, match="header"):
            Population.from_csv(path)

    def test_load_detects_format_by_extension(self, params, tmp_path):
        pop = generate_population(params, 2010.0, 20, seed=6)
        pop.to_jsonl(tmp_path / "x.jsonl")
        pop.to_csv(tmp_path / "x.csv")
        assert len(Population.load(tmp_path / "x.jsonl")) == 20
        assert len(Population.load(tmp_path / "x.csv")) == 20
