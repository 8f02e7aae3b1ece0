"""Columnar host populations with lossless CSV / JSON-lines round trips."""

from __future__ import annotations

import json
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

POPULATION_FIELDS = (
    "cores",
    "per_core_memory_mb",
    "memory_mb",
    "whetstone_mips",
    "dhrystone_mips",
    "disk_gb",
)

CSV_HEADER = ",".join(POPULATION_FIELDS)


@dataclass(frozen=True)
class HostSpec:
    """One synthesized or observed host."""

    cores: int
    per_core_memory_mb: int
    memory_mb: int
    whetstone_mips: float
    dhrystone_mips: float
    disk_gb: float

    def __post_init__(self):
        if self.memory_mb != self.cores * self.per_core_memory_mb:
            raise ValueError(
                f"memory_mb must equal cores * per_core_memory_mb: "
                f"{self.memory_mb} != {self.cores} * {self.per_core_memory_mb}"
            )
        if not (self.whetstone_mips > 0 and self.dhrystone_mips > 0 and self.disk_gb > 0):
            raise ValueError("benchmark speeds and disk space must be strictly positive")


class Population(Sequence):
    """A fixed-size set of hosts stored as columns.

    Behaves as a sequence of HostSpec rows but keeps the data in numpy
    arrays so statistics and allocation stay vectorized.
    """

    __slots__ = tuple(POPULATION_FIELDS)

    def __init__(self, cores, per_core_memory_mb, memory_mb,
                 whetstone_mips, dhrystone_mips, disk_gb):
        self.cores = np.asarray(cores, dtype=np.int64)
        self.per_core_memory_mb = np.asarray(per_core_memory_mb, dtype=np.int64)
        self.memory_mb = np.asarray(memory_mb, dtype=np.int64)
        self.whetstone_mips = np.asarray(whetstone_mips, dtype=np.float64)
        self.dhrystone_mips = np.asarray(dhrystone_mips, dtype=np.float64)
        self.disk_gb = np.asarray(disk_gb, dtype=np.float64)
        n = len(self.cores)
        for name in POPULATION_FIELDS:
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name} has mismatched length")

    @classmethod
    def allocate(cls, n: int) -> "Population":
        return cls(
            np.zeros(n, dtype=np.int64),
            np.zeros(n, dtype=np.int64),
            np.zeros(n, dtype=np.int64),
            np.zeros(n, dtype=np.float64),
            np.zeros(n, dtype=np.float64),
            np.zeros(n, dtype=np.float64),
        )

    @classmethod
    def from_hosts(cls, hosts: Sequence[HostSpec]) -> "Population":
        return cls(
            [h.cores for h in hosts],
            [h.per_core_memory_mb for h in hosts],
            [h.memory_mb for h in hosts],
            [h.whetstone_mips for h in hosts],
            [h.dhrystone_mips for h in hosts],
            [h.disk_gb for h in hosts],
        )

    def __len__(self) -> int:
        return len(self.cores)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Population(*(getattr(self, f)[i] for f in POPULATION_FIELDS))
        return HostSpec(
            int(self.cores[i]),
            int(self.per_core_memory_mb[i]),
            int(self.memory_mb[i]),
            float(self.whetstone_mips[i]),
            float(self.dhrystone_mips[i]),
            float(self.disk_gb[i]),
        )

    def __iter__(self) -> Iterator[HostSpec]:
        for i in range(len(self)):
            yield self[i]

    def column(self, name: str) -> np.ndarray:
        if name not in POPULATION_FIELDS:
            raise KeyError(name)
        return getattr(self, name)

    def resource_columns(self) -> dict[str, np.ndarray]:
        """The six analysis columns, including derived per-core memory."""
        return {
            "cores": self.cores.astype(float),
            "memory": self.memory_mb.astype(float),
            "mem_per_core": self.per_core_memory_mb.astype(float),
            "whetstone": self.whetstone_mips,
            "dhrystone": self.dhrystone_mips,
            "disk": self.disk_gb,
        }

    def summary(self) -> dict[str, dict[str, float]]:
        """Mean and population standard deviation per column."""
        out = {}
        for name in POPULATION_FIELDS:
            col = getattr(self, name).astype(float)
            if len(col) == 0:
                out[name] = {"mean": float("nan"), "std": float("nan")}
            else:
                out[name] = {"mean": float(col.mean()), "std": float(col.std())}
        return out

    # -- serialization ----------------------------------------------------

    def to_csv(self, path) -> None:
        with _open_write(path) as f:
            f.write(CSV_HEADER + "\n")
            for i in range(len(self)):
                f.write(
                    f"{int(self.cores[i])},{int(self.per_core_memory_mb[i])},"
                    f"{int(self.memory_mb[i])},{float(self.whetstone_mips[i])!r},"
                    f"{float(self.dhrystone_mips[i])!r},{float(self.disk_gb[i])!r}\n"
                )

    @classmethod
    def from_csv(cls, path) -> "Population":
        with _open_read(path) as f:
            header = f.readline().strip()
            if header != CSV_HEADER:
                raise ValueError(f"unexpected population header: {header!r}")
            rows = [line.rstrip("\n").split(",") for line in f if line.strip()]
        if rows and any(len(r) != len(POPULATION_FIELDS) for r in rows):
            raise ValueError("malformed population row")
        return cls(
            [int(r[0]) for r in rows],
            [int(r[1]) for r in rows],
            [int(r[2]) for r in rows],
            [float(r[3]) for r in rows],
            [float(r[4]) for r in rows],
            [float(r[5]) for r in rows],
        )

    def to_jsonl(self, path) -> None:
        with _open_write(path) as f:
            for i in range(len(self)):
                f.write(json.dumps({
                    "cores": int(self.cores[i]),
                    "per_core_memory_mb": int(self.per_core_memory_mb[i]),
                    "memory_mb": int(self.memory_mb[i]),
                    "whetstone_mips": float(self.whetstone_mips[i]),
                    "dhrystone_mips": float(self.dhrystone_mips[i]),
                    "disk_gb": float(self.disk_gb[i]),
                }) + "\n")

    @classmethod
    def from_jsonl(cls, path) -> "Population":
        hosts = []
        with _open_read(path) as f:
            for line in f:
                if not line.strip():
                    continue
                d = json.loads(line)
                hosts.append(tuple(d[k] for k in POPULATION_FIELDS))
        return cls(
            [h[0] for h in hosts],
            [h[1] for h in hosts],
            [h[2] for h in hosts],
            [h[3] for h in hosts],
            [h[4] for h in hosts],
            [h[5] for h in hosts],
        )

    def save(self, path, fmt: str = "csv") -> None:
        if fmt == "csv":
            self.to_csv(path)
        elif fmt == "jsonl":
            self.to_jsonl(path)
        else:
            raise ValueError(f"unknown population format {fmt!r}")

    @classmethod
    def load(cls, path, fmt: str | None = None) -> "Population":
        if fmt is None:
            fmt = "jsonl" if str(path).endswith((".jsonl", ".ndjson")) else "csv"
        if fmt == "csv":
            return cls.from_csv(path)
        if fmt == "jsonl":
            return cls.from_jsonl(path)
        raise ValueError(f"unknown population format {fmt!r}")


class _open_write:
    """Context manager accepting a path or an already-open text handle."""

    def __init__(self, target):
        self.target = target
        self._own = None

    def __enter__(self):
        if hasattr(self.target, "write"):
            return self.target
        self._own = open(self.target, "w", encoding="utf-8", newline="\n")
        return self._own

    def __exit__(self, *exc):
        if self._own is not None:
            self._own.close()
        return False


class _open_read:
    def __init__(self, target):
        self.target = target
        self._own = None

    def __enter__(self):
        if hasattr(self.target, "read"):
            return self.target
        self._own = open(self.target, "r", encoding="utf-8")
        return self._own

    def __exit__(self, *exc):
        if self._own is not None:
            self._own.close()
        return False
