"""Sweep grids, dataset generation, interval sampling, CSV persistence, splits.

The CSV schema `bw1_mbps,q1_pkts,bw2_mbps,q2_pkts,lat1_s,lat2_s` is the
interchange format for every downstream module, and doubles as the ingest
path for externally simulated datasets.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DatasetError, InvalidConfigError, NettwinError
from .simulator import FlowSpec, NetworkConfig, PathConfig, simulate_path

CSV_HEADER = ["bw1_mbps", "q1_pkts", "bw2_mbps", "q2_pkts", "lat1_s", "lat2_s"]

PROVENANCES = ("simulated", "ingested", "noised", "filtered")


@dataclass(frozen=True)
class SweepSpec:
    bw_min: float = 25.0
    bw_max: float = 125.0
    bw_step: float = 5.0
    q_min: int = 50
    q_max: int = 150
    q_step: int = 5

    def __post_init__(self):
        if self.bw_step <= 0 or self.q_step <= 0:
            raise InvalidConfigError("sweep steps must be positive")
        if self.bw_min > self.bw_max or self.q_min > self.q_max:
            raise InvalidConfigError("sweep min must not exceed max")

    def bw_levels(self) -> list[float]:
        n = int(math.floor((self.bw_max - self.bw_min) / self.bw_step + 1e-9)) + 1
        return [self.bw_min + i * self.bw_step for i in range(n)]

    def q_levels(self) -> list[int]:
        n = (self.q_max - self.q_min) // self.q_step + 1
        return [self.q_min + i * self.q_step for i in range(n)]

    def grid_size(self) -> int:
        return (len(self.bw_levels()) * len(self.q_levels())) ** 2


@dataclass(frozen=True)
class Sample:
    config: NetworkConfig
    latency1_s: float
    latency2_s: float

    def __post_init__(self):
        if self.latency1_s <= 0 or self.latency2_s <= 0:
            raise DatasetError("latencies must be positive")


@dataclass
class Dataset:
    rows: list[Sample]
    provenance: str = "simulated"
    seed_used: int | None = None

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise DatasetError(f"unknown provenance {self.provenance!r}")

    def __len__(self) -> int:
        return len(self.rows)

    def features(self) -> np.ndarray:
        """(N, 4) feature matrix in bw1,q1,bw2,q2 column order."""
        return np.array([s.config.as_features() for s in self.rows], dtype=float)

    def latencies(self, target: str) -> np.ndarray:
        if target == "path1":
            return np.array([s.latency1_s for s in self.rows], dtype=float)
        if target == "path2":
            return np.array([s.latency2_s for s in self.rows], dtype=float)
        raise ValueError(f"target must be 'path1' or 'path2', got {target!r}")

    def with_latencies(self, lat1: np.ndarray, lat2: np.ndarray, provenance: str) -> "Dataset":
        rows = [replace(s, latency1_s=float(a), latency2_s=float(b))
                for s, a, b in zip(self.rows, lat1, lat2)]
        return Dataset(rows, provenance=provenance, seed_used=self.seed_used)


def full_grid(spec: SweepSpec) -> list[NetworkConfig]:
    """All grid configs in lexicographic nested order (bw1, q1, bw2, q2)."""
    bws = spec.bw_levels()
    qs = spec.q_levels()
    if not bws or not qs:
        raise InvalidConfigError("sweep has an empty axis")
    return [
        NetworkConfig(PathConfig(bw1, q1), PathConfig(bw2, q2))
        for bw1 in bws for q1 in qs for bw2 in bws for q2 in qs
    ]


def interval_indices(length: int, n: int) -> list[int]:
    """Indices picked by fixed-stride sampling: 0, s, 2s, ... with s = floor(length/n)."""
    if n < 1:
        raise InvalidConfigError(f"sample size must be >= 1, got {n}")
    if n >= length:
        return list(range(length))
    stride = length // n
    return [i * stride for i in range(n)]


def interval_sample(items: list, n: int) -> list:
    """Every stride-th element starting at index 0; preserves order.

    Stride is floor(len/n); returns the first n multiples. When n covers
    the whole list this is the identity.
    """
    return [items[i] for i in interval_indices(len(items), n)]


def holdout_configs(spec: SweepSpec, n: int, seed: int,
                    exclude: set[int] | None = None) -> list[NetworkConfig]:
    """Seeded sample of n grid configs, drawn without replacement from grid
    indices not in `exclude` (e.g. the interval-sampled training indices)."""
    configs = full_grid(spec)
    candidates = np.array(sorted(set(range(len(configs))) - (exclude or set())))
    if n > len(candidates):
        raise InvalidConfigError(f"cannot hold out {n} of {len(candidates)} configs")
    rng = np.random.Generator(np.random.PCG64(seed))
    picked = rng.choice(len(candidates), size=n, replace=False)
    return [configs[i] for i in candidates[np.sort(picked)]]


def simulate_configs(configs: list[NetworkConfig], flow: FlowSpec = FlowSpec(),
                     engine: str = "fast", jobs: int = 1) -> Dataset:
    """Simulate an explicit config list into a Dataset (rows in input order)."""
    tasks = [(cfg, flow, engine) for cfg in configs]
    if jobs > 1:
        import multiprocessing
        with multiprocessing.Pool(jobs) as pool:
            results = pool.map(_simulate_config, tasks, chunksize=16)
    else:
        results = [_simulate_config(t) for t in tasks]
    rows = [Sample(cfg, lat1, lat2) for cfg, (lat1, lat2) in zip(configs, results)]
    return Dataset(rows, provenance="simulated")


def _simulate_config(args):
    cfg, flow, engine = args
    try:
        r1 = simulate_path(cfg.path1, flow, engine=engine)
        r2 = simulate_path(cfg.path2, flow, engine=engine)
    except NettwinError as exc:
        raise type(exc)(f"{exc} (config {cfg})") from exc
    return r1.latency_s, r2.latency_s


def generate_dataset(spec: SweepSpec, flow: FlowSpec = FlowSpec(),
                     sample_n: int | None = None, engine: str = "fast",
                     jobs: int = 1) -> Dataset:
    """Simulate the sweep grid (optionally interval-sampled) into a Dataset.

    Results are merged in grid order, so the output is identical no matter
    how many workers ran the simulations.
    """
    configs = full_grid(spec)
    if sample_n is not None:
        configs = interval_sample(configs, sample_n)
    return simulate_configs(configs, flow, engine=engine, jobs=jobs)


def _fmt(x: float) -> str:
    # repr() is the shortest string that round-trips the double exactly
    return repr(float(x))


def write_csv(ds: Dataset, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_HEADER)
        for s in ds.rows:
            w.writerow([
                _fmt(s.config.path1.bandwidth_mbps),
                s.config.path1.queue_pkts,
                _fmt(s.config.path2.bandwidth_mbps),
                s.config.path2.queue_pkts,
                _fmt(s.latency1_s),
                _fmt(s.latency2_s),
            ])


def _parse_queue(cell: str, row_no: int, col: str) -> int:
    v = float(cell)
    if v != int(v):
        raise DatasetError(f"row {row_no}: {col} must be an integer, got {cell!r}")
    return int(v)


def read_csv(path, provenance: str = "ingested") -> Dataset:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        if header != CSV_HEADER:
            missing = [c for c in CSV_HEADER if c not in header]
            detail = f" (missing column(s): {', '.join(missing)})" if missing else ""
            raise DatasetError(f"{path}: malformed header {header!r}{detail}")
        rows = []
        for row_no, row in enumerate(reader, start=2):
            if len(row) != 6:
                raise DatasetError(f"row {row_no}: expected 6 cells, got {len(row)}")
            try:
                bw1, lat1, lat2 = float(row[0]), float(row[4]), float(row[5])
                bw2 = float(row[2])
            except ValueError as exc:
                raise DatasetError(f"row {row_no}: non-numeric cell ({exc})") from None
            q1 = _parse_queue(row[1], row_no, "q1_pkts")
            q2 = _parse_queue(row[3], row_no, "q2_pkts")
            if lat1 <= 0 or lat2 <= 0:
                raise DatasetError(f"row {row_no}: non-positive latency")
            cfg = NetworkConfig(PathConfig(bw1, q1), PathConfig(bw2, q2))
            rows.append(Sample(cfg, lat1, lat2))
    return Dataset(rows, provenance=provenance)


def split(ds: Dataset, test_frac: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded disjoint train/test split; deterministic per seed.

    Indices are shuffled, the first ceil(test_frac * N) go to test, and each
    partition keeps the original row order.
    """
    if not 0 < test_frac < 1:
        raise InvalidConfigError(f"test fraction must be in (0, 1), got {test_frac}")
    if not ds.rows:
        raise DatasetError("cannot split an empty dataset")
    n = len(ds.rows)
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    n_test = math.ceil(test_frac * n)
    test_idx = sorted(perm[:n_test].tolist())
    train_idx = sorted(perm[n_test:].tolist())
    train = Dataset([ds.rows[i] for i in train_idx], provenance=ds.provenance, seed_used=seed)
    test = Dataset([ds.rows[i] for i in test_idx], provenance=ds.provenance, seed_used=seed)
    return train, test
