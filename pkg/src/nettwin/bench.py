"""Evaluation harness: simulator-vs-twin speedup, pipeline time projection,
and the data-quality study (raw vs noised vs cleaned training sets).

Timed regions contain only simulate/predict calls; file I/O and data
preparation stay outside.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__ as _version
from .automl import build_twin, evaluate, Twin
from .data import (Dataset, SweepSpec, generate_dataset, holdout_configs,
                   interval_indices, simulate_configs)
from .denoise import FilterSpec, NoiseSpec, add_gaussian_noise, denoise_dataset
from .errors import InvalidConfigError
from .seeding import derive_seed
from .simulator import FlowSpec, NetworkConfig, simulate_path

MIN_TIMED_CONFIGS = 30
MIN_REPEATS = 3
_MIN_MEASURABLE_S = 1e-3
_MAX_TWIN_LOOPS = 1 << 16


def time_speedup(twin: Twin, flow: FlowSpec, configs: list[NetworkConfig],
                 repeats: int = 5, engine: str = "fast") -> tuple[float, float, float]:
    """Mean per-config wall time of the simulator and the twin, plus the ratio.

    Both sides run single-threaded. The twin side predicts the whole config
    list per pass; if a pass falls below timer resolution, the number of
    passes doubles until the measurement is long enough.
    """
    if len(configs) < MIN_TIMED_CONFIGS:
        raise InvalidConfigError(f"need at least {MIN_TIMED_CONFIGS} configs to time")
    if repeats < MIN_REPEATS:
        raise InvalidConfigError(f"need at least {MIN_REPEATS} repeats")
    n = len(configs)

    # untimed warmup so compiled-code loading never lands inside a repeat
    simulate_path(configs[0].path1, flow, engine=engine)

    sim_means = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for cfg in configs:
            simulate_path(cfg.path1, flow, engine=engine)
            simulate_path(cfg.path2, flow, engine=engine)
        sim_means.append((time.perf_counter() - t0) / n)
    sim_mean_s = float(np.mean(sim_means))

    X = np.array([c.as_features() for c in configs], dtype=float)
    reg1 = twin.regressors["path1"]
    reg2 = twin.regressors["path2"]
    loops = 1
    while True:
        twin_means = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            for _ in range(loops):
                reg1.predict(X)
                reg2.predict(X)
            twin_means.append((time.perf_counter() - t0) / (n * loops))
        total = float(np.sum(twin_means)) * n * loops
        if total >= _MIN_MEASURABLE_S or loops >= _MAX_TWIN_LOOPS:
            break
        loops *= 2
    twin_mean_s = float(np.mean(twin_means))
    if twin_mean_s <= 0:
        raise InvalidConfigError("twin inference is below timer resolution")
    return sim_mean_s, twin_mean_s, sim_mean_s / twin_mean_s


def project_pipeline(grid_size: int, sim_mean_s: float, collect_n: int,
                     train_time_s: float, twin_batch_time_s: float) -> dict:
    """Hours to simulate the full grid vs hours for the twin pipeline
    (collect a subset, train, run batch inference), and their ratio."""
    if grid_size <= 0 or sim_mean_s <= 0 or collect_n <= 0:
        raise InvalidConfigError("projection inputs must be positive")
    full_grid_sim_hours = grid_size * sim_mean_s / 3600.0
    pipeline_hours = (collect_n * sim_mean_s + train_time_s + twin_batch_time_s) / 3600.0
    return {
        "full_grid_sim_hours": full_grid_sim_hours,
        "pipeline_hours": pipeline_hours,
        "projection_factor": full_grid_sim_hours / pipeline_hours,
    }


@dataclass
class BenchReport:
    sim_mean_s: float
    twin_mean_s: float
    speedup: float
    n_timed: int
    repeats: int
    accuracy: dict          # variant -> target -> Metrics
    projection: dict
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.speedup <= 0:
            raise InvalidConfigError("speedup must be positive")
        if self.n_timed < MIN_TIMED_CONFIGS:
            raise InvalidConfigError(f"n_timed must be >= {MIN_TIMED_CONFIGS}")

    def to_json(self) -> dict:
        return {
            "version": _version,
            "params": self.params,
            "accuracy": {
                variant: {t: m.to_json() for t, m in per_target.items()}
                for variant, per_target in self.accuracy.items()
            },
            # everything measured lives under the quarantined timing key
            "timing": {
                "sim_mean_s": self.sim_mean_s,
                "twin_mean_s": self.twin_mean_s,
                "speedup": self.speedup,
                "n_timed": self.n_timed,
                "repeats": self.repeats,
                "projection": self.projection,
            },
        }


def run_quality_study(spec: SweepSpec, flow: FlowSpec, noise: NoiseSpec,
                      filt: FilterSpec, budget_s: float, seed: int,
                      sample_n: int = 400, test_n: int = 500,
                      train: Dataset | None = None, test: Dataset | None = None,
                      jobs: int = 1, preset: str = "good") -> dict:
    """Train twins on raw, noised, and filtered training data and score all
    three against the same clean held-out set.

    Returns per-variant twins, metrics, clamp count, and the plot-ready
    latency series of each variant.
    """
    if train is None:
        train = generate_dataset(spec, flow, sample_n=sample_n, jobs=jobs)
    if test is None:
        exclude = set(interval_indices(spec.grid_size(), sample_n))
        configs = holdout_configs(spec, test_n, derive_seed(seed, "holdout"), exclude)
        test = simulate_configs(configs, flow, jobs=jobs)

    noised, clamped = add_gaussian_noise(train, noise)
    cleaned = denoise_dataset(noised, filt)
    variants = {"raw": train, "noised": noised, "cleaned": cleaned}

    twins = {}
    metrics = {}
    train_seed = derive_seed(seed, "train")
    for name, ds in variants.items():
        twin, _ = build_twin(ds, budget_s, preset, train_seed)
        twins[name] = twin
        metrics[name] = {t: evaluate(twin, test, t) for t in ("path1", "path2")}

    series = {
        name: {
            "path1": ds.latencies("path1").tolist(),
            "path2": ds.latencies("path2").tolist(),
        }
        for name, ds in variants.items()
    }
    return {
        "twins": twins,
        "metrics": metrics,
        "clamped": clamped,
        "series": series,
        "train": train,
        "test": test,
        "datasets": variants,
    }
