"""Inference facade over a loaded twin: single/batch prediction with timing."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .automl import Twin
from .data import CSV_HEADER
from .errors import DatasetError
from .simulator import NetworkConfig, PathConfig

CONFIG_HEADER = CSV_HEADER[:4]
PREDICTION_HEADER = CONFIG_HEADER + ["pred_lat1_s", "pred_lat2_s", "extrapolation"]


@dataclass(frozen=True)
class Prediction:
    config: NetworkConfig
    latency1_s: float
    latency2_s: float
    per_query_time_s: float
    extrapolation: bool


def _extrapolation_flags(twin: Twin, X: np.ndarray) -> np.ndarray:
    # the training bounding box is exactly the stored min-max normalization
    lo = np.array(twin.scaler.lo)
    hi = np.array(twin.scaler.hi)
    return np.any((X < lo) | (X > hi), axis=1)


def predict(twin: Twin, cfg: NetworkConfig) -> Prediction:
    """Predict both path latencies for one configuration."""
    X = np.array([cfg.as_features()], dtype=float)
    t0 = time.perf_counter()
    lat1 = float(twin.regressors["path1"].predict(X)[0])
    lat2 = float(twin.regressors["path2"].predict(X)[0])
    elapsed = time.perf_counter() - t0
    extra = bool(_extrapolation_flags(twin, X)[0])
    return Prediction(cfg, lat1, lat2, elapsed, extra)


def predict_batch(twin: Twin, configs: list[NetworkConfig]) -> list[Prediction]:
    """Vectorized map of :func:`predict`; per-query time is amortized."""
    if not configs:
        raise DatasetError("predict_batch needs at least one config")
    X = np.array([c.as_features() for c in configs], dtype=float)
    t0 = time.perf_counter()
    lat1 = twin.regressors["path1"].predict(X)
    lat2 = twin.regressors["path2"].predict(X)
    per_query = (time.perf_counter() - t0) / len(configs)
    extra = _extrapolation_flags(twin, X)
    return [Prediction(c, float(a), float(b), per_query, bool(e))
            for c, a, b, e in zip(configs, lat1, lat2, extra)]


def read_configs_csv(path) -> list[NetworkConfig]:
    """Batch prediction input: the 4 config columns of the dataset schema."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or header[:4] != CONFIG_HEADER:
            raise DatasetError(f"{path}: expected header starting with {CONFIG_HEADER}")
        configs = []
        for row_no, row in enumerate(reader, start=2):
            if len(row) < 4:
                raise DatasetError(f"row {row_no}: expected at least 4 cells")
            try:
                bw1, bw2 = float(row[0]), float(row[2])
                q1, q2 = int(float(row[1])), int(float(row[3]))
            except ValueError as exc:
                raise DatasetError(f"row {row_no}: non-numeric cell ({exc})") from None
            configs.append(NetworkConfig(PathConfig(bw1, q1), PathConfig(bw2, q2)))
    return configs


def write_predictions_csv(preds: list[Prediction], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(PREDICTION_HEADER)
        for p in preds:
            w.writerow([
                repr(p.config.path1.bandwidth_mbps), p.config.path1.queue_pkts,
                repr(p.config.path2.bandwidth_mbps), p.config.path2.queue_pkts,
                repr(p.latency1_s), repr(p.latency2_s),
                "true" if p.extrapolation else "false",
            ])
