"""Gaussian noise injection and Savitzky-Golay smoothing for latency columns.

Filtering operates on the dataset's row order, which for simulated sets is
the grid sweep order, so a latency column is treated as an indexed series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import InvalidConfigError

# filtered values are clamped here so datasets never carry non-positive latencies
FILTER_FLOOR_S = 1e-6


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 1.0
    mu: float = 0.0
    seed: int = 0
    clamp_floor_s: float = 1e-6

    def __post_init__(self):
        if self.sigma < 0:
            raise InvalidConfigError(f"sigma must be >= 0, got {self.sigma}")
        if self.clamp_floor_s <= 0:
            raise InvalidConfigError("clamp floor must be positive")


@dataclass(frozen=True)
class FilterSpec:
    window: int = 11
    order: int = 3

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise InvalidConfigError(f"window must be an odd integer >= 3, got {self.window}")
        if not 0 <= self.order < self.window:
            raise InvalidConfigError(
                f"order must satisfy 0 <= order < window, got {self.order}/{self.window}")


def add_gaussian_noise(ds: Dataset, spec: NoiseSpec) -> tuple[Dataset, int]:
    """Perturb both latency columns with seeded Gaussian noise.

    The generator is consumed in row order, lat1 then lat2 within each row.
    Values are clamped below at ``spec.clamp_floor_s``; returns the noised
    dataset and the number of clamped values.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    lat = np.column_stack([ds.latencies("path1"), ds.latencies("path2")])
    deltas = rng.normal(spec.mu, spec.sigma, size=lat.shape)
    noised = lat + deltas
    clamped = int(np.sum(noised < spec.clamp_floor_s))
    noised = np.maximum(noised, spec.clamp_floor_s)
    out = ds.with_latencies(noised[:, 0], noised[:, 1], provenance="noised")
    out.seed_used = spec.seed
    return out, clamped


def sg_coefficients(spec: FilterSpec) -> np.ndarray:
    """Convolution weights reproducing the least-squares fit value at the center.

    For offsets -m..m and polynomial degree ``spec.order``, w @ y equals the
    fitted polynomial evaluated at offset 0. Weights are symmetric and sum to 1.
    """
    m = (spec.window - 1) // 2
    offsets = np.arange(-m, m + 1, dtype=float)
    design = np.vander(offsets, spec.order + 1, increasing=True)
    return np.linalg.pinv(design)[0]


def _fit_window(y: np.ndarray, offsets: np.ndarray, order: int) -> np.ndarray:
    design = np.vander(offsets, order + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return coef


def savitzky_golay(series, spec: FilterSpec) -> np.ndarray:
    """Smooth a 1-D series; output has the same length as the input.

    Interior points are the convolution with :func:`sg_coefficients`; the
    first/last m points come from evaluating the polynomial fitted to the
    first/last window at their own offsets (no data is invented).
    """
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise InvalidConfigError("series must be one-dimensional")
    if len(y) < spec.window:
        raise InvalidConfigError(
            f"series length {len(y)} is shorter than the filter window {spec.window}")
    m = (spec.window - 1) // 2
    w = sg_coefficients(spec)
    out = np.empty_like(y)
    # interior: correlation with the (symmetric) weight vector
    out[m:len(y) - m] = np.convolve(y, w[::-1], mode="valid")
    offsets = np.arange(spec.window, dtype=float)
    head = _fit_window(y[:spec.window], offsets, spec.order)
    tail = _fit_window(y[-spec.window:], offsets, spec.order)
    vander_edge = np.vander(offsets, spec.order + 1, increasing=True)
    out[:m] = (vander_edge @ head)[:m]
    out[len(y) - m:] = (vander_edge @ tail)[spec.window - m:]
    return out


def denoise_dataset(ds: Dataset, spec: FilterSpec) -> Dataset:
    """Filter the two latency columns independently, in row order."""
    lat1 = savitzky_golay(ds.latencies("path1"), spec)
    lat2 = savitzky_golay(ds.latencies("path2"), spec)
    lat1 = np.maximum(lat1, FILTER_FLOOR_S)
    lat2 = np.maximum(lat2, FILTER_FLOOR_S)
    return ds.with_latencies(lat1, lat2, provenance="filtered")
