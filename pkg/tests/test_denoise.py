import numpy as np
import pytest

from nettwin.denoise import (FilterSpec, NoiseSpec, add_gaussian_noise,
                             denoise_dataset, savitzky_golay, sg_coefficients)
from nettwin.errors import InvalidConfigError

from conftest import synth_dataset


def test_known_coefficient_tables():
    w52 = sg_coefficients(FilterSpec(window=5, order=2))
    assert np.allclose(w52, np.array([-3, 12, 17, 12, -3]) / 35.0, atol=1e-9)
    w72 = sg_coefficients(FilterSpec(window=7, order=2))
    assert np.allclose(w72, np.array([-2, 3, 6, 7, 6, 3, -2]) / 21.0, atol=1e-9)


def test_coefficients_match_least_squares_oracle():
    # independent oracle: weight j is the center value of the polynomial
    # fitted to the j-th standard basis vector over the window
    for window, order in [(5, 2), (7, 3), (9, 2), (11, 3)]:
        spec = FilterSpec(window=window, order=order)
        w = sg_coefficients(spec)
        m = (window - 1) // 2
        x = np.arange(-m, m + 1, dtype=float)
        oracle = np.empty(window)
        for j in range(window):
            e = np.zeros(window)
            e[j] = 1.0
            oracle[j] = np.polyval(np.polyfit(x, e, order), 0.0)
        assert np.allclose(w, oracle, atol=1e-9)
        assert w.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.allclose(w, w[::-1], atol=1e-9)  # symmetric window


def test_full_order_window_is_identity():
    # order = window - 1 interpolates, so the center weight is a delta
    w = sg_coefficients(FilterSpec(window=5, order=4))
    assert np.allclose(w, [0, 0, 1, 0, 0], atol=1e-9)


def test_cubic_reproduction_including_boundaries():
    x = np.arange(60, dtype=float)
    y = 0.002 * x ** 3 - 0.4 * x ** 2 + 3.0 * x + 7.0
    out = savitzky_golay(y, FilterSpec(window=11, order=3))
    assert np.allclose(out, y, atol=1e-9)


def test_constant_series_unchanged():
    y = np.full(30, 4.25)
    out = savitzky_golay(y, FilterSpec(window=7, order=2))
    assert np.allclose(out, y, atol=1e-12)


def test_filter_reduces_noise_variance():
    rng = np.random.Generator(np.random.PCG64(0))
    x = np.linspace(0, 6 * np.pi, 400)
    clean = np.sin(x)
    noisy = clean + rng.normal(0, 0.3, size=len(x))
    filtered = savitzky_golay(noisy, FilterSpec(window=11, order=3))
    assert np.mean((filtered - clean) ** 2) < 0.5 * np.mean((noisy - clean) ** 2)


def test_filter_validation():
    with pytest.raises(InvalidConfigError):
        FilterSpec(window=4, order=2)
    with pytest.raises(InvalidConfigError):
        FilterSpec(window=1, order=0)
    with pytest.raises(InvalidConfigError):
        FilterSpec(window=5, order=5)
    with pytest.raises(InvalidConfigError):
        savitzky_golay(np.ones(4), FilterSpec(window=5, order=2))
    with pytest.raises(InvalidConfigError):
        savitzky_golay(np.ones((4, 4)), FilterSpec(window=3, order=1))


def test_noise_is_seeded_and_clamped():
    ds = synth_dataset(200, seed=3)
    spec = NoiseSpec(sigma=1.0, mu=0.0, seed=42)
    a, clamped_a = add_gaussian_noise(ds, spec)
    b, clamped_b = add_gaussian_noise(ds, spec)
    assert np.array_equal(a.latencies("path1"), b.latencies("path1"))
    assert np.array_equal(a.latencies("path2"), b.latencies("path2"))
    assert clamped_a == clamped_b
    assert a.provenance == "noised"
    assert a.seed_used == 42
    assert np.all(a.latencies("path1") >= spec.clamp_floor_s)
    c, _ = add_gaussian_noise(ds, NoiseSpec(sigma=1.0, seed=43))
    assert not np.array_equal(a.latencies("path1"), c.latencies("path1"))


def test_zero_sigma_is_identity():
    ds = synth_dataset(50, seed=4)
    out, clamped = add_gaussian_noise(ds, NoiseSpec(sigma=0.0, seed=1))
    assert clamped == 0
    assert np.array_equal(out.latencies("path1"), ds.latencies("path1"))
    assert np.array_equal(out.latencies("path2"), ds.latencies("path2"))


def test_noise_validation():
    with pytest.raises(InvalidConfigError):
        NoiseSpec(sigma=-1.0)
    with pytest.raises(InvalidConfigError):
        NoiseSpec(clamp_floor_s=0.0)


def test_denoise_dataset_filters_both_columns():
    ds = synth_dataset(80, seed=5)
    spec = FilterSpec(window=11, order=3)
    out = denoise_dataset(ds, spec)
    assert out.provenance == "filtered"
    assert len(out) == len(ds)
    for target in ("path1", "path2"):
        expected = np.maximum(savitzky_golay(ds.latencies(target), spec), 1e-6)
        assert np.array_equal(out.latencies(target), expected)
    # configs are untouched
    assert np.array_equal(out.features(), ds.features())
