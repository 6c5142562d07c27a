"""Shared fixtures. Simulation-backed fixtures use a small file transfer so
the unit suite stays fast; the acceptance tests use the full-size defaults."""

import numpy as np
import pytest

from nettwin.automl import build_twin
from nettwin.data import Dataset, Sample, SweepSpec, generate_dataset
from nettwin.simulator import FlowSpec, NetworkConfig, PathConfig

SMALL_FLOW = FlowSpec(file_bytes=2_000_000)
TINY_FLOW = FlowSpec(file_bytes=300_000)


@pytest.fixture(scope="session")
def small_flow():
    return SMALL_FLOW


@pytest.fixture(scope="session")
def tiny_flow():
    return TINY_FLOW


def synth_dataset(n: int, seed: int = 0) -> Dataset:
    """Simulation-free dataset with a smooth config -> latency relationship."""
    rng = np.random.Generator(np.random.PCG64(seed))
    rows = []
    for _ in range(n):
        bw1 = float(25 + 100 * rng.random())
        bw2 = float(25 + 100 * rng.random())
        q1 = int(rng.integers(50, 151))
        q2 = int(rng.integers(50, 151))
        lat1 = 800.0 / bw1 + 0.002 * q1
        lat2 = 800.0 / bw2 + 0.002 * q2
        cfg = NetworkConfig(PathConfig(bw1, q1), PathConfig(bw2, q2))
        rows.append(Sample(cfg, lat1, lat2))
    return Dataset(rows, provenance="ingested")


@pytest.fixture(scope="session")
def synth_train():
    return synth_dataset(120, seed=0)


@pytest.fixture(scope="session")
def synth_test():
    return synth_dataset(50, seed=1)


@pytest.fixture(scope="session")
def small_dataset():
    """60 interval-sampled simulated configs of the default sweep."""
    return generate_dataset(SweepSpec(), SMALL_FLOW, sample_n=60)


@pytest.fixture(scope="session")
def tiny_twin(synth_train):
    twin, _ = build_twin(synth_train, budget_s=120.0, preset="fast", seed=5)
    return twin
