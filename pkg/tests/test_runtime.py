import numpy as np
import pytest

from nettwin.errors import DatasetError
from nettwin.runtime import (PREDICTION_HEADER, predict, predict_batch,
                             read_configs_csv, write_predictions_csv)
from nettwin.simulator import NetworkConfig, PathConfig

from conftest import synth_dataset


@pytest.fixture(scope="module")
def configs():
    return [s.config for s in synth_dataset(40, seed=20).rows]


def test_batch_matches_pointwise(tiny_twin, configs):
    batch = predict_batch(tiny_twin, configs)
    for cfg, p in zip(configs, batch):
        single = predict(tiny_twin, cfg)
        assert p.latency1_s == single.latency1_s
        assert p.latency2_s == single.latency2_s
        assert p.extrapolation == single.extrapolation


def test_batch_is_permutation_equivariant(tiny_twin, configs):
    fwd = predict_batch(tiny_twin, configs)
    rev = predict_batch(tiny_twin, list(reversed(configs)))
    for a, b in zip(fwd, reversed(rev)):
        assert a.latency1_s == b.latency1_s
        assert a.latency2_s == b.latency2_s


def test_extrapolation_flag(tiny_twin):
    inside = tiny_twin.scaler.lo  # training hull corner is not extrapolation
    p_in = predict(tiny_twin, NetworkConfig(
        PathConfig(inside[0], int(inside[1])), PathConfig(inside[2], int(inside[3]))))
    assert not p_in.extrapolation
    with pytest.warns(UserWarning):
        outside = NetworkConfig(PathConfig(200.0, 300), PathConfig(50.0, 100))
    assert predict(tiny_twin, outside).extrapolation


def test_predictions_are_positive_latencies(tiny_twin, configs):
    for p in predict_batch(tiny_twin, configs):
        assert p.latency1_s > 0
        assert p.latency2_s > 0
        assert p.per_query_time_s >= 0


def test_empty_batch_rejected(tiny_twin):
    with pytest.raises(DatasetError):
        predict_batch(tiny_twin, [])


def test_config_csv_round_trip(tmp_path, tiny_twin, configs):
    preds = predict_batch(tiny_twin, configs)
    out = tmp_path / "preds.csv"
    write_predictions_csv(preds, out)
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(PREDICTION_HEADER)
    assert len(lines) == len(configs) + 1
    assert all(line.endswith(("true", "false")) for line in lines[1:])

    # the config columns round-trip through the prediction file
    back = read_configs_csv(out)
    assert [c.as_features() for c in back] == [c.as_features() for c in configs]


def test_read_configs_rejects_bad_input(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("bandwidth,queue\n25,50\n")
    with pytest.raises(DatasetError):
        read_configs_csv(p)
    p.write_text("bw1_mbps,q1_pkts,bw2_mbps,q2_pkts\n25.0,50\n")
    with pytest.raises(DatasetError, match="row 2"):
        read_configs_csv(p)
