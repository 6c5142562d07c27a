import warnings

import pytest

from nettwin.errors import InvalidConfigError
from nettwin.simulator import (FlowSpec, NetworkConfig, PathConfig,
                               _simulate_reference, fluid_lower_bound_s,
                               simulate, simulate_path)


def test_single_packet_hand_trace():
    # one 1500 B packet at 25 Mbps: access serialization + propagation to the
    # queue + bottleneck serialization + propagation to the receiver
    flow = FlowSpec(file_bytes=1500, packet_bytes=1500)
    cfg = PathConfig(25.0, 50)
    t_access = 1500 * 8 / 1e9        # 12 us
    t_bn = 1500 * 8 / 25e6           # 480 us
    expected = t_access + 0.001 + t_bn + 0.001
    r = simulate_path(cfg, flow)
    assert r.latency_s == pytest.approx(expected, abs=1e-15)
    assert r.latency_s == pytest.approx(0.002492, abs=1e-12)
    assert r.packets_sent == 1
    assert r.packets_delivered == 1
    assert r.packets_dropped == 0


def test_fluid_lower_bound(small_flow):
    for bw in (25.0, 60.0, 125.0):
        r = simulate_path(PathConfig(bw, 100), small_flow)
        assert r.latency_s >= fluid_lower_bound_s(bw, small_flow.file_bytes)


def test_determinism_bit_identical(small_flow):
    cfg = PathConfig(45.0, 75)
    a = simulate_path(cfg, small_flow)
    b = simulate_path(cfg, small_flow)
    assert a == b


def test_engines_bit_identical(tiny_flow):
    for bw, q in [(25.0, 50), (47.5, 63), (80.0, 150), (124.0, 91)]:
        cfg = PathConfig(bw, q)
        fast = simulate_path(cfg, tiny_flow, engine="fast")
        ref = simulate_path(cfg, tiny_flow, engine="reference")
        assert fast == ref


def test_unknown_engine_rejected(tiny_flow):
    with pytest.raises(ValueError):
        simulate_path(PathConfig(50.0, 100), tiny_flow, engine="quantum")


def test_bandwidth_monotonicity(small_flow):
    for q in (50, 100, 150):
        lats = [simulate_path(PathConfig(bw, q), small_flow).latency_s
                for bw in (25.0, 50.0, 75.0, 100.0, 125.0)]
        assert lats == sorted(lats, reverse=True)


def test_packet_conservation(small_flow):
    for bw, q in [(25.0, 50), (75.0, 100), (125.0, 150)]:
        r = simulate_path(PathConfig(bw, q), small_flow)
        assert r.packets_sent == r.packets_delivered + r.packets_dropped
        assert r.packets_delivered >= small_flow.n_packets
        assert r.retransmissions <= r.packets_sent
        assert r.event_count > 0


def test_two_path_symmetry(small_flow):
    cfg = NetworkConfig(PathConfig(60.0, 80), PathConfig(60.0, 80))
    lat1, lat2 = simulate(cfg, small_flow)
    assert lat1 == lat2


def test_path_independence(small_flow):
    # changing path2 must not move path1's latency
    a = simulate(NetworkConfig(PathConfig(40.0, 90), PathConfig(25.0, 50)), small_flow)
    b = simulate(NetworkConfig(PathConfig(40.0, 90), PathConfig(125.0, 150)), small_flow)
    assert a[0] == b[0]


def test_invalid_configs_rejected():
    with pytest.raises(InvalidConfigError):
        PathConfig(0.0, 50)
    with pytest.raises(InvalidConfigError):
        PathConfig(-5.0, 50)
    with pytest.raises(InvalidConfigError):
        PathConfig(50.0, 0)
    with pytest.raises(InvalidConfigError):
        FlowSpec(file_bytes=100, packet_bytes=1500)
    with pytest.raises(InvalidConfigError):
        # bottleneck faster than the access link makes the model meaningless
        simulate_path(PathConfig(50.0, 100), FlowSpec(access_mbps=25.0))


def test_out_of_sweep_bandwidth_warns():
    with pytest.warns(UserWarning, match="outside the default sweep range"):
        PathConfig(10.0, 50)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        PathConfig(25.0, 50)  # boundary value is in range, no warning


def test_event_cap_status():
    # the raw loop reports status 1 when the event budget is exhausted
    finish, *_, status = _simulate_reference(100, 1.2e-5, 4.8e-4, 1e-3, 50, 5)
    assert status == 1
    assert finish < 0


def test_n_packets_rounds_up():
    assert FlowSpec(file_bytes=1501, packet_bytes=1500).n_packets == 2
    assert FlowSpec(file_bytes=3000, packet_bytes=1500).n_packets == 2
    assert FlowSpec(file_bytes=100_000_000, packet_bytes=1500).n_packets == 66667
