"""Deterministic discrete-event simulator of one bottleneck path.

Topology per path: sender -> access link -> drop-tail FIFO queue ->
bottleneck link -> receiver.  The transport is a simplified Reno-style
AIMD sender (slow start, congestion avoidance, triple-dup-ACK fast
retransmit with NewReno partial-ACK recovery, fixed 200 ms RTO).  The
two paths of the diamond topology are disjoint, so a network simulation
is just two independent path simulations.

Two engines produce bit-identical results: a pure-Python reference
(`engine="reference"`) and a numba-compiled port of the same loop
(`engine="fast"`, the default).
"""

from __future__ import annotations

import heapq
import warnings
from dataclasses import dataclass, asdict

from .errors import InvalidConfigError, SimulationStuckError

# transport constants (fixed so datasets stay comparable across runs)
INIT_CWND = 10.0
INIT_SSTHRESH = 64.0
RTO_S = 0.2
DUPACK_THRESHOLD = 3
EVENT_CAP_MULT = 100

# paper-default sweep range; values outside are accepted but flagged
SWEEP_BW_MIN = 25.0
SWEEP_BW_MAX = 125.0

# event kinds; ties at equal timestamps resolve by (kind, push order)
_EV_QUEUE = 0    # packet arrives at the drop-tail queue
_EV_BN_DONE = 1  # bottleneck finished serializing the head packet
_EV_ACK = 2      # cumulative ACK arrives back at the sender
_EV_TIMEOUT = 3


@dataclass(frozen=True)
class PathConfig:
    bandwidth_mbps: float
    queue_pkts: int

    def __post_init__(self):
        if self.bandwidth_mbps <= 0:
            raise InvalidConfigError(f"bandwidth must be positive, got {self.bandwidth_mbps}")
        if self.queue_pkts < 1:
            raise InvalidConfigError(f"queue size must be >= 1 packet, got {self.queue_pkts}")
        if not (SWEEP_BW_MIN <= self.bandwidth_mbps <= SWEEP_BW_MAX):
            warnings.warn(
                f"bandwidth {self.bandwidth_mbps} Mbps is outside the default "
                f"sweep range [{SWEEP_BW_MIN}, {SWEEP_BW_MAX}]",
                stacklevel=2,
            )


@dataclass(frozen=True)
class NetworkConfig:
    path1: PathConfig
    path2: PathConfig

    def as_features(self) -> tuple[float, float, float, float]:
        return (
            self.path1.bandwidth_mbps,
            float(self.path1.queue_pkts),
            self.path2.bandwidth_mbps,
            float(self.path2.queue_pkts),
        )


@dataclass(frozen=True)
class FlowSpec:
    file_bytes: int = 100_000_000
    packet_bytes: int = 1500
    access_mbps: float = 1000.0
    prop_delay_s: float = 0.001

    def __post_init__(self):
        if self.packet_bytes < 1 or self.file_bytes < self.packet_bytes:
            raise InvalidConfigError("need file_bytes >= packet_bytes >= 1")
        if self.access_mbps <= 0 or self.prop_delay_s < 0:
            raise InvalidConfigError("access rate must be positive, delay nonnegative")

    @property
    def n_packets(self) -> int:
        return -(-self.file_bytes // self.packet_bytes)


@dataclass(frozen=True)
class TransferResult:
    latency_s: float
    packets_sent: int
    packets_delivered: int
    packets_dropped: int
    retransmissions: int
    event_count: int

    def to_json(self) -> dict:
        return asdict(self)


def _simulate_reference(n_pkts: int, t_access: float, t_bn: float, prop: float,
                        q_cap: int, cap: int):
    """Pure-Python event loop; the numba engine mirrors this exactly."""
    ev = []  # (time, kind, eid, payload)
    eid = 0

    cwnd = INIT_CWND
    ssthresh = INIT_SSTHRESH
    last_ack = 0
    highest_sent = 0
    dupacks = 0
    in_recovery = False
    recovery_point = 0
    access_free = 0.0
    last_progress = 0.0  # single re-armed retransmission timer

    queue = []      # waiting packets as (seq, enq_id); head at index qhead
    qhead = 0
    bn_busy = False
    enq_counter = 0

    rcv_next = 1
    received = bytearray(n_pkts + 2)
    n_received = 0
    last_deliv_enq = -1

    sent = delivered = dropped = retx = 0
    events = 0
    finish = -1.0
    done = False

    def send_pkt(seq, now, is_retx):
        nonlocal access_free, eid, sent, retx, enq_counter
        sent += 1
        if is_retx:
            retx += 1
        start = now if now > access_free else access_free
        access_free = start + t_access
        eid += 1
        enq_counter += 1
        heapq.heappush(ev, (access_free + prop, _EV_QUEUE, eid, seq))

    def arm_timer(now):
        nonlocal eid
        eid += 1
        heapq.heappush(ev, (now + RTO_S, _EV_TIMEOUT, eid, 0))

    def try_send(now):
        nonlocal highest_sent
        w = int(cwnd)
        while highest_sent < n_pkts and (highest_sent - last_ack) < w:
            highest_sent += 1
            send_pkt(highest_sent, now, False)

    try_send(0.0)
    arm_timer(0.0)

    while ev:
        events += 1
        if events > cap:
            return finish, sent, delivered, dropped, retx, events, 1
        now, kind, enq, a = heapq.heappop(ev)

        if kind == _EV_QUEUE:
            if not bn_busy:
                bn_busy = True
                eid += 1
                heapq.heappush(ev, (now + t_bn, _EV_BN_DONE, enq, a))
            elif len(queue) - qhead >= q_cap:
                dropped += 1
            else:
                queue.append((a, enq))

        elif kind == _EV_BN_DONE:
            seq = a
            if enq < last_deliv_enq:
                return finish, sent, delivered, dropped, retx, events, 2
            last_deliv_enq = enq
            delivered += 1
            if not received[seq]:
                received[seq] = 1
                n_received += 1
                while received[rcv_next]:
                    rcv_next += 1
                if n_received == n_pkts and finish < 0:
                    finish = now + prop
                    done = True
            if not done:
                eid += 1
                heapq.heappush(ev, (now + prop + 2 * prop, _EV_ACK, eid, rcv_next - 1))
            if len(queue) > qhead:
                nseq, nenq = queue[qhead]
                qhead += 1
                if qhead > 4096:
                    del queue[:qhead]
                    qhead = 0
                eid += 1
                heapq.heappush(ev, (now + t_bn, _EV_BN_DONE, nenq, nseq))
            else:
                bn_busy = False

        elif kind == _EV_ACK:
            if done:
                continue
            ackno = a
            if ackno > last_ack:
                last_ack = ackno
                dupacks = 0
                last_progress = now
                if in_recovery:
                    if ackno >= recovery_point:
                        in_recovery = False
                        cwnd = ssthresh
                    else:
                        send_pkt(ackno + 1, now, True)
                else:
                    if cwnd < ssthresh:
                        cwnd += 1.0
                    else:
                        cwnd += 1.0 / cwnd
                try_send(now)
            else:
                dupacks += 1
                if dupacks == DUPACK_THRESHOLD and not in_recovery:
                    half = cwnd / 2.0
                    ssthresh = half if half > 2.0 else 2.0
                    cwnd = ssthresh
                    in_recovery = True
                    recovery_point = highest_sent
                    send_pkt(last_ack + 1, now, True)
                    last_progress = now

        else:  # _EV_TIMEOUT
            if done:
                continue
            if last_progress + RTO_S > now:
                arm_timer(last_progress)  # progress since arming: push deadline out
                continue
            half = cwnd / 2.0
            ssthresh = half if half > 2.0 else 2.0
            cwnd = 1.0
            dupacks = 0
            in_recovery = False
            send_pkt(last_ack + 1, now, True)
            last_progress = now
            arm_timer(now)
            try_send(now)

    status = 0 if finish >= 0 else 3
    return finish, sent, delivered, dropped, retx, events, status


def _run_engine(engine: str, n_pkts: int, t_access: float, t_bn: float,
                prop: float, q_cap: int, cap: int):
    if engine == "fast":
        from . import _fastsim
        return _fastsim.run(n_pkts, t_access, t_bn, prop, q_cap, cap)
    if engine == "reference":
        return _simulate_reference(n_pkts, t_access, t_bn, prop, q_cap, cap)
    raise ValueError(f"unknown engine {engine!r}")


def simulate_path(cfg: PathConfig, flow: FlowSpec = FlowSpec(),
                  engine: str = "fast") -> TransferResult:
    """Flow-completion latency of transferring ``flow.file_bytes`` through one path.

    Completion is the arrival time of the final data packet at the receiver.
    Deterministic: identical inputs give bit-identical results.
    """
    if cfg.bandwidth_mbps >= flow.access_mbps:
        raise InvalidConfigError(
            f"bottleneck bandwidth {cfg.bandwidth_mbps} Mbps must stay below the "
            f"access rate {flow.access_mbps} Mbps"
        )
    n_pkts = flow.n_packets
    pkt_bits = flow.packet_bytes * 8
    t_access = pkt_bits / (flow.access_mbps * 1e6)
    t_bn = pkt_bits / (cfg.bandwidth_mbps * 1e6)
    cap = EVENT_CAP_MULT * n_pkts + 1000

    finish, sent, delivered, dropped, retx, events, status = _run_engine(
        engine, n_pkts, t_access, t_bn, flow.prop_delay_s, cfg.queue_pkts, cap)

    if status == 1:
        raise SimulationStuckError(
            f"event cap {cap} exceeded for bw={cfg.bandwidth_mbps} q={cfg.queue_pkts}")
    if status == 2:
        raise AssertionError("FIFO ordering violated inside the drop-tail queue")
    if status != 0:
        raise SimulationStuckError("simulation drained its event list without completing")

    return TransferResult(
        latency_s=finish,
        packets_sent=sent,
        packets_delivered=delivered,
        packets_dropped=dropped,
        retransmissions=retx,
        event_count=events,
    )


def simulate(cfg: NetworkConfig, flow: FlowSpec = FlowSpec(),
             engine: str = "fast") -> tuple[float, float]:
    """Per-path latencies for a two-path configuration (paths are independent)."""
    r1 = simulate_path(cfg.path1, flow, engine=engine)
    r2 = simulate_path(cfg.path2, flow, engine=engine)
    return r1.latency_s, r2.latency_s


def fluid_lower_bound_s(bandwidth_mbps: float, file_bytes: int) -> float:
    """Serialization-only bound: no transfer can beat the bottleneck capacity."""
    return 8.0 * file_bytes / (bandwidth_mbps * 1e6)
