"""Numba port of the reference event loop in :mod:`nettwin.simulator`.

Same state machine, same floating-point expressions, same tie-breaking,
so results are bit-identical to the reference engine (asserted in tests).
"""

import numpy as np
from numba import njit

_EV_QUEUE = 0
_EV_BN_DONE = 1
_EV_ACK = 2
_EV_TIMEOUT = 3

_HEAP_CAP = 1 << 18

_INIT_CWND = 10.0
_INIT_SSTHRESH = 64.0
_RTO_S = 0.2
_DUPACK_THRESHOLD = 3


@njit(cache=True)
def _less(ht, hk, hi, a, b):
    if ht[a] != ht[b]:
        return ht[a] < ht[b]
    if hk[a] != hk[b]:
        return hk[a] < hk[b]
    return hi[a] < hi[b]


@njit(cache=True)
def _swap(ht, hk, hi, hp, a, b):
    ht[a], ht[b] = ht[b], ht[a]
    hk[a], hk[b] = hk[b], hk[a]
    hi[a], hi[b] = hi[b], hi[a]
    hp[a], hp[b] = hp[b], hp[a]


@njit(cache=True)
def _heap_push(ht, hk, hi, hp, size, t, kind, tid, pay):
    i = size
    ht[i] = t
    hk[i] = kind
    hi[i] = tid
    hp[i] = pay
    while i > 0:
        parent = (i - 1) >> 1
        if _less(ht, hk, hi, i, parent):
            _swap(ht, hk, hi, hp, i, parent)
            i = parent
        else:
            break
    return size + 1


@njit(cache=True)
def _heap_pop(ht, hk, hi, hp, size):
    size -= 1
    _swap(ht, hk, hi, hp, 0, size)
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        smallest = i
        if l < size and _less(ht, hk, hi, l, smallest):
            smallest = l
        if r < size and _less(ht, hk, hi, r, smallest):
            smallest = r
        if smallest == i:
            break
        _swap(ht, hk, hi, hp, i, smallest)
        i = smallest
    return size


@njit(cache=True)
def _run(n_pkts, t_access, t_bn, prop, q_cap, cap):
    ht = np.empty(_HEAP_CAP, dtype=np.float64)
    hk = np.empty(_HEAP_CAP, dtype=np.int64)
    hi = np.empty(_HEAP_CAP, dtype=np.int64)
    hp = np.empty(_HEAP_CAP, dtype=np.int64)
    hsize = 0
    eid = 0

    cwnd = _INIT_CWND
    ssthresh = _INIT_SSTHRESH
    last_ack = 0
    highest_sent = 0
    dupacks = 0
    in_recovery = False
    recovery_point = 0
    access_free = 0.0
    last_progress = 0.0

    q_seq = np.empty(q_cap, dtype=np.int64)
    q_enq = np.empty(q_cap, dtype=np.int64)
    q_head = 0
    q_len = 0
    bn_busy = False

    rcv_next = 1
    received = np.zeros(n_pkts + 2, dtype=np.uint8)
    n_received = 0
    last_deliv_enq = -1

    sent = 0
    delivered = 0
    dropped = 0
    retx = 0
    events = 0
    finish = -1.0
    done = False

    # initial window
    w = int(cwnd)
    while highest_sent < n_pkts and (highest_sent - last_ack) < w:
        highest_sent += 1
        sent += 1
        start = 0.0 if 0.0 > access_free else access_free
        access_free = start + t_access
        eid += 1
        if hsize >= _HEAP_CAP - 1:
            return finish, sent, delivered, dropped, retx, events, 4
        hsize = _heap_push(ht, hk, hi, hp, hsize, access_free + prop, _EV_QUEUE, eid, highest_sent)
    eid += 1
    hsize = _heap_push(ht, hk, hi, hp, hsize, _RTO_S, _EV_TIMEOUT, eid, 0)

    while hsize > 0:
        events += 1
        if events > cap:
            return finish, sent, delivered, dropped, retx, events, 1
        if hsize >= _HEAP_CAP - 8:
            return finish, sent, delivered, dropped, retx, events, 4
        now = ht[0]
        kind = hk[0]
        enq = hi[0]
        a = hp[0]
        hsize = _heap_pop(ht, hk, hi, hp, hsize)

        if kind == _EV_QUEUE:
            if not bn_busy:
                bn_busy = True
                eid += 1
                hsize = _heap_push(ht, hk, hi, hp, hsize, now + t_bn, _EV_BN_DONE, enq, a)
            elif q_len >= q_cap:
                dropped += 1
            else:
                slot = q_head + q_len
                if slot >= q_cap:
                    slot -= q_cap
                q_seq[slot] = a
                q_enq[slot] = enq
                q_len += 1

        elif kind == _EV_BN_DONE:
            seq = a
            if enq < last_deliv_enq:
                return finish, sent, delivered, dropped, retx, events, 2
            last_deliv_enq = enq
            delivered += 1
            if received[seq] == 0:
                received[seq] = 1
                n_received += 1
                while received[rcv_next] != 0:
                    rcv_next += 1
                if n_received == n_pkts and finish < 0.0:
                    finish = now + prop
                    done = True
            if not done:
                eid += 1
                hsize = _heap_push(ht, hk, hi, hp, hsize, now + prop + 2 * prop, _EV_ACK, eid, rcv_next - 1)
            if q_len > 0:
                nseq = q_seq[q_head]
                nenq = q_enq[q_head]
                q_head += 1
                if q_head >= q_cap:
                    q_head = 0
                q_len -= 1
                eid += 1
                hsize = _heap_push(ht, hk, hi, hp, hsize, now + t_bn, _EV_BN_DONE, nenq, nseq)
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
                        sent += 1
                        retx += 1
                        start = now if now > access_free else access_free
                        access_free = start + t_access
                        eid += 1
                        hsize = _heap_push(ht, hk, hi, hp, hsize, access_free + prop, _EV_QUEUE, eid, ackno + 1)
                else:
                    if cwnd < ssthresh:
                        cwnd += 1.0
                    else:
                        cwnd += 1.0 / cwnd
                w = int(cwnd)
                while highest_sent < n_pkts and (highest_sent - last_ack) < w:
                    highest_sent += 1
                    sent += 1
                    start = now if now > access_free else access_free
                    access_free = start + t_access
                    eid += 1
                    if hsize >= _HEAP_CAP - 1:
                        return finish, sent, delivered, dropped, retx, events, 4
                    hsize = _heap_push(ht, hk, hi, hp, hsize, access_free + prop, _EV_QUEUE, eid, highest_sent)
            else:
                dupacks += 1
                if dupacks == _DUPACK_THRESHOLD and not in_recovery:
                    half = cwnd / 2.0
                    ssthresh = half if half > 2.0 else 2.0
                    cwnd = ssthresh
                    in_recovery = True
                    recovery_point = highest_sent
                    sent += 1
                    retx += 1
                    start = now if now > access_free else access_free
                    access_free = start + t_access
                    eid += 1
                    hsize = _heap_push(ht, hk, hi, hp, hsize, access_free + prop, _EV_QUEUE, eid, last_ack + 1)
                    last_progress = now

        else:  # _EV_TIMEOUT
            if done:
                continue
            if last_progress + _RTO_S > now:
                eid += 1
                hsize = _heap_push(ht, hk, hi, hp, hsize, last_progress + _RTO_S, _EV_TIMEOUT, eid, 0)
                continue
            half = cwnd / 2.0
            ssthresh = half if half > 2.0 else 2.0
            cwnd = 1.0
            dupacks = 0
            in_recovery = False
            sent += 1
            retx += 1
            start = now if now > access_free else access_free
            access_free = start + t_access
            eid += 1
            hsize = _heap_push(ht, hk, hi, hp, hsize, access_free + prop, _EV_QUEUE, eid, last_ack + 1)
            last_progress = now
            eid += 1
            hsize = _heap_push(ht, hk, hi, hp, hsize, now + _RTO_S, _EV_TIMEOUT, eid, 0)
            w = int(cwnd)
            while highest_sent < n_pkts and (highest_sent - last_ack) < w:
                highest_sent += 1
                sent += 1
                start = now if now > access_free else access_free
                access_free = start + t_access
                eid += 1
                if hsize >= _HEAP_CAP - 1:
                    return finish, sent, delivered, dropped, retx, events, 4
                hsize = _heap_push(ht, hk, hi, hp, hsize, access_free + prop, _EV_QUEUE, eid, highest_sent)

    status = 0 if finish >= 0.0 else 3
    return finish, sent, delivered, dropped, retx, events, status


def run(n_pkts, t_access, t_bn, prop, q_cap, cap):
    finish, sent, delivered, dropped, retx, events, status = _run(
        n_pkts, float(t_access), float(t_bn), float(prop), int(q_cap), int(cap))
    if status == 4:
        raise MemoryError("simulator event heap overflow")
    return finish, int(sent), int(delivered), int(dropped), int(retx), int(events), int(status)
