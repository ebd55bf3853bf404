"""Strict-priority dual-queue egress port.

Each directed link is modeled as the sending side's egress port: a
high-priority FIFO bounded in packets (data and ACKs) and a low-priority
FIFO bounded in bytes (probes and their echoes). The low queue is served
only when the high queue is empty, transmission is non-preemptive, and
both queues tail-drop. ECN marks are applied on enqueue against the
instantaneous high-queue occupancy when a marking threshold is set.

Occupancy bookkeeping is exact: qlen * dt accumulators are updated on
every transition, so time-averaged queue lengths come from integrals,
not samples.

This is the simulator's hot path (it runs once per packet per hop), so
it is built around a minimal event scheme: a packet reaching an idle
port is served at once and costs a single calendar entry, its arrival
at the next element scheduled directly at start + wire_time + prop.
Service of queued packets is driven by a "pick" event that fires when
the transmitter frees up (busy_until); at most one pick is outstanding
per port. Queue caps below one packet are rejected at config
validation, which the idle fast path relies on.
"""

from collections import deque
from heapq import heappush

from .packet import DATA, HIGH, LOW, SCOUT

# size_bytes * _B2T // rate_bps: exact integer wire time in ticks
_B2T = 8_000_000_000_000


class PriorityPort:
    __slots__ = (
        "name", "eng", "net", "rate_bps", "prop", "hpq", "lpq", "hpq_n",
        "hpq_cap", "lpq_cap_bytes", "lpq_bytes", "busy_until", "pick_pending",
        "ecn_threshold",
        "enq_count", "deq_count", "drop_high", "drop_low",
        "data_bytes_tx", "scout_bytes_tx", "other_bytes_tx",
        "acc_hpq", "acc_lpq_bytes", "_last_change", "hpq_max",
        "wait_acc_high", "wait_n_high", "wait_acc_low", "wait_n_low",
    )

    def __init__(self, name, eng, net, rate_bps, prop_ticks,
                 hpq_cap_pkts=250, lpq_cap_bytes=640, ecn_threshold=None):
        self.name = name
        self.eng = eng
        self.net = net
        self.rate_bps = int(rate_bps)
        self.prop = prop_ticks
        self.hpq = deque()
        self.lpq = deque()
        self.hpq_n = 0
        self.hpq_cap = hpq_cap_pkts
        self.lpq_cap_bytes = lpq_cap_bytes
        self.lpq_bytes = 0
        self.busy_until = 0
        self.pick_pending = False
        self.ecn_threshold = ecn_threshold
        self.enq_count = 0
        self.deq_count = 0
        self.drop_high = 0
        self.drop_low = 0
        self.data_bytes_tx = 0
        self.scout_bytes_tx = 0
        self.other_bytes_tx = 0
        self.acc_hpq = 0
        self.acc_lpq_bytes = 0
        self._last_change = 0
        self.hpq_max = 0
        self.wait_acc_high = 0
        self.wait_n_high = 0
        self.wait_acc_low = 0
        self.wait_n_low = 0

    def _integrate(self, now):
        dt = now - self._last_change
        if dt:
            self.acc_hpq += self.hpq_n * dt
            self.acc_lpq_bytes += self.lpq_bytes * dt
            self._last_change = now

    def enqueue(self, pkt) -> bool:
        eng = self.eng
        now = eng.now
        if now >= self.busy_until and not self.hpq_n and not self.lpq:
            # idle transmitter, nothing waiting: serve immediately. The
            # occupancy integrals gain zero over the idle gap and the
            # deques never see the packet.
            if pkt.priority == HIGH:
                if now != self._last_change:
                    self._last_change = now
                if self.hpq_max == 0:
                    self.hpq_max = 1
                th = self.ecn_threshold
                if th is not None and th <= 1:
                    pkt.ecn = True
                self.wait_n_high += 1
            else:
                if pkt.size > self.lpq_cap_bytes:
                    self.drop_low += 1
                    self.net.record_drop(now, self.name, LOW)
                    return False
                if now != self._last_change:
                    self._last_change = now
                self.wait_n_low += 1
            self.enq_count += 1
            self.deq_count += 1
            k = pkt.kind
            if k == DATA:
                self.data_bytes_tx += pkt.size
            elif k == SCOUT:
                self.scout_bytes_tx += pkt.size
            else:
                self.other_bytes_tx += pkt.size
            self.busy_until = t = now + pkt.size * _B2T // self.rate_bps
            eng._seq = s = eng._seq + 1
            heappush(eng._heap, (t + self.prop, s, self.net.arrive, pkt))
            return True
        if pkt.priority == HIGH:
            n = self.hpq_n
            if n >= self.hpq_cap:
                self.drop_high += 1
                self.net.record_drop(now, self.name, HIGH)
                return False
            dt = now - self._last_change
            if dt:
                self.acc_hpq += n * dt
                self.acc_lpq_bytes += self.lpq_bytes * dt
                self._last_change = now
            self.hpq.append(pkt)
            self.hpq_n = n = n + 1
            if n > self.hpq_max:
                self.hpq_max = n
            th = self.ecn_threshold
            if th is not None and n >= th:
                pkt.ecn = True
        else:
            lb = self.lpq_bytes
            if lb + pkt.size > self.lpq_cap_bytes:
                self.drop_low += 1
                self.net.record_drop(now, self.name, LOW)
                return False
            dt = now - self._last_change
            if dt:
                self.acc_hpq += self.hpq_n * dt
                self.acc_lpq_bytes += lb * dt
                self._last_change = now
            self.lpq.append(pkt)
            self.lpq_bytes = lb + pkt.size
        self.enq_count += 1
        pkt._q_ts = now
        if not self.pick_pending:
            self.pick_pending = True
            eng._seq = s = eng._seq + 1
            heappush(eng._heap, (self.busy_until, s, self._pick, None))
        return True

    def _pick(self, _):
        # transmitter just freed up and at least one packet is waiting
        # (queued packets only ever leave through here)
        self.pick_pending = False
        eng = self.eng
        now = eng.now
        n = self.hpq_n
        if n:
            dt = now - self._last_change
            if dt:
                self.acc_hpq += n * dt
                self.acc_lpq_bytes += self.lpq_bytes * dt
                self._last_change = now
            pkt = self.hpq.popleft()
            self.hpq_n = n - 1
            self.wait_acc_high += now - pkt._q_ts
            self.wait_n_high += 1
        else:
            dt = now - self._last_change
            if dt:
                self.acc_lpq_bytes += self.lpq_bytes * dt
                self._last_change = now
            pkt = self.lpq.popleft()
            self.lpq_bytes -= pkt.size
            self.wait_acc_low += now - pkt._q_ts
            self.wait_n_low += 1
        self.deq_count += 1
        k = pkt.kind
        if k == DATA:
            self.data_bytes_tx += pkt.size
        elif k == SCOUT:
            self.scout_bytes_tx += pkt.size
        else:
            self.other_bytes_tx += pkt.size
        self.busy_until = t = now + pkt.size * _B2T // self.rate_bps
        eng._seq = s = eng._seq + 1
        heappush(eng._heap, (t + self.prop, s, self.net.arrive, pkt))
        if self.hpq_n or self.lpq:
            self.pick_pending = True
            eng._seq = s = eng._seq + 1
            heappush(eng._heap, (t, s, self._pick, None))

    # observability -----------------------------------------------------

    def mean_hpq_pkts(self, t_end=None) -> float:
        t = self.eng.now if t_end is None else t_end
        self._integrate(t)
        return self.acc_hpq / t if t else 0.0

    def mean_lpq_bytes(self, t_end=None) -> float:
        t = self.eng.now if t_end is None else t_end
        self._integrate(t)
        return self.acc_lpq_bytes / t if t else 0.0

    def mean_wait_ticks(self, priority) -> float:
        if priority == HIGH:
            return self.wait_acc_high / self.wait_n_high if self.wait_n_high else 0.0
        return self.wait_acc_low / self.wait_n_low if self.wait_n_low else 0.0

    def resident(self) -> int:
        busy = 1 if self.eng.now < self.busy_until else 0
        return self.hpq_n + len(self.lpq) + busy
