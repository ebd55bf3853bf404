"""Evaluation metrics and trace collectors: queue occupancy, goodput,
Jain fairness, flow completion slowdown, and their CSV forms."""

import bisect
import csv
import math
from dataclasses import dataclass

from .packet import HIGH
from .units import SEC, ticks_to_ns


@dataclass
class FlowRecord:
    flow_id: int
    size: int
    start: int          # ticks
    finish: int         # ticks; completed flows only
    timeouts: int = 0


def jain_index(rates):
    """(sum x)^2 / (n * sum x^2); None when every rate is zero."""
    total = 0.0
    sq = 0.0
    n = 0
    for x in rates:
        if x < 0:
            raise ValueError("negative rate")
        total += x
        sq += x * x
        n += 1
    if n == 0 or sq == 0.0:
        return None
    return (total * total) / (n * sq)


def percentile(samples, p):
    """Nearest-rank percentile: sorted sample at rank ceil(p/100 * n)."""
    data = sorted(samples)
    if not data:
        raise ValueError("empty sample set")
    if not 0 <= p <= 100:
        raise ValueError("p outside [0,100]")
    rank = math.ceil(p / 100.0 * len(data))
    return data[max(rank, 1) - 1]


def ideal_fct_s(size_bytes, base_rtt_ticks, bottleneck_bps) -> float:
    return base_rtt_ticks / SEC + size_bytes * 8.0 / bottleneck_bps


def slowdown(record: FlowRecord, base_rtt_ticks, bottleneck_bps) -> float:
    """Measured FCT over the zero-load FCT of the same path."""
    if record.finish is None or record.finish <= record.start:
        raise ValueError(f"flow {record.flow_id} not completed")
    fct_s = (record.finish - record.start) / SEC
    return fct_s / ideal_fct_s(record.size, base_rtt_ticks, bottleneck_bps)


class GoodputMeter:
    """Bytes binned into fixed windows, reported as bits/s per window."""

    __slots__ = ("window", "bins")

    def __init__(self, window_ticks):
        self.window = int(window_ticks)
        self.bins = {}

    def add(self, t_ticks, nbytes):
        self.bins[t_ticks // self.window] = \
            self.bins.get(t_ticks // self.window, 0) + nbytes

    def series(self):
        """List of (window_end_ticks, bits_per_s), gaps filled with 0."""
        if not self.bins:
            return []
        scale = 8.0 * SEC / self.window
        hi = max(self.bins)
        return [((i + 1) * self.window, self.bins.get(i, 0) * scale)
                for i in range(hi + 1)]


class FlowProgressSampler:
    """Periodic snapshot of every sender's acked-byte watermark.

    Rates over any trailing window come out exact because snd_una is
    monotone; jain_series restricts each window to flows that were
    active (started, unfinished) somewhere inside it.
    """

    def __init__(self, eng, senders, interval_ticks):
        self.eng = eng
        self.senders = list(senders)
        self.interval = int(interval_ticks)
        self.t = []
        self.una = []      # row per sample, column per sender

    def start(self):
        self.eng.schedule_after(0, self._tick, None)

    def _tick(self, _):
        self.t.append(self.eng.now)
        self.una.append([s.snd_una for s in self.senders])
        self.eng.schedule_after(self.interval, self._tick, None)

    def _active_in(self, si, t0, t1):
        s = self.senders[si]
        if s.start_ts is None or s.start_ts > t1:
            return False
        if s.finish_ts is not None and s.finish_ts < t0:
            return False
        return True

    def jain_series(self, window_ticks):
        """(t, jain) per sample, rates measured over the trailing window."""
        steps = max(1, int(round(window_ticks / self.interval)))
        out = []
        for i in range(steps, len(self.t)):
            t0, t1 = self.t[i - steps], self.t[i]
            rates = [self.una[i][k] - self.una[i - steps][k]
                     for k in range(len(self.senders))
                     if self._active_in(k, t0, t1)]
            j = jain_index(rates)
            if j is not None:
                out.append((t1, j))
        return out

    def jain_between(self, t0, t1):
        """Jain index of per-flow byte deltas over (t0, t1].

        Flows whose lifetime misses the window entirely are excluded, so a
        flow that departs at t0 or earlier does not drag the index down
        with a zero rate. None when no flow was active.
        """
        i0 = bisect.bisect_right(self.t, t0) - 1
        i1 = bisect.bisect_right(self.t, t1) - 1
        if i0 < 0 or i1 <= i0:
            return None
        rates = [self.una[i1][k] - self.una[i0][k]
                 for k in range(len(self.senders))
                 if self._active_in(k, self.t[i0], self.t[i1])]
        return jain_index(rates)

    def goodput_series(self, si, window_ticks):
        steps = max(1, int(round(window_ticks / self.interval)))
        span_s = (steps * self.interval) / SEC
        return [(self.t[i], 8.0 * (self.una[i][si] - self.una[i - steps][si]) / span_s)
                for i in range(steps, len(self.t))]


class PortAccumulatorSampler:
    """Snapshots of one port's exact integrals and counters.

    Differences between two snapshots give the exact time-mean occupancy
    or byte rate over that window, with no sampling error.
    """

    def __init__(self, eng, port, interval_ticks):
        self.eng = eng
        self.port = port
        self.interval = int(interval_ticks)
        self.rows = []   # (t, acc_hpq, acc_lpq_bytes, data_bytes, scout_bytes,
                         #  drop_high, drop_low)

    def start(self):
        self.eng.schedule_after(0, self._tick, None)

    def _tick(self, _):
        p = self.port
        now = self.eng.now
        p._integrate(now)
        self.rows.append((now, p.acc_hpq, p.acc_lpq_bytes, p.data_bytes_tx,
                          p.scout_bytes_tx, p.drop_high, p.drop_low))
        self.eng.schedule_after(self.interval, self._tick, None)

    def _bracket(self, t0, t1):
        lo = hi = None
        for i, row in enumerate(self.rows):
            if row[0] <= t0:
                lo = i
            if row[0] <= t1:
                hi = i
        if lo is None or hi is None or hi <= lo:
            raise ValueError("window outside sampled range")
        return self.rows[lo], self.rows[hi]

    def mean_hpq_pkts(self, t0, t1) -> float:
        a, b = self._bracket(t0, t1)
        return (b[1] - a[1]) / (b[0] - a[0])

    def mean_lpq_bytes(self, t0, t1) -> float:
        a, b = self._bracket(t0, t1)
        return (b[2] - a[2]) / (b[0] - a[0])

    def data_rate_bps(self, t0, t1) -> float:
        a, b = self._bracket(t0, t1)
        return (b[3] - a[3]) * 8.0 * SEC / (b[0] - a[0])


class QueueSampler:
    """Periodic occupancy snapshots for a set of ports. Exact time-mean
    occupancies come from the port accumulators; this is the trace."""

    def __init__(self, eng, ports, interval_ticks):
        self.eng = eng
        self.ports = list(ports)
        self.interval = int(interval_ticks)
        self.rows = []     # (t, port_name, hpq_pkts, lpq_bytes)

    def start(self):
        self.eng.schedule_after(0, self._tick, None)

    def _tick(self, _):
        now = self.eng.now
        for p in self.ports:
            self.rows.append((now, p.name, p.resident(), p.lpq_bytes))
        self.eng.schedule_after(self.interval, self._tick, None)


def write_queue_csv(rows, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t_ns", "port", "qlen_pkts", "qlen_lpq_bytes"])
        for t, port, hp, lpb in rows:
            out.writerow([ticks_to_ns(t), port, hp, lpb])


def write_goodput_csv(series_by_entity, path):
    """series_by_entity: {name: [(t_ticks, bits_per_s), ...]}"""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t_ns", "entity", "bits_per_s"])
        for name, series in series_by_entity.items():
            for t, bps in series:
                out.writerow([ticks_to_ns(t), name, repr(float(bps))])


def write_fairness_csv(series, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t_ns", "jain"])
        for t, j in series:
            out.writerow([ticks_to_ns(t), repr(float(j))])


def write_flows_csv(records, slowdowns, path):
    """records and slowdowns aligned; unfinished flows get blank fields."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["flow_id", "size", "start_ns", "finish_ns",
                      "slowdown", "timeouts"])
        for rec, sd in zip(records, slowdowns):
            fin = ticks_to_ns(rec.finish) if rec.finish is not None else ""
            out.writerow([rec.flow_id, rec.size, ticks_to_ns(rec.start),
                          fin, "" if sd is None else repr(float(sd)),
                          rec.timeouts])


def write_drops_csv(drop_log, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t_ns", "port", "priority"])
        for t, port, prio in drop_log:
            out.writerow([ticks_to_ns(t), port,
                          "high" if prio == HIGH else "low"])


def write_flow_events_csv(flow_log, path):
    """Transport event trace: ack/scout_ack/decrease/loss/timeout rows.

    The last column holds the delay that drove the event (d_s on
    decreases, probe RTT on scout acks), blank elsewhere."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t_ns", "flow_id", "event", "w_bytes", "alpha",
                      "d_s_ns"])
        for t, fid, ev, w, alpha, detail in flow_log:
            out.writerow([ticks_to_ns(t), fid, ev, repr(float(w)), alpha,
                          "" if detail is None else ticks_to_ns(detail)])


def write_scout_trace_csv(scout_log, path):
    """Probe events only (sent/acked/lost); rtt_ns is blank except on acks."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t_ns", "channel_id", "event", "rtt_ns"])
        for t, ch, ev, _sid, rtt in scout_log:
            out.writerow([ticks_to_ns(t), ch, ev,
                          "" if rtt is None else ticks_to_ns(rtt)])
