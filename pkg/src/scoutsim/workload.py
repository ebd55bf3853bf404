"""Traffic generation: empirical flow-size distributions with Poisson
arrivals, plus raw packet sources for cross-traffic experiments."""

import bisect
import random

from .packet import DATA, HIGH, Packet
from .units import SEC, serialization_ticks


class FlowSizeCdf:
    """Piecewise-linear flow-size CDF over (size_bytes, cum_prob) points.

    Sizes strictly increasing, probabilities nondecreasing and ending at
    exactly 1.0. A nonzero first probability is point mass at the
    smallest size.
    """

    def __init__(self, points):
        pts = [(int(s), float(p)) for s, p in points]
        if not pts:
            raise ValueError("empty CDF")
        last_s, last_p = None, 0.0
        for i, (s, p) in enumerate(pts):
            if s <= 0:
                raise ValueError(f"CDF point {i}: size {s} not positive")
            if last_s is not None and s <= last_s:
                raise ValueError(f"CDF point {i}: sizes must strictly increase")
            if p < last_p or not 0.0 <= p <= 1.0:
                raise ValueError(f"CDF point {i}: cum_prob {p} out of order")
            last_s, last_p = s, p
        if pts[-1][1] != 1.0:
            raise ValueError("CDF must end at cum_prob 1.0")
        self.points = pts
        self._sizes = [s for s, _ in pts]
        self._probs = [p for _, p in pts]

    @classmethod
    def load(cls, path):
        """Two-column text: size_bytes cum_prob, '#' comments allowed."""
        pts = []
        with open(path) as fh:
            for ln, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                cols = line.split()
                if len(cols) != 2:
                    raise ValueError(f"{path}:{ln}: expected 2 columns")
                try:
                    pts.append((float(cols[0]), float(cols[1])))
                except ValueError:
                    raise ValueError(f"{path}:{ln}: non-numeric field") from None
        return cls(pts)

    def sample(self, u: float) -> int:
        if not 0.0 <= u < 1.0 and u != 1.0:
            raise ValueError("u outside [0,1]")
        probs, sizes = self._probs, self._sizes
        if u <= probs[0]:
            return sizes[0]
        i = bisect.bisect_left(probs, u)
        if i >= len(probs):
            return sizes[-1]
        p0, p1 = probs[i - 1], probs[i]
        s0, s1 = sizes[i - 1], sizes[i]
        if p1 == p0:
            return s1
        return int(round(s0 + (s1 - s0) * (u - p0) / (p1 - p0)))

    def mean(self) -> float:
        """Analytic mean of the interpolated distribution."""
        total = self._probs[0] * self._sizes[0]
        for i in range(1, len(self.points)):
            seg = self._probs[i] - self._probs[i - 1]
            total += seg * (self._sizes[i] + self._sizes[i - 1]) / 2.0
        return total


def sample_flow_size(cdf: FlowSizeCdf, u: float) -> int:
    return cdf.sample(u)


def arrival_rate(load_fraction, capacity_bps, mean_flow_size_bytes) -> float:
    """Flows per second that offer the given load fraction."""
    return load_fraction * capacity_bps / (8.0 * mean_flow_size_bytes)


def poisson_arrivals(load_fraction, capacity_bps, mean_flow_size_bytes,
                     seed, horizon_s=None):
    """Yield absolute arrival times in seconds, exponential gaps at
    rate load_fraction*C/(8*mean_size). Infinite unless horizon_s given."""
    if not 0.0 < load_fraction < 1.0:
        raise ValueError("load_fraction must be in (0,1)")
    rng = random.Random(seed)
    lam = arrival_rate(load_fraction, capacity_bps, mean_flow_size_bytes)
    t = 0.0
    while True:
        t += rng.expovariate(lam)
        if horizon_s is not None and t >= horizon_s:
            return
        yield t


def generate_flows(cdf: FlowSizeCdf, hosts, load_fraction, capacity_bps,
                   seed, horizon_s):
    """All-to-all workload: list of (t_s, size_bytes, src, dst) with
    uniform src != dst pairs. One RNG drives gaps, sizes, and pairs so a
    seed pins the whole schedule."""
    rng = random.Random(seed)
    lam = arrival_rate(load_fraction, capacity_bps, cdf.mean())
    out = []
    t = 0.0
    n = len(hosts)
    while True:
        t += rng.expovariate(lam)
        if t >= horizon_s:
            return out
        size = cdf.sample(rng.random())
        si = rng.randrange(n)
        di = rng.randrange(n - 1)
        if di >= si:
            di += 1
        out.append((t, size, hosts[si], hosts[di]))


class Sink:
    """Receiver stand-in for raw packet sources: counts and discards."""

    __slots__ = ("rx_bytes", "rx_pkts")

    def __init__(self):
        self.rx_bytes = 0
        self.rx_pkts = 0

    def on_data(self, pkt):
        self.rx_bytes += pkt.size
        self.rx_pkts += 1


class PoissonPacketSource:
    """Open-loop cross traffic: fixed-size packets, exponential gaps
    sized to hit a target utilization of the given line rate."""

    __slots__ = ("net", "eng", "flow_id", "route", "pkt_bytes", "rng",
                 "_gap_mean_ticks", "active", "sent_pkts")

    def __init__(self, net, flow_id, route, utilization, rate_bps, seed,
                 pkt_bytes=1500):
        self.net = net
        self.eng = net.eng
        self.flow_id = flow_id
        self.route = route
        self.pkt_bytes = pkt_bytes
        self.rng = random.Random(seed)
        ser = serialization_ticks(pkt_bytes, rate_bps)
        self._gap_mean_ticks = ser / utilization
        self.active = False
        self.sent_pkts = 0

    def start(self):
        self.active = True
        self._arm()

    def stop(self):
        self.active = False

    def _arm(self):
        gap = int(self.rng.expovariate(1.0 / self._gap_mean_ticks)) + 1
        self.eng.schedule_after(gap, self._fire, None)

    def _fire(self, _):
        if not self.active:
            return
        pkt = Packet(DATA, HIGH, self.pkt_bytes, self.route,
                     flow_id=self.flow_id, send_ts=self.eng.now)
        self.route[0].enqueue(pkt)
        self.sent_pkts += 1
        self._arm()


class RampPacketSource:
    """Open-loop source whose offered rate ramps linearly from
    rate0_bps at t0 to rate1_bps at t1 (then holds). Evenly spaced, no
    randomness, so loss onset is sharp."""

    __slots__ = ("net", "eng", "flow_id", "route", "pkt_bytes",
                 "t0", "t1", "rate0", "rate1", "active", "sent_pkts")

    def __init__(self, net, flow_id, route, rate0_bps, rate1_bps,
                 t0_ticks, t1_ticks, pkt_bytes=1500):
        self.net = net
        self.eng = net.eng
        self.flow_id = flow_id
        self.route = route
        self.pkt_bytes = pkt_bytes
        self.t0, self.t1 = t0_ticks, t1_ticks
        self.rate0, self.rate1 = rate0_bps, rate1_bps
        self.active = False
        self.sent_pkts = 0

    def rate_at(self, t_ticks) -> float:
        if t_ticks <= self.t0:
            return self.rate0
        if t_ticks >= self.t1:
            return self.rate1
        frac = (t_ticks - self.t0) / (self.t1 - self.t0)
        return self.rate0 + frac * (self.rate1 - self.rate0)

    def start(self):
        self.active = True
        self.eng.schedule_after(0, self._fire, None)

    def stop(self):
        self.active = False

    def _fire(self, _):
        if not self.active:
            return
        pkt = Packet(DATA, HIGH, self.pkt_bytes, self.route,
                     flow_id=self.flow_id, send_ts=self.eng.now)
        self.route[0].enqueue(pkt)
        self.sent_pkts += 1
        gap = int(self.pkt_bytes * 8 * SEC / self.rate_at(self.eng.now))
        self.eng.schedule_after(max(gap, 1), self._fire, None)
