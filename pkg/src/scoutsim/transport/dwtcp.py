"""DWTCP: probe-driven congestion control.

The data path is byte-for-byte NewReno (inherited, not overridden), so a
run with probing disabled reproduces the NewReno trace exactly. Probe
feedback adds three inputs:

  probe ACK      -> bandwidth grant: w += alpha*S, then alpha doubles
                    (capped at alpha_max)
  probe delayed  -> busyness: when the probe delay signal d_s exceeds the
                    target d_t, w is scaled by
                    max(1 - beta*sqrt(w/L)*(d_s - d_t)/d_s, 0.5),
                    at most once per base RTT (the DET gate)
  probe loss     -> alpha halves (floor 1)

d_t = tau + K*L*8/C: the base RTT plus the time to serve K data packets
at the path's nominal bottleneck rate. d_s is the larger of the last
probe RTT and the age of the oldest unanswered probe.

The sqrt term evaluates the window in segments. An optional variant law
also reads the probe inter-arrival gap; see decrease_factor_ipg.
"""

import math

from .base import CONG_AVOID
from .newreno import NewRenoSender


def compute_d_t(tau_ns: float, k: int, seg_bytes: int, rate_bps: float) -> float:
    """Target probe delay in ns: tau + K segment service times."""
    return tau_ns + k * seg_bytes * 8 * 1e9 / rate_bps


def compute_d_s(last_probe_rtt, oldest_unacked_age):
    """Busyness signal: worst of the last echo RTT and the oldest
    outstanding probe's age. None when there is no probe activity."""
    if last_probe_rtt is None and oldest_unacked_age is None:
        return None
    if last_probe_rtt is None:
        return oldest_unacked_age
    if oldest_unacked_age is None:
        return last_probe_rtt
    return max(last_probe_rtt, oldest_unacked_age)


def decrease_factor(w_bytes: float, seg_bytes: int, beta: float,
                    d_s: float, d_t: float) -> float:
    """Multiplicative decrease, clamped to [0.5, 1]. d_s and d_t may be
    in any one time unit; only their ratio matters."""
    raw = 1.0 - beta * math.sqrt(w_bytes / seg_bytes) * (d_s - d_t) / d_s
    return raw if raw > 0.5 else 0.5


def decrease_factor_ipg(w_bytes: float, seg_bytes: int, beta: float,
                        d_s: float, d_t: float,
                        ipg_s: float, ipg_t: float) -> float:
    """Variant decrease using both probe delay and probe inter-arrival
    gap. Callers handle the no-congestion case; this covers the three
    exceeded-signal branches."""
    root_w = math.sqrt(w_bytes / seg_bytes)
    delay_over = d_s > d_t
    gap_over = ipg_s > ipg_t
    if delay_over and gap_over:
        raw = 1.0 - 2.0 * beta * root_w * \
            ((d_s - d_t) * (ipg_s - ipg_t)) / (d_s * ipg_s)
    elif gap_over:
        raw = 1.0 - 2.0 * beta * root_w * (ipg_s - ipg_t) ** 2 / ipg_s ** 2
    elif delay_over:
        raw = 1.0 - 2.0 * beta * root_w * (d_s - d_t) ** 2 / d_s ** 2
    else:
        raise ValueError("no signal exceeded; use the increase branch")
    return raw if raw > 0.5 else 0.5


class DwtcpSender(NewRenoSender):
    __slots__ = ("alpha", "alpha_max", "probe_bytes", "det", "T", "d_t_ticks",
                 "last_d_s", "beta")

    def __init__(self, *args, beta=0.04, alpha_init=20, alpha_max=512,
                 probe_bytes=64, base_rtt_ticks=0, d_t_ticks=0, **kwargs):
        super().__init__(*args, **kwargs)
        self.beta = beta
        self.alpha = alpha_init
        self.alpha_max = alpha_max
        self.probe_bytes = probe_bytes
        self.T = base_rtt_ticks
        self.d_t_ticks = d_t_ticks
        self.det = 0
        self.last_d_s = None

    def start(self, _=None):
        super().start(_)
        self.det = self.eng.now

    # --- probe signal handlers (called by the probe channel) -------------

    def scout_ack_update(self, rtt_ticks):
        """Per-flow scouting: grant alpha*S, then double alpha."""
        self.w += self.alpha * self.probe_bytes
        self.alpha = min(2 * self.alpha, self.alpha_max)
        if self.net.flow_log is not None:
            self.net.flow_log.append(
                (self.eng.now, self.flow_id, "scout_ack", self.w, self.alpha,
                 rtt_ticks))
        self._try_send()

    def scout_grant(self, grant_bytes, alpha_used):
        """Shared-channel scouting: this flow's slice of the grant."""
        self.w += grant_bytes
        if self.net.flow_log is not None:
            self.net.flow_log.append(
                (self.eng.now, self.flow_id, "scout_ack", self.w, alpha_used,
                 None))
        self._try_send()

    def scout_busy(self, d_s_ticks):
        """Delay signal with d_s > d_t; applies Eq-style decrease behind
        the once-per-RTT DET gate."""
        now = self.eng.now
        self.last_d_s = d_s_ticks
        if now < self.det + self.T:
            return
        self.ssthresh = self.w
        f = decrease_factor(self.w, self.seg, self.beta,
                            float(d_s_ticks), float(self.d_t_ticks))
        self.w = max(self.w * f, float(self.seg))
        self.det = now
        self.phase = CONG_AVOID
        if self.net.flow_log is not None:
            self.net.flow_log.append(
                (now, self.flow_id, "decrease", self.w, self.alpha, d_s_ticks))

    def scout_loss(self):
        self.alpha = max(self.alpha // 2, 1)

    def scout_increase_variant(self, _rtt_ticks):
        """Variant law, no-congestion branch: w += L + alpha*S."""
        self.w += self.seg + self.alpha * self.probe_bytes
        self.alpha = min(2 * self.alpha, self.alpha_max)
        if self.net.flow_log is not None:
            self.net.flow_log.append(
                (self.eng.now, self.flow_id, "scout_ack", self.w, self.alpha,
                 _rtt_ticks))
        self._try_send()

    def scout_busy_variant(self, d_s_ticks, ipg_s_ticks, ipg_t_ticks):
        now = self.eng.now
        self.last_d_s = d_s_ticks
        if now < self.det + self.T:
            return
        self.ssthresh = self.w
        f = decrease_factor_ipg(
            self.w, self.seg, self.beta, float(d_s_ticks),
            float(self.d_t_ticks),
            float(ipg_s_ticks) if ipg_s_ticks is not None else 0.0,
            float(ipg_t_ticks))
        self.w = max(self.w * f, float(self.seg))
        self.det = now
        self.phase = CONG_AVOID
        if self.net.flow_log is not None:
            self.net.flow_log.append(
                (now, self.flow_id, "decrease", self.w, self.alpha, d_s_ticks))
