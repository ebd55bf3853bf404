"""Probe (Scout) service: generation, reflection, analysis.

A channel paces one low-priority probe per injection interval along a
fixed path, independent of any congestion window, so probes keep flowing
even when the data window is exhausted. The network echoes each probe at
the destination with zero host latency (see Network.arrive); the channel
matches echoes to outstanding probes and turns the outcome into three
signals for its flows:

  echo arrives   -> bandwidth available (grant)
  delay exceeds d_t (echo late, or oldest outstanding probe too old)
                 -> link busy (window decrease, DET-gated per flow)
  no echo within 2*d_t -> probe lost (alpha halves)

Scope: a per-flow channel serves exactly one flow and uses the flow's
own alpha; a per-datapath channel serves every eligible flow between one
host pair, owns the authoritative alpha itself, and splits each grant
alpha*S/n equally. Flows smaller than the initial window never attach
(they would finish within a round trip anyway).

A standalone channel (no flows) is a pure measurement probe stream used
by the queueing experiments.
"""

import random

from .packet import LOW, SCOUT, Packet


def is_scout_eligible(flow_size_bytes, w_init_bytes) -> bool:
    """Flows shorter than one initial window never probe. Unbounded
    (long-lived) flows always do."""
    if flow_size_bytes is None:
        return True
    return flow_size_bytes >= w_init_bytes


def split_grant(grant_bytes: float, n_flows: int) -> float:
    """Equal split of a bandwidth grant across the flows of a shared
    channel."""
    return grant_bytes / n_flows


PER_FLOW = "per_flow"
PER_DATAPATH = "per_datapath"


class ScoutChannel:
    __slots__ = (
        "net", "eng", "channel_id", "route", "rev_route", "probe_bytes",
        "interval", "d_t", "scope", "flows", "alpha", "alpha_max",
        "outstanding", "last_rtt", "last_echo_at", "prev_echo_gap",
        "ipg_variant", "ipg_target", "next_id", "active",
        "standalone", "collect_rtts", "rtts", "_pace_rng",
        "sent", "acked", "lost", "late",
    )

    def __init__(self, net, channel_id, route, rev_route, probe_bytes,
                 interval_ticks, d_t_ticks, scope=PER_FLOW,
                 alpha_init=20, alpha_max=512, standalone=False,
                 ipg_variant=False, ipg_target_ticks=None,
                 collect_rtts=False, pace_seed=None):
        self.net = net
        self.eng = net.eng
        self.channel_id = channel_id
        self.route = route
        self.rev_route = rev_route
        self.probe_bytes = probe_bytes
        self.interval = interval_ticks
        self.d_t = d_t_ticks
        self.scope = scope
        self.flows = []
        self.alpha = alpha_init          # authoritative only per-datapath
        self.alpha_max = alpha_max
        self.outstanding = {}            # scout_id -> send tick, insertion order
        self.last_rtt = None
        self.last_echo_at = None
        self.prev_echo_gap = None
        self.ipg_variant = ipg_variant
        self.ipg_target = ipg_target_ticks if ipg_target_ticks is not None \
            else interval_ticks
        self.next_id = 0
        self.active = False
        self.standalone = standalone
        self.collect_rtts = collect_rtts
        self.rtts = []
        # Cadence jitter keeps concurrent channels from phase-locking on the
        # shared LPQ; seeded per channel so reruns stay byte-identical.
        # Gaps stretch the nominal interval (never shrink it), so the
        # per-window emission bound of ceil(W/interval)+1 still holds.
        self._pace_rng = random.Random(pace_seed) if pace_seed is not None \
            else None
        self.sent = 0
        self.acked = 0
        self.lost = 0
        self.late = 0
        net.channels[channel_id] = self

    # --- flow membership --------------------------------------------------

    def register(self, flow):
        self.flows.append(flow)
        if not self.active:
            self.start()

    def deregister(self, flow):
        if flow in self.flows:
            self.flows.remove(flow)
        if not self.flows and not self.standalone:
            self.active = False

    # --- pacing -----------------------------------------------------------

    def start(self):
        if not self.active:
            self.active = True
            self._emit()

    def _emit(self, _=None):
        if not self.active:
            return
        if not self.flows and not self.standalone:
            self.active = False
            return
        now = self.eng.now
        sid = self.next_id
        self.next_id += 1
        pkt = Packet(SCOUT, LOW, self.probe_bytes, self.route,
                     channel_id=self.channel_id, scout_id=sid, send_ts=now)
        self.outstanding[sid] = now
        self.sent += 1
        if self.net.scout_log is not None:
            self.net.scout_log.append((now, self.channel_id, "sent", sid, None))
        self.route[0].enqueue(pkt)
        self.eng.schedule(now + self.d_t, self._delay_check, sid)
        gap = self.interval
        if self._pace_rng is not None:
            gap = int(gap * (1.0 + 0.2 * self._pace_rng.random()))
        self.eng.schedule(now + gap, self._emit)

    # --- analysis -----------------------------------------------------------

    def _oldest_age(self, now):
        if not self.outstanding:
            return None
        return now - next(iter(self.outstanding.values()))

    def d_s(self, now):
        """Current busyness signal, or None with no probe history."""
        oldest = self._oldest_age(now)
        if self.last_rtt is None:
            return oldest
        if oldest is None:
            return self.last_rtt
        return self.last_rtt if self.last_rtt >= oldest else oldest

    def _delay_check(self, sid):
        if sid not in self.outstanding:
            return
        now = self.eng.now
        d_s = self.d_s(now)
        if d_s is not None and d_s > self.d_t:
            self._signal_busy(d_s)
        # loss horizon is one more d_t after the delay check
        self.eng.schedule(now + self.d_t, self._loss_check, sid)

    def _loss_check(self, sid):
        if sid not in self.outstanding:
            return
        del self.outstanding[sid]
        self.lost += 1
        if self.net.scout_log is not None:
            self.net.scout_log.append(
                (self.eng.now, self.channel_id, "lost", sid, None))
        if self.scope == PER_DATAPATH:
            self.alpha = max(self.alpha // 2, 1)
        else:
            for f in self.flows:
                f.scout_loss()

    def on_echo(self, pkt):
        now = self.eng.now
        sid = pkt.scout_id
        ts = self.outstanding.pop(sid, None)
        if ts is None:
            self.late += 1
            return
        rtt = now - ts
        self.last_rtt = rtt
        self.acked += 1
        if self.collect_rtts:
            self.rtts.append(rtt)
        if self.net.scout_log is not None:
            self.net.scout_log.append((now, self.channel_id, "acked", sid, rtt))
        if self.last_echo_at is not None:
            self.prev_echo_gap = now - self.last_echo_at
        self.last_echo_at = now

        if not self.flows:
            return
        if self.ipg_variant:
            self._variant_event(rtt, now)
            return
        if self.scope == PER_DATAPATH:
            grant = self.alpha * self.probe_bytes
            self.alpha = min(2 * self.alpha, self.alpha_max)
            share = split_grant(grant, len(self.flows))
            alpha_used = self.alpha
            for f in list(self.flows):
                f.scout_grant(share, alpha_used)
        else:
            for f in list(self.flows):
                f.scout_ack_update(rtt)
        d_s = self.d_s(now)
        if d_s is not None and d_s > self.d_t:
            self._signal_busy(d_s)

    def _variant_event(self, rtt, now):
        d_s = self.d_s(now)
        ipg_s = self.prev_echo_gap
        delay_over = d_s is not None and d_s > self.d_t
        gap_over = ipg_s is not None and ipg_s > self.ipg_target
        if not delay_over and not gap_over:
            for f in list(self.flows):
                f.scout_increase_variant(rtt)
        else:
            for f in list(self.flows):
                f.scout_busy_variant(d_s, ipg_s, self.ipg_target)

    def _signal_busy(self, d_s):
        for f in list(self.flows):
            f.scout_busy(d_s)


def overhead_ratio(port) -> float:
    """Probe bytes as a fraction of all payload-bearing bytes actually
    served on a port's forward direction."""
    total = port.scout_bytes_tx + port.data_bytes_tx
    if total == 0:
        return 0.0
    return port.scout_bytes_tx / total
