"""Reliable-delivery substrate shared by every congestion protocol here.

One sender/receiver pair per flow. The receiver acks every data packet
cumulatively and echoes both the packet's congestion mark and its send
timestamp, so the sender gets an RTT sample per ack without timed-segment
bookkeeping. Loss recovery is conservative NewReno-style: third duplicate
ack triggers one fast retransmit and a recovery episode (one hole
retransmitted per partial ack, no window inflation); a retransmission
timeout collapses to one segment and re-enters slow start. The RTO is
max(4 * smoothed RTT, a 1 ms floor), doubling per consecutive timeout.

Protocol behavior plugs in through three hooks: _on_new_ack (window
growth), _on_triple_dup and _on_timeout_cut (window cuts).
"""

from ..packet import ACK_BYTES, DATA, DATA_ACK, HIGH, Packet

SLOW_START = 0
CONG_AVOID = 1

LONG_FLOW = 1 << 62          # stand-in size for flows without a byte limit


class Receiver:
    __slots__ = ("net", "flow_id", "rev_route", "rcv_nxt", "ooo")

    def __init__(self, net, flow_id, rev_route):
        self.net = net
        self.flow_id = flow_id
        self.rev_route = rev_route
        self.rcv_nxt = 0
        self.ooo = {}

    def on_data(self, pkt):
        seq = pkt.seq
        end = seq + pkt.size
        if seq == self.rcv_nxt:
            nxt = end
            ooo = self.ooo
            while nxt in ooo:
                nxt = ooo.pop(nxt)
            self.rcv_nxt = nxt
        elif seq > self.rcv_nxt:
            self.ooo[seq] = end
        ack = Packet(DATA_ACK, HIGH, ACK_BYTES, self.rev_route,
                     flow_id=self.flow_id, ack_seq=self.rcv_nxt,
                     send_ts=pkt.send_ts)
        ack.ece = pkt.ecn
        self.rev_route[0].enqueue(ack)


class SenderBase:
    __slots__ = (
        "net", "eng", "flow_id", "route", "seg", "w", "ssthresh", "phase",
        "snd_nxt", "snd_una", "size", "sized", "start_ts", "finish_ts",
        "dupacks", "in_recovery", "recover", "srtt", "min_rto", "backoff",
        "_rto_event_at", "_last_progress", "timeouts", "on_finish",
        "literal_slowstart",
    )

    alpha = 0        # protocols without a probe channel log alpha as 0

    def __init__(self, net, flow_id, route, seg_bytes, w_init_bytes,
                 size_bytes=None, min_rto_ticks=1_000_000_000,
                 literal_slowstart=False):
        self.net = net
        self.eng = net.eng
        self.flow_id = flow_id
        self.route = route
        self.seg = seg_bytes
        self.w = float(w_init_bytes)
        self.ssthresh = float("inf")
        self.phase = SLOW_START
        self.snd_nxt = 0
        self.snd_una = 0
        self.sized = size_bytes is not None
        self.size = size_bytes if size_bytes is not None else LONG_FLOW
        self.start_ts = None
        self.finish_ts = None
        self.dupacks = 0
        self.in_recovery = False
        self.recover = 0
        self.srtt = 0.0
        self.min_rto = min_rto_ticks
        self.backoff = 1
        self._rto_event_at = None
        self._last_progress = 0
        self.timeouts = 0
        self.on_finish = None
        self.literal_slowstart = literal_slowstart

    # --- lifecycle ------------------------------------------------------

    def start(self, _=None):
        self.start_ts = self.eng.now
        self._last_progress = self.eng.now
        self._try_send()

    def stop(self, _=None):
        """Long flow leaves: no new data after this instant."""
        self.size = self.snd_nxt
        if self.finish_ts is None and self.snd_una >= self.size:
            self._finish()

    # --- sending ----------------------------------------------------------

    def _send_segment(self, seq):
        n = min(self.seg, self.size - seq)
        pkt = Packet(DATA, HIGH, n, self.route, flow_id=self.flow_id,
                     seq=seq, send_ts=self.eng.now)
        self.route[0].enqueue(pkt)
        return n

    def _try_send(self):
        w = self.w
        while self.snd_nxt < self.size and self.snd_nxt - self.snd_una < w:
            self.snd_nxt += self._send_segment(self.snd_nxt)
        self._ensure_rto()

    # --- ack path ---------------------------------------------------------

    def on_ack(self, pkt):
        now = self.eng.now
        if pkt.send_ts:
            sample = now - pkt.send_ts
            self.srtt = sample if self.srtt == 0.0 else \
                self.srtt + 0.125 * (sample - self.srtt)
        a = pkt.ack_seq
        if a > self.snd_una:
            newly = a - self.snd_una
            self.snd_una = a
            self.dupacks = 0
            self.backoff = 1
            self._last_progress = now
            if self.in_recovery:
                if a >= self.recover:
                    self.in_recovery = False
                else:
                    # NewReno partial ack: repair the next hole, no new cut
                    self._send_segment(a)
            else:
                self._on_new_ack(newly, pkt.ece)
            if self.net.flow_log is not None:
                self.net.flow_log.append(
                    (now, self.flow_id, "ack", self.w, self.alpha, None))
            if self.snd_una >= self.size and self.sized_or_stopped():
                if self.finish_ts is None:
                    self._finish()
                return
            self._try_send()
        else:
            self.dupacks += 1
            if self.dupacks == 3 and not self.in_recovery and self.snd_nxt > a:
                self.in_recovery = True
                self.recover = self.snd_nxt
                self._on_triple_dup()
                self._send_segment(self.snd_una)
                if self.net.flow_log is not None:
                    self.net.flow_log.append(
                        (self.eng.now, self.flow_id, "loss", self.w,
                         self.alpha, None))
            self._try_send()

    def sized_or_stopped(self) -> bool:
        return self.size < LONG_FLOW

    def _finish(self):
        self.finish_ts = self.eng.now
        self._rto_event_at = None
        if self.on_finish is not None:
            self.on_finish(self)

    # --- retransmission timer ----------------------------------------------

    def _current_rto(self):
        return int(max(4.0 * self.srtt, float(self.min_rto))) * self.backoff

    def _ensure_rto(self):
        if self._rto_event_at is None and self.snd_nxt > self.snd_una:
            t = self.eng.now + self._current_rto()
            self._rto_event_at = t
            self.eng.schedule(t, self._rto_fire)

    def _rto_fire(self, _=None):
        self._rto_event_at = None
        if self.snd_una >= self.snd_nxt or self.finish_ts is not None:
            return
        eff = self._last_progress + self._current_rto()
        now = self.eng.now
        if now < eff:
            self._rto_event_at = eff
            self.eng.schedule(eff, self._rto_fire)
            return
        self.timeouts += 1
        self.backoff = min(self.backoff * 2, 64)
        self._on_timeout_cut()
        self.in_recovery = False
        self.dupacks = 0
        self.snd_nxt = self.snd_una
        self._last_progress = now
        if self.net.flow_log is not None:
            self.net.flow_log.append(
                (now, self.flow_id, "timeout", self.w, self.alpha, None))
        self._try_send()

    # --- protocol hooks -----------------------------------------------------

    def _on_new_ack(self, newly_acked, ece):
        raise NotImplementedError

    def _on_triple_dup(self):
        raise NotImplementedError

    def _on_timeout_cut(self):
        raise NotImplementedError
