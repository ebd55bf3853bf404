"""Probe channel behavior: pacing, echo matching, delay and loss
signals, grant fan-out."""

import pytest

from scoutsim.engine import Engine
from scoutsim.packet import DATA, HIGH, LOW, Packet
from scoutsim.scout import (PER_DATAPATH, ScoutChannel, is_scout_eligible,
                            overhead_ratio, split_grant)
from scoutsim.topology import Network
from scoutsim.units import SEC

GBPS10 = 10_000_000_000


class FlowSpy:
    """Records every probe-signal callback a channel can make."""

    def __init__(self):
        self.acks = []
        self.grants = []
        self.busys = []
        self.losses = 0

    def scout_ack_update(self, rtt):
        self.acks.append(rtt)

    def scout_grant(self, share, alpha_used):
        self.grants.append((share, alpha_used))

    def scout_busy(self, d_s):
        self.busys.append(d_s)

    def scout_loss(self):
        self.losses += 1


def rig(prop=10_000, lpq_cap=640, interval=100_000_000, d_t=200_000, **kw):
    net = Network(Engine())
    fwd = net.add_port("fwd", GBPS10, prop, 65536, lpq_cap)
    rev = net.add_port("rev", GBPS10, prop, 65536, lpq_cap)
    ch = ScoutChannel(net, 0, (fwd,), (rev,), 64, interval, d_t, **kw)
    return net, ch


def test_eligibility_threshold():
    assert is_scout_eligible(None, 15_000)        # long flows always probe
    assert is_scout_eligible(15_000, 15_000)      # boundary included
    assert not is_scout_eligible(14_999, 15_000)


def test_grant_split_even():
    assert split_grant(1280.0, 4) == 320.0


def test_unjittered_pacing_exact_count():
    """At a 100 us interval the channel emits exactly 10000 probes in
    one second (sends at 0, 100 us, ..., 999.9 ms)."""
    net, ch = rig(standalone=True)
    ch.start()
    net.eng.run_until(SEC - 1)
    assert ch.sent == 10_000
    assert ch.sent == ch.acked + ch.lost + len(ch.outstanding)
    assert ch.lost == 0


def test_jitter_only_stretches_gaps():
    net, ch = rig(standalone=True, pace_seed=42)
    net.scout_log = []
    ch.start()
    net.eng.run_until(SEC - 1)
    sends = [t for t, _c, ev, _s, _r in net.scout_log if ev == "sent"]
    gaps = [b - a for a, b in zip(sends, sends[1:])]
    assert min(gaps) >= ch.interval
    assert max(gaps) <= int(ch.interval * 1.2) + 1
    # count stays under the unjittered ceiling, above the stretch floor
    assert 8_000 <= ch.sent <= 10_000


def test_probe_overhead_ratio():
    net, ch = rig(standalone=True, interval=10 * SEC)
    ch.start()                                   # exactly one probe
    fwd = net.ports["fwd"]
    fwd.enqueue(Packet(DATA, HIGH, 1500, (fwd,)))
    net.eng.run_until(2_000_000)
    assert fwd.scout_bytes_tx == 64
    assert fwd.data_bytes_tx == 1500
    assert overhead_ratio(fwd) == 64 / (64 + 1500)


def test_overhead_zero_when_idle():
    net, ch = rig(standalone=True, interval=10 * SEC)
    assert overhead_ratio(net.ports["fwd"]) == 0.0


def test_signal_delay_worst_of_history_and_age():
    net, ch = rig(standalone=True)
    assert ch.d_s(1000) is None
    ch.last_rtt = 150_000
    assert ch.d_s(1000) == 150_000
    ch.outstanding[9] = 0
    assert ch.d_s(400_000) == 400_000            # oldest age dominates
    assert ch.d_s(100_000) == 150_000            # history dominates


def test_echo_round_trip_updates_state():
    net, ch = rig(standalone=True, interval=10 * SEC)
    ch.start()
    net.eng.run_until(1_000_000)
    assert ch.acked == 1
    assert ch.outstanding == {}
    # one fwd wire + prop, reflect, one rev wire + prop
    assert ch.last_rtt == 2 * (51_200 + 10_000)


def test_echo_gap_tracks_interval():
    net, ch = rig(standalone=True, interval=1_000_000)
    ch.start()
    net.eng.run_until(3_500_000)
    assert ch.prev_echo_gap == 1_000_000


def blocked_rig(**kw):
    """Forward LPQ is full and the wire is pinned, so probes drop."""
    net, ch = rig(lpq_cap=640, **kw)
    fwd = net.ports["fwd"]
    fwd.enqueue(Packet(DATA, HIGH, 10**9, (fwd,)))     # pins the wire
    assert fwd.enqueue(Packet(DATA, LOW, 640, (fwd,)))
    return net, ch, fwd


def test_dropped_probe_reported_lost_after_two_targets():
    net, ch, fwd = blocked_rig(interval=10 * SEC, d_t=200_000)
    spy = FlowSpy()
    ch.register(spy)
    net.eng.run_until(399_999)
    assert ch.lost == 0
    net.eng.run_until(400_000)                   # 2 * d_t after the send
    assert ch.lost == 1
    assert spy.losses == 1
    assert ch.outstanding == {}


def test_shared_channel_loss_halves_channel_alpha():
    net, ch, fwd = blocked_rig(interval=10 * SEC, d_t=200_000,
                               scope=PER_DATAPATH, alpha_init=20)
    ch.register(FlowSpy())
    net.eng.run_until(SEC)
    assert ch.alpha == 10


def test_growing_backlog_raises_busy_signal():
    """With echoes absent, later delay checks see the oldest outstanding
    probe age past d_t and signal busy with that age."""
    net, ch, fwd = blocked_rig(interval=100_000, d_t=200_000)
    spy = FlowSpy()
    ch.register(spy)
    net.eng.run_until(1_000_000)
    assert spy.busys
    assert max(spy.busys) > ch.d_t
    assert spy.busys == sorted(spy.busys)


def test_late_echo_counted_not_acked():
    # propagation stretches the RTT past the 2 * d_t loss horizon
    net, ch = rig(prop=600_000, d_t=200_000, interval=10 * SEC)
    spy = FlowSpy()
    ch.register(spy)
    net.eng.run_until(2 * SEC)
    assert ch.lost == 1
    assert ch.late == 1
    assert ch.acked == 0
    assert spy.acks == []
    assert spy.losses == 1


def test_per_flow_ack_callback():
    net, ch = rig(interval=10 * SEC)
    spy = FlowSpy()
    ch.register(spy)
    net.eng.run_until(1_000_000)
    assert spy.acks == [2 * (51_200 + 10_000)]


def test_shared_grant_fanout():
    """Per-datapath scope: grant alpha*S splits evenly, channel alpha
    doubles, every flow hears the same post-update alpha."""
    net, ch = rig(interval=10 * SEC, scope=PER_DATAPATH, alpha_init=20)
    spies = [FlowSpy() for _ in range(4)]
    for s in spies:
        ch.register(s)
    net.eng.run_until(1_000_000)
    assert ch.alpha == 40
    for s in spies:
        assert s.grants == [(320.0, 40)]
        assert s.acks == []


def test_channel_stops_when_last_flow_leaves():
    net, ch = rig(interval=100_000)
    spy = FlowSpy()
    ch.register(spy)
    assert ch.active
    net.eng.run_until(250_000)
    ch.deregister(spy)
    assert not ch.active
    sent_at_leave = ch.sent
    net.eng.run_until(2_000_000)
    assert ch.sent == sent_at_leave


def test_standalone_channel_outlives_flows():
    net, ch = rig(interval=100_000, standalone=True)
    ch.start()
    net.eng.run_until(250_000)
    assert ch.active
    assert ch.sent == 3


@pytest.mark.parametrize("interval,prop,horizon", [
    (100_000, 10_000, 3_000_000),
    (50_000, 200_000, 2_000_000),
    (1_000_000, 600_000, 10_000_000),
])
def test_probe_accounting_is_sound(interval, prop, horizon):
    net, ch = rig(prop=prop, interval=interval, d_t=200_000,
                  standalone=True, pace_seed=7)
    ch.start()
    net.eng.run_until(horizon)
    assert ch.sent == ch.acked + ch.lost + len(ch.outstanding)
    assert ch.late <= ch.lost
