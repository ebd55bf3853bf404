"""Output-port behavior: two strict-priority queues in front of one
serializing link, ECN marking on the high queue, byte-capped low queue."""

from scoutsim.engine import Engine
from scoutsim.packet import DATA, HIGH, LOW, SCOUT, Packet
from scoutsim.topology import Network
from scoutsim.units import serialization_ticks

GBPS10 = 10_000_000_000


def make_port(rate_bps=GBPS10, prop=0, hpq_cap=250, lpq_cap=640, ecn=None):
    net = Network(Engine())
    port = net.add_port("p", rate_bps, prop, hpq_cap, lpq_cap, ecn)
    return net.eng, net, port


def pkt(size, priority=HIGH, kind=DATA, route=()):
    return Packet(kind, priority, size, route)


def test_single_packet_timing():
    eng, net, port = make_port(prop=7)
    port.enqueue(pkt(1500, route=(port,)))
    eng.run()
    # wire time 1.2 us plus propagation, nothing else pending
    assert eng.now == 1_200_000 + 7
    assert port.deq_count == 1


def test_back_to_back_serialization():
    eng, net, port = make_port()
    for _ in range(10):
        port.enqueue(pkt(1500, route=(port,)))
    eng.run()
    assert eng.now == 10 * 1_200_000
    assert port.enq_count == port.deq_count == 10


def test_high_priority_preempts_queued_low():
    """A high packet enqueued behind waiting low packets is served first
    (the packet already on the wire is never interrupted)."""
    eng, net, port = make_port()
    order = []
    seen = net.arrive

    def spy(p):
        order.append(p.priority)
        seen(p)

    net.arrive = spy
    port.enqueue(pkt(100, LOW, route=(port,)))   # occupies the wire
    port.enqueue(pkt(100, LOW, route=(port,)))
    port.enqueue(pkt(100, HIGH, route=(port,)))
    eng.run()
    assert order == [LOW, HIGH, LOW]


def test_work_conserving_when_high_queue_empty():
    eng, net, port = make_port()
    port.enqueue(pkt(64, LOW, route=(port,)))
    eng.run()
    assert port.deq_count == 1
    assert eng.now == serialization_ticks(64, GBPS10)


def test_low_queue_byte_cap_boundary():
    """The cap is in bytes and admission is exact: 576 + 64 fills a 640 B
    queue, and one more byte-sized arrival is refused."""
    eng, net, port = make_port()
    blocker = pkt(1500, HIGH, route=(port,))
    port.enqueue(blocker)                        # keeps the wire busy
    assert port.enqueue(pkt(576, LOW, route=(port,)))
    assert port.enqueue(pkt(64, LOW, route=(port,)))
    assert port.lpq_bytes == 640
    assert not port.enqueue(pkt(1, LOW, route=(port,)))
    assert port.drop_low == 1
    assert net.drops_low == 1
    eng.run()
    assert port.deq_count == 3


def test_high_queue_packet_cap():
    eng, net, port = make_port(hpq_cap=3)
    port.enqueue(pkt(1500, route=(port,)))       # on the wire, not queued
    for _ in range(3):
        assert port.enqueue(pkt(1500, route=(port,)))
    assert not port.enqueue(pkt(1500, route=(port,)))
    assert port.drop_high == 1
    assert net.drop_log[0][1] == "p"
    assert net.drop_log[0][2] == HIGH
    eng.run()
    assert port.deq_count == 4


def test_ecn_marks_at_threshold():
    """Marking happens on enqueue when the high-queue depth (counting the
    arriving packet) reaches the threshold."""
    eng, net, port = make_port(ecn=3)
    pkts = [pkt(1500, route=(port,)) for _ in range(5)]
    for p in pkts:
        port.enqueue(p)
    # first is in service; queue depths on arrival: 1, 2, 3, 4
    assert [p.ecn for p in pkts] == [False, False, False, True, True]


def test_ecn_none_never_marks():
    eng, net, port = make_port(ecn=None)
    pkts = [pkt(1500, route=(port,)) for _ in range(5)]
    for p in pkts:
        port.enqueue(p)
    assert not any(p.ecn for p in pkts)


def test_occupancy_integral_exact():
    """acc_hpq integrates queue depth over time in packet-ticks.

    Three 1500 B packets at 10 Gb/s arrive together: depth 2 for one wire
    time, then 1, then 0. Integral = 3 wire times."""
    eng, net, port = make_port()
    for _ in range(3):
        port.enqueue(pkt(1500, route=(port,)))
    eng.run()
    port._integrate(eng.now)
    wire = 1_200_000
    assert port.acc_hpq == 2 * wire + 1 * wire
    assert port.mean_hpq_pkts(eng.now) == 1.0


def test_lpq_byte_integral():
    eng, net, port = make_port()
    port.enqueue(pkt(1500, HIGH, route=(port,)))
    port.enqueue(pkt(64, LOW, route=(port,)))
    eng.run()
    port._integrate(eng.now)
    # 64 bytes waited exactly one data wire time
    assert port.acc_lpq_bytes == 64 * 1_200_000


def test_wait_time_by_priority():
    eng, net, port = make_port()
    port.enqueue(pkt(1500, HIGH, route=(port,)))
    port.enqueue(pkt(1500, HIGH, route=(port,)))
    port.enqueue(pkt(64, LOW, route=(port,)))
    eng.run()
    wire = 1_200_000
    assert port.mean_wait_ticks(HIGH) == wire / 2   # 0 and one wire time
    assert port.mean_wait_ticks(LOW) == 2 * wire


def test_byte_counters_by_kind():
    eng, net, port = make_port()
    port.enqueue(pkt(1500, HIGH, DATA, route=(port,)))
    port.enqueue(pkt(64, LOW, SCOUT, route=(port,)))
    eng.run()
    assert port.data_bytes_tx == 1500
    assert port.scout_bytes_tx == 64
    assert port.other_bytes_tx == 0


def test_conservation_under_mixed_load():
    eng, net, port = make_port(hpq_cap=5, lpq_cap=640)
    sent = 0
    for i in range(200):
        if i % 3:
            sent += port.enqueue(pkt(1500, HIGH, route=(port,)))
        else:
            sent += port.enqueue(pkt(64, LOW, SCOUT, route=(port,)))
    eng.run()
    assert port.enq_count == sent
    assert port.deq_count == sent
    assert port.resident() == 0
    dropped = port.drop_high + port.drop_low
    assert sent + dropped == 200


def test_resident_counts_wire_occupancy():
    eng, net, port = make_port()
    port.enqueue(pkt(1500, route=(port,)))
    assert port.resident() == 1          # on the wire
    port.enqueue(pkt(1500, route=(port,)))
    assert port.resident() == 2
    eng.run()
    assert port.resident() == 0
