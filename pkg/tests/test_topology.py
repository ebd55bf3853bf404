import pytest

from scoutsim.engine import Engine
from scoutsim.topology import (HOST_QUEUE_PKTS, Network, build_dumbbell,
                               build_leaf_spine)
from scoutsim.units import ns_to_ticks


def test_dumbbell_shape():
    net = Network(Engine())
    topo = build_dumbbell(net, 5, 5, 10_000_000_000, 10_000_000_000,
                          rtt_ns=100_000)
    assert topo.bottleneck_port == "sw0->sw1"
    r = topo.route("s0", "r0")
    assert [p.name for p in r.ports] == ["s0->sw0", "sw0->sw1", "sw1->r0"]
    rev = topo.route("r0", "s0")
    assert [p.name for p in rev.ports] == ["r0->sw1", "sw1->sw0", "sw0->s0"]
    assert len(topo.hosts) == 10


def test_dumbbell_base_rtt_exact():
    # propagation split is chosen so the quoted RTT is hit tick-exact
    for rtt_ns in (100_000, 500_000, 6_000_000):
        net = Network(Engine())
        topo = build_dumbbell(net, 2, 2, 10_000_000_000, 10_000_000_000,
                              rtt_ns=rtt_ns)
        assert topo.base_rtt("s0", "r1") == ns_to_ticks(rtt_ns)


def test_dumbbell_bottleneck_rate_is_path_min():
    net = Network(Engine())
    topo = build_dumbbell(net, 2, 2, 10_000_000_000, 1_000_000_000,
                          rtt_ns=100_000)
    assert topo.route("s0", "r0").bottleneck_bps == 1_000_000_000


def test_host_nics_are_deep_and_unmarked():
    """Host egress queues must swallow a full window burst without drops
    or marks; only switch ports carry the shallow shared buffer."""
    net = Network(Engine())
    build_dumbbell(net, 1, 1, 10_000_000_000, 10_000_000_000,
                   rtt_ns=100_000, hpq_cap_pkts=250, ecn_threshold_pkts=65)
    nic = net.ports["s0->sw0"]
    core = net.ports["sw0->sw1"]
    assert nic.hpq_cap == HOST_QUEUE_PKTS
    assert nic.ecn_threshold is None
    assert core.hpq_cap == 250
    assert core.ecn_threshold == 65


def test_ecn_threshold_scales_with_rate():
    net = Network(Engine())
    build_leaf_spine(net, ecn_threshold_pkts=65)
    assert net.ports["leaf0->h0"].ecn_threshold == 65
    # spine links run 4x the edge rate, so the mark point scales 4x
    assert net.ports["leaf0->spine0"].ecn_threshold == 260


def test_leaf_spine_shape_and_rtt():
    net = Network(Engine())
    topo = build_leaf_spine(net, leaves=4, spines=2, hosts_per_leaf=4,
                            rtt_ns=100_000)
    assert len(topo.hosts) == 16
    # cross-leaf path: host up, leaf up, spine down, leaf down
    r = topo.route("h0", "h5")
    assert len(r.ports) == 4
    assert topo.base_rtt("h0", "h5") == ns_to_ticks(100_000)
    # same-leaf traffic turns around at the leaf
    r2 = topo.route("h0", "h1")
    assert len(r2.ports) == 2
    assert topo.base_rtt("h0", "h1") < ns_to_ticks(100_000)


def test_leaf_spine_paths_symmetric():
    """Forward and reverse cross-leaf routes ride the same spine."""
    net = Network(Engine())
    topo = build_leaf_spine(net)

    def spine_of(route):
        for p in route.ports:
            if "spine" in p.name.split("->")[0]:
                return p.name.split("->")[0]
        return None

    for a, b in (("h0", "h5"), ("h2", "h14"), ("h7", "h9")):
        fwd = topo.route(a, b)
        rev = topo.route(b, a)
        s1 = fwd.ports[2].name.split("->")[0]
        assert s1.startswith("spine")
        assert spine_of(rev) == s1


def test_unknown_route_raises():
    net = Network(Engine())
    topo = build_dumbbell(net, 1, 1, 10_000_000_000, 10_000_000_000,
                          rtt_ns=100_000)
    with pytest.raises(KeyError):
        topo.route("s0", "nope")
