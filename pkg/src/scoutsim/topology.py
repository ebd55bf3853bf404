"""Fabric model: networks, topology builders, static routing.

A Network owns the ports and dispatches packet arrivals. Packets carry
their full route, so forwarding is an index bump plus an enqueue; the
endpoint dispatch tables (flow senders, flow receivers, probe channels)
are keyed by id. Probe reflection happens here too: a probe reaching its
destination host is echoed back on the reverse route with zero host
latency, at the same low priority.

Topologies are static and symmetric. Two builders cover the experiments:
a dumbbell with a single core bottleneck, and a leaf-spine fabric with
deterministic per-pair spine selection.
"""

from typing import NamedTuple

from .engine import Engine
from .packet import (ACK_BYTES, DATA, DATA_ACK, HIGH, LOW, SCOUT, SCOUT_ACK,
                     Packet)
from .port import PriorityPort
from .units import ns_to_ticks


class Route(NamedTuple):
    ports: tuple            # egress ports in path order
    base_rtt: int           # ticks, 2 * sum of propagation delays
    bottleneck_bps: int     # min nominal line rate along the forward path


class Network:
    """Engine + ports + endpoint dispatch."""

    def __init__(self, eng: Engine):
        self.eng = eng
        self.ports = {}
        self.flow_tx = {}       # flow_id -> sender (gets DataAcks)
        self.flow_rx = {}       # flow_id -> receiver (gets Data)
        self.channels = {}      # channel_id -> probe channel
        self.drop_log = []      # (ticks, port name, priority)
        self.drops_high = 0
        self.drops_low = 0
        self.flow_log = None    # list when per-flow event logging is on
        self.scout_log = None   # list when probe tracing is on

    def add_port(self, name, rate_bps, prop_ticks, hpq_cap, lpq_cap_bytes,
                 ecn_threshold=None) -> PriorityPort:
        p = PriorityPort(name, self.eng, self, rate_bps, prop_ticks,
                         hpq_cap, lpq_cap_bytes, ecn_threshold)
        self.ports[name] = p
        return p

    def record_drop(self, now, port_name, priority):
        if priority == HIGH:
            self.drops_high += 1
        else:
            self.drops_low += 1
        self.drop_log.append((now, port_name, priority))

    def arrive(self, pkt):
        nh = pkt.hop + 1
        route = pkt.route
        if nh < len(route):
            pkt.hop = nh
            route[nh].enqueue(pkt)
            return
        k = pkt.kind
        if k == DATA:
            rx = self.flow_rx.get(pkt.flow_id)
            if rx is not None:
                rx.on_data(pkt)
        elif k == DATA_ACK:
            tx = self.flow_tx.get(pkt.flow_id)
            if tx is not None:
                tx.on_ack(pkt)
        elif k == SCOUT:
            ch = self.channels.get(pkt.channel_id)
            if ch is not None:
                echo = Packet(SCOUT_ACK, LOW, pkt.size, ch.rev_route,
                              channel_id=pkt.channel_id,
                              scout_id=pkt.scout_id, send_ts=pkt.send_ts)
                ch.rev_route[0].enqueue(echo)
        else:  # SCOUT_ACK
            ch = self.channels.get(pkt.channel_id)
            if ch is not None:
                ch.on_echo(pkt)

    def drained(self) -> bool:
        return all(p.resident() == 0 for p in self.ports.values())


class Topology:
    def __init__(self, net: Network, hosts, routes, bottleneck_port,
                 monitored_ports):
        self.net = net
        self.hosts = hosts
        self._routes = routes
        self.bottleneck_port = bottleneck_port
        self.monitored_ports = monitored_ports

    def route(self, src, dst) -> Route:
        try:
            return self._routes[(src, dst)]
        except KeyError:
            raise KeyError(f"no route {src} -> {dst}") from None

    def base_rtt(self, src, dst) -> int:
        return self._routes[(src, dst)].base_rtt


def _scaled_threshold(base_pkts, rate_bps, ref_rate_bps):
    if base_pkts is None:
        return None
    return max(1, round(base_pkts * rate_bps / ref_rate_bps))


# Host egress models a NIC/qdisc: deep enough that a sender never drops
# its own burst. Switch ports keep the shallow shared buffer under study.
HOST_QUEUE_PKTS = 65536


def build_dumbbell(net: Network, n_senders, n_receivers, edge_rate_bps,
                   core_rate_bps, rtt_ns, hpq_cap_pkts=250,
                   lpq_cap_bytes=640, ecn_threshold_pkts=None) -> Topology:
    """Senders s0..s{n-1} -> sw0 -> sw1 -> receivers r0..r{m-1}.

    The forward core port sw0->sw1 is the bottleneck under study.
    Propagation splits 25/50/25 across edge/core/edge so the s->r base
    RTT equals rtt_ns exactly.
    """
    rtt = ns_to_ticks(rtt_ns)
    ow = rtt // 2
    p_edge = ow // 4
    p_core = ow - 2 * p_edge
    edge_thresh = _scaled_threshold(ecn_threshold_pkts, edge_rate_bps, edge_rate_bps)
    core_thresh = _scaled_threshold(ecn_threshold_pkts, core_rate_bps, edge_rate_bps)

    def port(name, rate, prop, thresh):
        return net.add_port(name, rate, prop, hpq_cap_pkts, lpq_cap_bytes, thresh)

    def nic(name, rate, prop):
        return net.add_port(name, rate, prop, HOST_QUEUE_PKTS, lpq_cap_bytes)

    senders = [f"s{i}" for i in range(n_senders)]
    receivers = [f"r{i}" for i in range(n_receivers)]
    core_fwd = port("sw0->sw1", core_rate_bps, p_core, core_thresh)
    core_rev = port("sw1->sw0", core_rate_bps, p_core, core_thresh)
    routes = {}
    up = {}
    down = {}
    for s in senders:
        up[s] = nic(f"{s}->sw0", edge_rate_bps, p_edge)
        down[s] = port(f"sw0->{s}", edge_rate_bps, p_edge, edge_thresh)
    for r in receivers:
        up[r] = nic(f"{r}->sw1", edge_rate_bps, p_edge)
        down[r] = port(f"sw1->{r}", edge_rate_bps, p_edge, edge_thresh)
    base = 2 * (p_edge + p_core + p_edge)
    bneck = min(edge_rate_bps, core_rate_bps)
    for s in senders:
        for r in receivers:
            routes[(s, r)] = Route((up[s], core_fwd, down[r]), base, bneck)
            routes[(r, s)] = Route((up[r], core_rev, down[s]), base, bneck)
    monitored = ["sw0->sw1", "sw1->sw0"]
    return Topology(net, senders + receivers, routes, "sw0->sw1", monitored)


def build_leaf_spine(net: Network, leaves=4, spines=2, hosts_per_leaf=4,
                     edge_rate_bps=10_000_000_000,
                     core_rate_bps=40_000_000_000, rtt_ns=100_000,
                     hpq_cap_pkts=250, lpq_cap_bytes=640,
                     ecn_threshold_pkts=None) -> Topology:
    """Two-tier fabric, hosts h0..h{N-1}, leaf of host i = i // hosts_per_leaf.

    Cross-leaf base RTT equals rtt_ns (propagation 1/5 host-leaf, 3/10
    leaf-spine each way); the spine for a pair is (a+b) mod spines, the
    same in both directions, so paths are symmetric and static.
    """
    rtt = ns_to_ticks(rtt_ns)
    ow = rtt // 2
    p1 = ow // 5                  # host <-> leaf
    p2 = (ow - 2 * p1) // 2       # leaf <-> spine
    edge_thresh = _scaled_threshold(ecn_threshold_pkts, edge_rate_bps, edge_rate_bps)
    core_thresh = _scaled_threshold(ecn_threshold_pkts, core_rate_bps, edge_rate_bps)
    n_hosts = leaves * hosts_per_leaf
    hosts = [f"h{i}" for i in range(n_hosts)]

    host_up = {}
    host_down = {}
    leaf_up = {}    # (leaf, spine) -> port
    leaf_down = {}  # (spine, leaf) -> port
    for i, h in enumerate(hosts):
        lf = i // hosts_per_leaf
        host_up[h] = net.add_port(f"{h}->leaf{lf}", edge_rate_bps, p1,
                                  HOST_QUEUE_PKTS, lpq_cap_bytes)
        host_down[h] = net.add_port(f"leaf{lf}->{h}", edge_rate_bps, p1,
                                    hpq_cap_pkts, lpq_cap_bytes, edge_thresh)
    for lf in range(leaves):
        for sp in range(spines):
            leaf_up[(lf, sp)] = net.add_port(
                f"leaf{lf}->spine{sp}", core_rate_bps, p2,
                hpq_cap_pkts, lpq_cap_bytes, core_thresh)
            leaf_down[(sp, lf)] = net.add_port(
                f"spine{sp}->leaf{lf}", core_rate_bps, p2,
                hpq_cap_pkts, lpq_cap_bytes, core_thresh)

    routes = {}
    for a in range(n_hosts):
        for b in range(n_hosts):
            if a == b:
                continue
            ha, hb = hosts[a], hosts[b]
            la, lb = a // hosts_per_leaf, b // hosts_per_leaf
            if la == lb:
                ports = (host_up[ha], host_down[hb])
                base = 4 * p1
            else:
                sp = (a + b) % spines
                ports = (host_up[ha], leaf_up[(la, sp)],
                         leaf_down[(sp, lb)], host_down[hb])
                base = 2 * (2 * p1 + 2 * p2)
            routes[(ha, hb)] = Route(ports, base, edge_rate_bps)

    monitored = [p for p in net.ports if not p.startswith("h")]
    return Topology(net, hosts, routes, None, monitored)
