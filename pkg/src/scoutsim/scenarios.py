"""Named experiment builders and the special measurement campaigns.

Config scenarios return an ExperimentConfig ready for run_experiment;
special scenarios run several internally-built simulations and return a
row table instead (they still honor the deterministic-rerun rule).
"""

import csv
import os

from .config import (ExperimentConfig, FlowSpec, ProtocolConfig, SimConfig,
                     TopologyConfig, WorkloadConfig)
from .engine import Engine
from .metrics import percentile
from .packet import HIGH, LOW
from .runner import run_experiment
from .scout import ScoutChannel
from .topology import Network, build_dumbbell
from .transport import compute_d_t
from .units import ns_to_ticks, ticks_to_ns
from .workload import PoissonPacketSource, RampPacketSource, Sink

GBPS = 1_000_000_000
MS = 1_000_000
S = 1_000_000_000


def _pair_flows(n, start_gap_ns=0, stop_after_ns=None):
    flows = []
    for i in range(n):
        start = i * start_gap_ns
        stop = None if stop_after_ns is None else start + stop_after_ns
        flows.append(FlowSpec(f"s{i}", f"r{i}", start, stop))
    return flows


def five_flows_sequence(protocol="dwtcp", seed=1):
    """Five long flows share one 10 Gb/s bottleneck, joining 1 s apart
    and leaving in arrival order 1 s apart."""
    return ExperimentConfig(
        name=f"five-flows-{protocol}",
        topology=TopologyConfig(kind="dumbbell", n_senders=5, n_receivers=5),
        protocol=ProtocolConfig(name=protocol),
        workload=WorkloadConfig(
            kind="long_flows",
            flows=_pair_flows(5, start_gap_ns=1 * S, stop_after_ns=5 * S)),
        sim=SimConfig(duration_ns=10 * S, seed=seed),
    )


def burst_fct(protocol="dwtcp", seed=1):
    """Two background flows plus six clients bursting 0.5-2 MB at one
    receiver every 500 ms."""
    return ExperimentConfig(
        name=f"burst-fct-{protocol}",
        topology=TopologyConfig(kind="dumbbell", n_senders=8, n_receivers=1),
        protocol=ProtocolConfig(name=protocol),
        workload=WorkloadConfig(kind="burst", n_background=2, n_burst=6),
        sim=SimConfig(duration_ns=2_250 * MS, seed=seed),
    )


def varying_bw(protocol="dwtcp", seed=1):
    """Bottleneck rate steps through [0.4, 0.7, 1, 10, 0.8] Gb/s every
    100 ms under five long flows."""
    steps = ((0, int(0.4 * GBPS)), (100 * MS, int(0.7 * GBPS)),
             (200 * MS, 1 * GBPS), (300 * MS, 10 * GBPS),
             (400 * MS, int(0.8 * GBPS)))
    return ExperimentConfig(
        name=f"varying-bw-{protocol}",
        topology=TopologyConfig(kind="dumbbell", n_senders=5, n_receivers=5,
                                core_rate_bps=int(0.4 * GBPS),
                                bottleneck_schedule=steps),
        protocol=ProtocolConfig(name=protocol),
        workload=WorkloadConfig(kind="long_flows", flows=_pair_flows(5)),
        sim=SimConfig(duration_ns=500 * MS, seed=seed),
    )


def varying_senders(protocol="dwtcp", n=10, seed=1):
    """n long flows over one bottleneck; rerun with n in {10, 20, 30}."""
    n = int(n)
    return ExperimentConfig(
        name=f"senders-{n}-{protocol}",
        topology=TopologyConfig(kind="dumbbell", n_senders=n, n_receivers=n),
        protocol=ProtocolConfig(name=protocol),
        workload=WorkloadConfig(kind="long_flows", flows=_pair_flows(n)),
        sim=SimConfig(duration_ns=2 * S, seed=seed),
    )


def long_haul(protocol="dwtcp", seed=1):
    """Wide-area case: 1 Gb/s bottleneck, 6 ms base RTT."""
    return ExperimentConfig(
        name=f"long-haul-{protocol}",
        topology=TopologyConfig(kind="dumbbell", n_senders=5, n_receivers=5,
                                core_rate_bps=1 * GBPS, rtt_ns=6 * MS),
        protocol=ProtocolConfig(name=protocol),
        workload=WorkloadConfig(kind="long_flows", flows=_pair_flows(5)),
        sim=SimConfig(duration_ns=12 * S, seed=seed),
    )


def benchmark(protocol="dwtcp", load=0.6, cdf="datamining-like", seed=1):
    """Leaf-spine fabric under an empirical flow mix at a target load."""
    return ExperimentConfig(
        name=f"benchmark-{protocol}-{cdf}-{int(float(load) * 100)}",
        topology=TopologyConfig(kind="leaf_spine", core_rate_bps=40 * GBPS),
        protocol=ProtocolConfig(name=protocol),
        workload=WorkloadConfig(kind="cdf", cdf_file=cdf,
                                load_fraction=float(load)),
        sim=SimConfig(duration_ns=300 * MS, seed=seed),
    )


CONFIG_SCENARIOS = {
    "five-flows-sequence": five_flows_sequence,
    "burst-fct": burst_fct,
    "varying-bw": varying_bw,
    "varying-senders": varying_senders,
    "long-haul": long_haul,
    "benchmark": benchmark,
}


# --- special campaigns ----------------------------------------------------

def _probe_rig(rate_bps, rtt_ns, k=100, seg=1500, probe=64):
    """One-sender dumbbell with a standalone probe channel and a sink.

    The edge runs 10x faster than the core so host NIC serialization
    stays transparent and all contention lands on the core port.
    """
    eng = Engine()
    net = Network(eng)
    topo = build_dumbbell(net, 1, 1, 10 * rate_bps, rate_bps, rtt_ns)
    route = topo.route("s0", "r0")
    rev = topo.route("r0", "s0")
    d_t = int(round(compute_d_t(rtt_ns, k, seg, rate_bps) * 1000))
    ch = ScoutChannel(net, "probe", route.ports, rev.ports, probe,
                      route.base_rtt, d_t, standalone=True,
                      collect_rtts=True)
    net.flow_rx[0] = Sink()
    return eng, net, topo, route, ch


def amplification(utilizations=(0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 0.995),
                  rate_bps=1 * GBPS, rtt_ns=100_000, duration_ns=500 * MS,
                  seed=1):
    """Strict-priority delay amplification: fixed-rate high-priority
    cross traffic at each utilization, probes riding the low queue.

    Rows: utilization, one-way HPQ/LPQ queueing waits at the bottleneck,
    their ratio, the mean probe RTT, and tau over that RTT.
    """
    rows = []
    tau_ns = float(rtt_ns)
    for u in utilizations:
        eng, net, topo, route, ch = _probe_rig(rate_bps, rtt_ns)
        src = PoissonPacketSource(net, 0, route.ports, u, rate_bps, seed)
        src.start()
        ch.start()
        eng.run_until(ns_to_ticks(duration_ns))
        port = net.ports[topo.bottleneck_port]
        hq = ticks_to_ns(port.mean_wait_ticks(HIGH))
        lq = ticks_to_ns(port.mean_wait_ticks(LOW))
        mean_rtt = sum(ch.rtts) / len(ch.rtts) if ch.rtts else None
        rows.append({
            "utilization": u,
            "hpq_wait_ns": hq,
            "lpq_wait_ns": lq,
            "wait_ratio": lq / hq if hq else float("inf"),
            "mean_scout_rtt_ns": None if mean_rtt is None
            else ticks_to_ns(mean_rtt),
            "tau_over_ds": None if mean_rtt is None
            else tau_ns / ticks_to_ns(mean_rtt),
            "scouts_lost": ch.lost,
        })
    return rows


def early_loss(ramp_rates_bps_per_s=(1e8, 1e9, 1e10), rate_bps=1 * GBPS,
               rtt_ns=100_000, seed=1):
    """Ramp offered load through saturation; record when the probe
    channel first declares a loss versus when the HPQ first tail-drops.

    Rows: ramp rate, both first-event times, and the lead in RTTs.
    """
    rows = []
    for r in ramp_rates_bps_per_s:
        eng, net, topo, route, ch = _probe_rig(rate_bps, rtt_ns)
        net.scout_log = []
        span_s = 0.2 * rate_bps / r
        t1 = ns_to_ticks(int(span_s * 1e9))
        src = RampPacketSource(net, 0, route.ports, int(0.9 * rate_bps),
                               int(1.1 * rate_bps), 0, t1)
        src.start()
        ch.start()
        eng.run_until(t1 + ns_to_ticks(500 * MS))
        first_loss = next((t for t, _, ev, _, _ in net.scout_log
                           if ev == "lost"), None)
        first_drop = next((t for t, _, prio in net.drop_log
                           if prio == HIGH), None)
        lead = None
        if first_loss is not None and first_drop is not None:
            lead = first_drop - first_loss
        rows.append({
            "ramp_bps_per_s": r,
            "first_scout_loss_ns": None if first_loss is None
            else ticks_to_ns(first_loss),
            "first_hpq_drop_ns": None if first_drop is None
            else ticks_to_ns(first_drop),
            "lead_rtts": None if lead is None
            else lead / ns_to_ticks(rtt_ns),
        })
    return rows


def _sweep(param_values, tweak, protocol="dwtcp", duration_ns=300 * MS,
           seed=1):
    rows = []
    for v in param_values:
        cfg = ExperimentConfig(
            name=f"sweep-{v}",
            topology=TopologyConfig(kind="dumbbell", n_senders=5,
                                    n_receivers=5),
            protocol=ProtocolConfig(name=protocol),
            workload=WorkloadConfig(kind="long_flows",
                                    flows=_pair_flows(5)),
            sim=SimConfig(duration_ns=duration_ns, seed=seed),
        )
        tweak(cfg, v)
        res = run_experiment(cfg)
        s = res.summary
        rows.append({
            "value": v,
            "mean_hpq_pkts": s["bottleneck"]["mean_hpq_pkts"],
            "goodput_bps": s["goodput_bps"],
            "jain_final": s["jain_final"],
            "scout_overhead": s["bottleneck"]["scout_overhead"],
            "drops_high": s["drops"]["high"],
        })
    return rows


def alpha_sweep(values=(1, 8, 20, 64, 256), **kw):
    def tweak(cfg, v):
        cfg.protocol.alpha_init = int(v)
    return _sweep(values, tweak, **kw)


def beta_sweep(values=(0.001, 0.01, 0.0625, 0.125, 0.25), **kw):
    def tweak(cfg, v):
        cfg.protocol.beta = float(v)
    return _sweep(values, tweak, **kw)


def injection_sweep(values=(0.5, 1.0, 2.0, 4.0), **kw):
    """Probe pacing interval as a multiple of the base RTT."""
    def tweak(cfg, v):
        cfg.protocol.scout_interval_ns = int(v * cfg.topology.rtt_ns)
    return _sweep(values, tweak, **kw)


SPECIAL_SCENARIOS = {
    "amplification": amplification,
    "early-loss": early_loss,
    "alpha-sweep": alpha_sweep,
    "beta-sweep": beta_sweep,
    "injection-sweep": injection_sweep,
}


def write_rows_csv(rows, path):
    if not rows:
        return
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        out = csv.DictWriter(fh, fieldnames=list(rows[0]))
        out.writeheader()
        out.writerows(rows)
