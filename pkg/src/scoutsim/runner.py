"""Experiment execution: config in, simulation objects out, CSVs down.

One Runner owns one engine, one network, and every flow of a single
(config, seed) run. Nothing here touches wall-clock time, so rerunning a
config reproduces every artifact byte for byte.
"""

import json
import os
import random
import zlib
from dataclasses import dataclass, field

from .config import ExperimentConfig, validate
from .engine import Engine
from .metrics import (FlowProgressSampler, FlowRecord, PortAccumulatorSampler,
                      QueueSampler, jain_index, percentile, slowdown,
                      write_drops_csv, write_fairness_csv,
                      write_flow_events_csv, write_flows_csv,
                      write_goodput_csv, write_queue_csv,
                      write_scout_trace_csv)
from .scout import PER_DATAPATH, PER_FLOW, ScoutChannel, is_scout_eligible, \
    overhead_ratio
from .topology import Network, build_dumbbell, build_leaf_spine
from .transport import DctcpSender, DwtcpSender, NewRenoSender, Receiver, \
    compute_d_t
from .units import SEC, ns_to_ticks, ticks_to_ns
from .workload import FlowSizeCdf, generate_flows

OUTPUT_ROOT_ENV = "SCOUTSIM_OUTPUT_ROOT"

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
BUNDLED_CDFS = {
    "datamining-like": os.path.join(DATA_DIR, "datamining_like.txt"),
    "websearch-like": os.path.join(DATA_DIR, "websearch_like.txt"),
}

_SENDERS = {"newreno": NewRenoSender, "dctcp": DctcpSender,
            "dwtcp": DwtcpSender}


def resolve_cdf(name_or_path) -> FlowSizeCdf:
    return FlowSizeCdf.load(BUNDLED_CDFS.get(name_or_path, name_or_path))


def resolve_output_dir(cfg: ExperimentConfig, out_dir=None) -> str:
    if out_dir is not None:
        return out_dir
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root:
        return os.path.join(root, cfg.output_dir, cfg.name)
    return os.path.join(cfg.output_dir, cfg.name)


@dataclass
class _Plan:
    fid: int
    src: str
    dst: str
    start: int               # ticks
    stop: int = None
    size: int = None


@dataclass
class RunResult:
    cfg: ExperimentConfig
    eng: Engine
    net: Network
    topo: object
    senders: dict
    channels: dict
    records: list = field(default_factory=list)
    slowdowns: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    progress: FlowProgressSampler = None
    queues: QueueSampler = None
    bneck_acc: PortAccumulatorSampler = None
    aborted: bool = False
    out_dir: str = None


def _endpoints(topo, kind):
    if kind == "dumbbell":
        src = [h for h in topo.hosts if h.startswith("s")]
        dst = [h for h in topo.hosts if h.startswith("r")]
        return src, dst
    return list(topo.hosts), list(topo.hosts)


def _plan_workload(cfg, topo) -> list:
    w, sim = cfg.workload, cfg.sim
    dur = ns_to_ticks(sim.duration_ns)
    plans = []
    if w.kind == "long_flows":
        for i, f in enumerate(w.flows):
            plans.append(_Plan(i, f.src, f.dst, ns_to_ticks(f.start_ns),
                               None if f.stop_ns is None else ns_to_ticks(f.stop_ns),
                               f.size_bytes))
        return plans
    sources, sinks = _endpoints(topo, cfg.topology.kind)
    if w.kind == "burst":
        client = sinks[-1]
        sources = [h for h in sources if h != client]
        fid = 0
        for i in range(w.n_background):
            plans.append(_Plan(fid, sources[i % len(sources)], client, 0))
            fid += 1
        rng = random.Random(sim.seed)
        t = ns_to_ticks(w.burst_every_ns)
        while t < dur:
            for j in range(w.n_burst):
                src = sources[(w.n_background + j) % len(sources)]
                size = rng.randint(w.burst_min_bytes, w.burst_max_bytes)
                plans.append(_Plan(fid, src, client, t, None, size))
                fid += 1
            t += ns_to_ticks(w.burst_every_ns)
        return plans
    # cdf: all-to-all with Poisson arrivals
    cdf = resolve_cdf(w.cdf_file)
    if cfg.topology.kind == "leaf_spine":
        capacity = cfg.topology.edge_rate_bps * len(sources)
    else:
        capacity = min(cfg.topology.edge_rate_bps, cfg.topology.core_rate_bps)
    arrivals = generate_flows(cdf, sources, w.load_fraction, capacity,
                              sim.seed, sim.duration_ns / 1e9)
    for fid, (t_s, size, src, dst) in enumerate(arrivals):
        plans.append(_Plan(fid, src, dst, int(round(t_s * SEC)), None, size))
    return plans


class Runner:
    def __init__(self, cfg: ExperimentConfig):
        validate(cfg)
        self.cfg = cfg
        self.eng = Engine(max_events=cfg.sim.max_events)
        self.net = Network(self.eng)
        if cfg.sim.log_flow_events:
            self.net.flow_log = []
        if cfg.sim.log_scouts:
            self.net.scout_log = []
        self.topo = self._build_topology()
        self.senders = {}
        self.receivers = {}
        self.channels = {}
        self._flow_path = {}     # fid -> (base_rtt_ticks, bottleneck_bps)
        self.plans = _plan_workload(cfg, self.topo)
        for plan in self.plans:
            self._wire_flow(plan)
        self._start_collectors()

    # --- construction ---------------------------------------------------

    def _build_topology(self):
        t, p = self.cfg.topology, self.cfg.protocol
        ecn_on = p.ecn_enabled if p.ecn_enabled is not None \
            else p.name == "dctcp"
        thresh = None
        if ecn_on:
            thresh = t.ecn_threshold_pkts if t.ecn_threshold_pkts is not None \
                else 65
        if t.kind == "dumbbell":
            topo = build_dumbbell(self.net, t.n_senders, t.n_receivers,
                                  t.edge_rate_bps, t.core_rate_bps, t.rtt_ns,
                                  t.hpq_cap_pkts, t.lpq_cap_bytes, thresh)
        else:
            topo = build_leaf_spine(self.net, t.leaves, t.spines,
                                    t.hosts_per_leaf, t.edge_rate_bps,
                                    t.core_rate_bps, t.rtt_ns,
                                    t.hpq_cap_pkts, t.lpq_cap_bytes, thresh)
        if t.bottleneck_schedule:
            fwd = self.net.ports[topo.bottleneck_port]
            a, b = topo.bottleneck_port.split("->")
            rev = self.net.ports.get(f"{b}->{a}")
            for t_ns, rate in t.bottleneck_schedule:
                self.eng.schedule(ns_to_ticks(t_ns), self._set_rate,
                                  (fwd, rev, int(rate)))
        return topo

    @staticmethod
    def _set_rate(arg):
        fwd, rev, rate = arg
        fwd.rate_bps = rate
        if rev is not None:
            rev.rate_bps = rate

    def _probe_target_rate(self, route) -> int:
        """d_t is pinned to the path's nominal (maximum) service rate."""
        rate = route.bottleneck_bps
        sched = self.cfg.topology.bottleneck_schedule
        if sched:
            rate = max([rate] + [r for _, r in sched])
        return rate

    def _wire_flow(self, plan: _Plan):
        p = self.cfg.protocol
        route = self.topo.route(plan.src, plan.dst)
        rev = self.topo.route(plan.dst, plan.src)
        self._flow_path[plan.fid] = (route.base_rtt, route.bottleneck_bps)
        kwargs = dict(size_bytes=plan.size,
                      min_rto_ticks=ns_to_ticks(p.min_rto_ns),
                      literal_slowstart=p.literal_slowstart)
        if p.name == "dwtcp":
            rate = self._probe_target_rate(route)
            d_t_ticks = int(round(compute_d_t(
                ticks_to_ns(route.base_rtt), p.k, p.seg_bytes, rate) * 1000))
            kwargs.update(beta=p.beta, alpha_init=p.alpha_init,
                          alpha_max=p.alpha_max, probe_bytes=p.scout_bytes,
                          base_rtt_ticks=route.base_rtt, d_t_ticks=d_t_ticks)
        elif p.name == "dctcp":
            kwargs.update(g=p.dctcp_g)
        sender = _SENDERS[p.name](self.net, plan.fid, route.ports,
                                  p.seg_bytes, p.w_init_bytes, **kwargs)
        receiver = Receiver(self.net, plan.fid, rev.ports)
        self.net.flow_tx[plan.fid] = sender
        self.net.flow_rx[plan.fid] = receiver
        self.senders[plan.fid] = sender
        self.receivers[plan.fid] = receiver

        channel = None
        if p.name == "dwtcp" and p.scouts_enabled \
                and is_scout_eligible(plan.size, p.w_init_bytes):
            interval = ns_to_ticks(p.scout_interval_ns) \
                if p.scout_interval_ns is not None else route.base_rtt
            if p.scout_scope == "per_datapath":
                key = (plan.src, plan.dst)
                channel = self.channels.get(key)
                if channel is None:
                    channel = ScoutChannel(
                        self.net, f"scout:{plan.src}->{plan.dst}",
                        route.ports, rev.ports, p.scout_bytes, interval,
                        sender.d_t_ticks, scope=PER_DATAPATH,
                        alpha_init=p.alpha_init, alpha_max=p.alpha_max,
                        ipg_variant=p.ipg_variant,
                        pace_seed=self._pace_seed(plan.src, plan.dst))
                    self.channels[key] = channel
            else:
                channel = ScoutChannel(
                    self.net, f"scout-f{plan.fid}", route.ports, rev.ports,
                    p.scout_bytes, interval, sender.d_t_ticks,
                    scope=PER_FLOW, ipg_variant=p.ipg_variant,
                    pace_seed=self._pace_seed(plan.fid))
                self.channels[plan.fid] = channel
            sender.on_finish = self._make_finish(channel)

        self.eng.schedule(plan.start, self._start_flow, (sender, channel))
        if plan.stop is not None:
            self.eng.schedule(plan.stop, self._stop_flow, (sender, channel))

    def _pace_seed(self, *key):
        text = "|".join(str(k) for k in key)
        return (self.cfg.sim.seed << 32) ^ zlib.crc32(text.encode())

    @staticmethod
    def _make_finish(channel):
        def fin(sender):
            channel.deregister(sender)
        return fin

    @staticmethod
    def _start_flow(arg):
        sender, channel = arg
        sender.start()
        if channel is not None:
            channel.register(sender)

    @staticmethod
    def _stop_flow(arg):
        sender, channel = arg
        sender.stop()
        if channel is not None:
            channel.deregister(sender)

    def _start_collectors(self):
        sim = self.cfg.sim
        ports = [self.net.ports[n] for n in self.topo.monitored_ports]
        self.queues = QueueSampler(self.eng, ports,
                                   ns_to_ticks(sim.queue_sample_interval_ns))
        self.queues.start()
        self.bneck_acc = None
        if self.topo.bottleneck_port is not None:
            self.bneck_acc = PortAccumulatorSampler(
                self.eng, self.net.ports[self.topo.bottleneck_port],
                ns_to_ticks(sim.progress_sample_interval_ns))
            self.bneck_acc.start()
        self.progress = None
        if self.cfg.workload.kind != "cdf":
            order = sorted(self.senders)
            self.progress = FlowProgressSampler(
                self.eng, [self.senders[f] for f in order],
                ns_to_ticks(sim.progress_sample_interval_ns))
            self.progress.start()

    # --- execution --------------------------------------------------------

    def run(self) -> RunResult:
        dur = ns_to_ticks(self.cfg.sim.duration_ns)
        ok = self.eng.run_until(dur)
        res = RunResult(self.cfg, self.eng, self.net, self.topo,
                        self.senders, self.channels, progress=self.progress,
                        queues=self.queues, bneck_acc=self.bneck_acc,
                        aborted=not ok)
        self._collect(res)
        return res

    def _collect(self, res: RunResult):
        for fid in sorted(self.senders):
            s = self.senders[fid]
            if s.start_ts is None:
                continue
            size = s.size if s.sized_or_stopped() else s.snd_una
            rec = FlowRecord(fid, size, s.start_ts, s.finish_ts, s.timeouts)
            res.records.append(rec)
            if s.finish_ts is not None and s.finish_ts > s.start_ts:
                rtt, bw = self._flow_path[fid]
                res.slowdowns.append(slowdown(rec, rtt, bw))
            else:
                res.slowdowns.append(None)
        res.summary = self._summarize(res)

    def _summarize(self, res: RunResult) -> dict:
        cfg = self.cfg
        bneck = None
        if self.topo.bottleneck_port is not None:
            bneck = self.net.ports[self.topo.bottleneck_port]
        done = [sd for sd in res.slowdowns if sd is not None]
        total_acked = sum(s.snd_una for s in self.senders.values())
        dur_s = cfg.sim.duration_ns / 1e9
        jain_final = None
        if self.progress is not None:
            series = self.progress.jain_series(
                5 * ns_to_ticks(cfg.sim.progress_sample_interval_ns))
            if series:
                jain_final = series[-1][1]
        scouts = {"sent": 0, "acked": 0, "lost": 0, "late": 0}
        for ch in self.net.channels.values():
            scouts["sent"] += ch.sent
            scouts["acked"] += ch.acked
            scouts["lost"] += ch.lost
            scouts["late"] += ch.late
        summary = {
            "name": cfg.name,
            "protocol": cfg.protocol.name,
            "seed": cfg.sim.seed,
            "duration_ns": cfg.sim.duration_ns,
            "events": self.eng.events_processed,
            "aborted": res.aborted,
            "bottleneck": None if bneck is None else {
                "port": self.topo.bottleneck_port,
                "mean_hpq_pkts": bneck.mean_hpq_pkts(),
                "mean_lpq_bytes": bneck.mean_lpq_bytes(),
                "hpq_max_pkts": bneck.hpq_max,
                "data_bytes": bneck.data_bytes_tx,
                "scout_bytes": bneck.scout_bytes_tx,
                "scout_overhead": overhead_ratio(bneck),
                "drops_high": bneck.drop_high,
                "drops_low": bneck.drop_low,
            },
            "drops": {"high": self.net.drops_high, "low": self.net.drops_low},
            "flows": {
                "planned": len(self.plans),
                "started": len(res.records),
                "completed": len(done),
                "timeouts": sum(r.timeouts for r in res.records),
                "mean_slowdown": sum(done) / len(done) if done else None,
                "p50_slowdown": percentile(done, 50) if done else None,
                "p99_slowdown": percentile(done, 99) if done else None,
            },
            "goodput_bps": 8.0 * total_acked / dur_s,
            "jain_final": jain_final,
            "scouts": scouts,
        }
        return summary

    # --- artifacts ----------------------------------------------------------

    def write_artifacts(self, res: RunResult, out_dir, summary_only=False):
        os.makedirs(out_dir, exist_ok=True)
        res.out_dir = out_dir
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(res.summary, fh, indent=2)
            fh.write("\n")
        if summary_only:
            return
        write_queue_csv(self.queues.rows, os.path.join(out_dir, "queues.csv"))
        write_drops_csv(self.net.drop_log, os.path.join(out_dir, "drops.csv"))
        write_flows_csv(res.records, res.slowdowns,
                        os.path.join(out_dir, "flows.csv"))
        window = ns_to_ticks(self.cfg.sim.goodput_window_ns)
        series = {}
        if self.progress is not None:
            order = sorted(self.senders)
            for i, fid in enumerate(order):
                series[f"flow{fid}"] = self.progress.goodput_series(i, window)
            fairness = self.progress.jain_series(
                5 * ns_to_ticks(self.cfg.sim.progress_sample_interval_ns))
            write_fairness_csv(fairness,
                               os.path.join(out_dir, "fairness.csv"))
        if self.bneck_acc is not None:
            series["bottleneck"] = self._bottleneck_goodput(window)
        if series:
            write_goodput_csv(series, os.path.join(out_dir, "goodput.csv"))
        if self.net.flow_log is not None:
            write_flow_events_csv(self.net.flow_log,
                                  os.path.join(out_dir, "flow_events.csv"))
        if self.net.scout_log is not None:
            write_scout_trace_csv(self.net.scout_log,
                                  os.path.join(out_dir, "scout_trace.csv"))

    def _bottleneck_goodput(self, window_ticks):
        rows = self.bneck_acc.rows
        if len(rows) < 2:
            return []
        stride = max(1, int(round(window_ticks / self.bneck_acc.interval)))
        out = []
        for i in range(stride, len(rows), stride):
            t0, b0 = rows[i - stride][0], rows[i - stride][3]
            t1, b1 = rows[i][0], rows[i][3]
            out.append((t1, (b1 - b0) * 8.0 * SEC / (t1 - t0)))
        return out


def run_experiment(cfg: ExperimentConfig, out_dir=None, write=False,
                   summary_only=False) -> RunResult:
    runner = Runner(cfg)
    res = runner.run()
    if write or out_dir is not None:
        runner.write_artifacts(res, resolve_output_dir(cfg, out_dir),
                               summary_only)
    return res
