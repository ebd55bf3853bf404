"""Declarative experiment configs and their JSON form.

Field names carry units (_ns, _bytes, _bps) so a config file reads
unambiguously. parse(serialize(cfg)) reproduces cfg exactly; floats
survive because JSON uses repr round-tripping.
"""

import json
from dataclasses import asdict, dataclass, field, fields

PROTOCOLS = ("dwtcp", "dctcp", "newreno")
TOPOLOGY_KINDS = ("dumbbell", "leaf_spine")
WORKLOAD_KINDS = ("long_flows", "burst", "cdf")
SCOUT_SCOPES = ("per_flow", "per_datapath")


class ConfigError(ValueError):
    """Invalid config; the message names the offending field path."""

    def __init__(self, path, problem):
        super().__init__(f"{path}: {problem}")
        self.path = path


@dataclass
class FlowSpec:
    src: str
    dst: str
    start_ns: int = 0
    stop_ns: int = None          # long-lived flow leaves; None = run end
    size_bytes: int = None       # None = unbounded long flow


@dataclass
class TopologyConfig:
    kind: str = "dumbbell"
    # dumbbell
    n_senders: int = 5
    n_receivers: int = 5
    # leaf_spine
    leaves: int = 4
    spines: int = 2
    hosts_per_leaf: int = 4
    edge_rate_bps: int = 10_000_000_000
    core_rate_bps: int = 10_000_000_000
    rtt_ns: int = 100_000
    hpq_cap_pkts: int = 250
    lpq_cap_bytes: int = 640
    ecn_threshold_pkts: int = None    # None = protocol default when needed
    # optional bottleneck rate changes: ((t_ns, rate_bps), ...)
    bottleneck_schedule: tuple = None

    def __post_init__(self):
        if self.bottleneck_schedule is not None:
            self.bottleneck_schedule = tuple(
                (int(t), int(r)) for t, r in self.bottleneck_schedule)


@dataclass
class ProtocolConfig:
    name: str = "dwtcp"
    beta: float = 0.04
    k: int = 100                      # busyness target, packets
    alpha_init: int = 20
    alpha_max: int = 512
    scout_bytes: int = 64
    scout_interval_ns: int = None     # None = base RTT of the path
    scout_scope: str = "per_flow"
    ipg_variant: bool = False
    literal_slowstart: bool = False
    scouts_enabled: bool = True
    seg_bytes: int = 1500
    w_init_bytes: int = 15_000
    min_rto_ns: int = 1_000_000
    dctcp_g: float = 0.0625
    ecn_enabled: bool = None          # None = only for dctcp


@dataclass
class WorkloadConfig:
    kind: str = "long_flows"
    flows: list = field(default_factory=list)     # FlowSpec entries
    # burst
    n_background: int = 2
    n_burst: int = 6
    burst_every_ns: int = 500_000_000
    burst_min_bytes: int = 500_000
    burst_max_bytes: int = 2_000_000
    # cdf
    cdf_file: str = "datamining-like"
    load_fraction: float = 0.6

    def __post_init__(self):
        self.flows = [f if isinstance(f, FlowSpec) else FlowSpec(**f)
                      for f in self.flows]


@dataclass
class SimConfig:
    duration_ns: int = 1_000_000_000
    seed: int = 1
    max_events: int = None
    queue_sample_interval_ns: int = 100_000
    progress_sample_interval_ns: int = 1_000_000
    goodput_window_ns: int = 20_000_000
    log_flow_events: bool = False
    log_scouts: bool = False


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    workload: WorkloadConfig = field(default_factory=WorkloadConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    output_dir: str = "out"


_SECTIONS = {"topology": TopologyConfig, "protocol": ProtocolConfig,
             "workload": WorkloadConfig, "sim": SimConfig}


def _build(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected an object, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"{path}.{key}", "unknown field")
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(path, str(e)) from None


def validate(cfg: ExperimentConfig):
    t, p, w, s = cfg.topology, cfg.protocol, cfg.workload, cfg.sim
    if t.kind not in TOPOLOGY_KINDS:
        raise ConfigError("topology.kind", f"must be one of {TOPOLOGY_KINDS}")
    for fld in ("edge_rate_bps", "core_rate_bps", "rtt_ns", "hpq_cap_pkts",
                "lpq_cap_bytes"):
        if getattr(t, fld) <= 0:
            raise ConfigError(f"topology.{fld}", "must be positive")
    if p.name not in PROTOCOLS:
        raise ConfigError("protocol.name", f"must be one of {PROTOCOLS}")
    if p.scout_scope not in SCOUT_SCOPES:
        raise ConfigError("protocol.scout_scope",
                          f"must be one of {SCOUT_SCOPES}")
    if p.beta <= 0:
        raise ConfigError("protocol.beta", "must be positive")
    if p.alpha_init < 1 or p.alpha_max < p.alpha_init:
        raise ConfigError("protocol.alpha_init",
                          "requires 1 <= alpha_init <= alpha_max")
    if w.kind not in WORKLOAD_KINDS:
        raise ConfigError("workload.kind", f"must be one of {WORKLOAD_KINDS}")
    if w.kind == "long_flows" and not w.flows:
        raise ConfigError("workload.flows", "no flows given")
    if w.kind == "cdf" and not 0.0 < w.load_fraction < 1.0:
        raise ConfigError("workload.load_fraction", "must be in (0,1)")
    for i, f in enumerate(w.flows):
        if f.src == f.dst:
            raise ConfigError(f"workload.flows[{i}]", "src equals dst")
    if s.duration_ns <= 0:
        raise ConfigError("sim.duration_ns", "must be positive")
    return cfg


def serialize(cfg: ExperimentConfig) -> str:
    return json.dumps(asdict(cfg), indent=2)


def parse(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("<json>", str(e)) from None
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")
    kwargs = {}
    for key, val in data.items():
        if key in _SECTIONS:
            kwargs[key] = _build(_SECTIONS[key], val, key)
        elif key in ("name", "output_dir"):
            kwargs[key] = val
        else:
            raise ConfigError(key, "unknown field")
    return validate(ExperimentConfig(**kwargs))


def load(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse(fh.read())


def save(cfg: ExperimentConfig, path):
    with open(path, "w") as fh:
        fh.write(serialize(cfg))
        fh.write("\n")
