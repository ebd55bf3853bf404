"""Config schema: round-trips, validation diagnostics, shipped defaults."""

import pytest

from scoutsim.config import (ConfigError, ExperimentConfig, FlowSpec,
                             ProtocolConfig, SimConfig, TopologyConfig,
                             WorkloadConfig, load, parse, save, serialize,
                             validate)


def test_serialize_parse_round_trip():
    cfg = ExperimentConfig(
        name="rt",
        topology=TopologyConfig(kind="dumbbell", n_senders=3, n_receivers=3),
        protocol=ProtocolConfig(name="dctcp", ecn_enabled=True),
        workload=WorkloadConfig(kind="long_flows", flows=[
            FlowSpec(src="s0", dst="r0", start_ns=5, size_bytes=10_000),
            FlowSpec(src="s1", dst="r1", stop_ns=9),
        ]),
        sim=SimConfig(duration_ns=50_000_000, seed=7),
    )
    assert parse(serialize(cfg)) == cfg


def test_file_round_trip(tmp_path):
    cfg = ExperimentConfig(name="disk")
    cfg.workload.flows = [FlowSpec(src="s0", dst="r0")]
    p = tmp_path / "cfg.json"
    save(cfg, p)
    assert load(p) == cfg


def test_unknown_field_names_path():
    with pytest.raises(ConfigError) as e:
        parse('{"protocol": {"bogus": 1}}')
    assert e.value.path == "protocol.bogus"
    assert "unknown" in str(e.value)


def test_unknown_top_level_field():
    with pytest.raises(ConfigError) as e:
        parse('{"nonsense": {}}')
    assert e.value.path == "nonsense"


def test_malformed_json_reported():
    with pytest.raises(ConfigError):
        parse("{not json")
    with pytest.raises(ConfigError):
        parse("[1, 2]")


def test_validation_diagnostics():
    with pytest.raises(ConfigError) as e:
        parse('{"protocol": {"name": "cubic"}}')
    assert e.value.path == "protocol.name"

    with pytest.raises(ConfigError) as e:
        parse('{"workload": {"kind": "cdf"}, "sim": {"duration_ns": 0}}')
    assert e.value.path == "sim.duration_ns"

    with pytest.raises(ConfigError) as e:
        parse('{"topology": {"rtt_ns": -5}}')
    assert e.value.path == "topology.rtt_ns"

    with pytest.raises(ConfigError) as e:
        parse('{"workload": {"kind": "cdf", "load_fraction": 1.5}}')
    assert e.value.path == "workload.load_fraction"


def test_long_flows_need_flows():
    cfg = ExperimentConfig()
    with pytest.raises(ConfigError) as e:
        validate(cfg)
    assert e.value.path == "workload.flows"


def test_self_flow_rejected():
    cfg = ExperimentConfig()
    cfg.workload.flows = [FlowSpec(src="s0", dst="s0")]
    with pytest.raises(ConfigError) as e:
        validate(cfg)
    assert "src equals dst" in str(e.value)


def test_alpha_ordering_enforced():
    cfg = ExperimentConfig()
    cfg.workload.flows = [FlowSpec(src="s0", dst="r0")]
    cfg.protocol.alpha_init = 600
    cfg.protocol.alpha_max = 512
    with pytest.raises(ConfigError):
        validate(cfg)


def test_flow_specs_accept_dicts():
    w = WorkloadConfig(flows=[{"src": "s0", "dst": "r0", "size_bytes": 99}])
    assert w.flows == [FlowSpec(src="s0", dst="r0", size_bytes=99)]


def test_shipped_protocol_defaults():
    """Documented defaults: probe budget alpha in [20, 512], 64 B probes,
    100-pkt busyness target, 1500 B segments, 10-pkt initial window.

    beta ships at 0.04, the segment-unit setting that balances the
    decrease step against the grant rate at this scale."""
    p = ProtocolConfig()
    assert p.name == "dwtcp"
    assert p.k == 100
    assert p.alpha_init == 20
    assert p.alpha_max == 512
    assert p.scout_bytes == 64
    assert p.seg_bytes == 1500
    assert p.w_init_bytes == 15_000
    assert p.beta == 0.04
    assert p.dctcp_g == 0.0625
    assert p.scout_scope == "per_flow"
    assert p.scouts_enabled


def test_shipped_topology_defaults():
    t = TopologyConfig()
    assert t.kind == "dumbbell"
    assert t.edge_rate_bps == 10_000_000_000
    assert t.rtt_ns == 100_000
    assert t.hpq_cap_pkts == 250
    assert t.lpq_cap_bytes == 640


def test_shipped_sim_defaults():
    s = SimConfig()
    assert s.duration_ns == 1_000_000_000
    assert s.seed == 1
    assert s.goodput_window_ns == 20_000_000
    assert not s.log_flow_events
