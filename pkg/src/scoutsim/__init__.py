"""Discrete-event model of strict-priority datacenter fabrics with a
low-priority probing service driving window-based congestion control,
plus a fluid-model stability analyzer for the probe-driven decrease law.
"""

from .config import (ConfigError, ExperimentConfig, FlowSpec, ProtocolConfig,
                     SimConfig, TopologyConfig, WorkloadConfig, parse,
                     serialize)
from .engine import Engine
from .fluid import (FluidDivergenceError, FluidParams, FluidTrajectory,
                    classify, eigenvalues, fluid_step, integrate,
                    stability_bound, suggested_beta)
from .metrics import (FlowRecord, jain_index, percentile, slowdown)
from .packet import Packet
from .port import PriorityPort
from .runner import RunResult, Runner, run_experiment
from .scout import ScoutChannel, is_scout_eligible, overhead_ratio
from .topology import Network, Topology, build_dumbbell, build_leaf_spine
from .transport import (DctcpSender, DwtcpSender, NewRenoSender, Receiver,
                        compute_d_s, compute_d_t, decrease_factor,
                        decrease_factor_ipg)
from .workload import FlowSizeCdf, poisson_arrivals, sample_flow_size

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DctcpSender", "DwtcpSender", "Engine", "ExperimentConfig",
    "FlowRecord", "FlowSizeCdf", "FlowSpec", "FluidDivergenceError",
    "FluidParams", "FluidTrajectory", "Network", "NewRenoSender", "Packet",
    "PriorityPort", "ProtocolConfig", "Receiver", "RunResult", "Runner",
    "ScoutChannel", "SimConfig", "Topology", "TopologyConfig",
    "WorkloadConfig", "build_dumbbell", "build_leaf_spine", "classify",
    "compute_d_s", "compute_d_t", "decrease_factor", "decrease_factor_ipg",
    "eigenvalues", "fluid_step", "integrate", "is_scout_eligible",
    "jain_index", "overhead_ratio", "parse", "percentile",
    "poisson_arrivals", "run_experiment", "sample_flow_size", "serialize",
    "slowdown", "stability_bound", "suggested_beta",
]
