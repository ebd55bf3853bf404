"""Command-line front end.

Subcommands:
  run <config.json>            execute one experiment config
  scenario <name> [k=v ...]    execute a named builtin experiment
  fluid trajectory|sweep ...   ODE-model trajectories and stability sweeps

Exit codes: 0 success, 2 invalid config/arguments, 3 runtime divergence
(event budget exhausted or a nonfinite ODE state).
"""

import argparse
import json
import os
import sys

from . import fluid
from .config import ConfigError, load
from .runner import run_experiment
from .scenarios import CONFIG_SCENARIOS, SPECIAL_SCENARIOS, write_rows_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def _parse_overrides(pairs):
    flat, dotted = {}, {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(pair, "override must look like key=value")
        key, raw = pair.split("=", 1)
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        (dotted if "." in key else flat)[key] = val
    return flat, dotted


def _apply_dotted(cfg, dotted):
    for path, val in dotted.items():
        obj = cfg
        parts = path.split(".")
        for part in parts[:-1]:
            if not hasattr(obj, part):
                raise ConfigError(path, "unknown config section")
            obj = getattr(obj, part)
        if not hasattr(obj, parts[-1]):
            raise ConfigError(path, "unknown config field")
        setattr(obj, parts[-1], val)


def _finish_run(res):
    print(json.dumps(res.summary, indent=2))
    if res.aborted:
        print("event budget exhausted; artifacts flagged aborted",
              file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def _cmd_run(args):
    cfg = load(args.config)
    res = run_experiment(cfg, out_dir=args.output_dir, write=True,
                         summary_only=args.summary_only)
    return _finish_run(res)


def _cmd_scenario(args):
    name = args.name
    if name == "list":
        for n in sorted(list(CONFIG_SCENARIOS) + list(SPECIAL_SCENARIOS)):
            print(n)
        return EXIT_OK
    flat, dotted = _parse_overrides(args.overrides)
    if name in CONFIG_SCENARIOS:
        cfg = CONFIG_SCENARIOS[name](**flat)
        _apply_dotted(cfg, dotted)
        res = run_experiment(cfg, out_dir=args.output_dir, write=True,
                             summary_only=args.summary_only)
        return _finish_run(res)
    if name in SPECIAL_SCENARIOS:
        if dotted:
            raise ConfigError(next(iter(dotted)),
                              "special scenarios take flat key=value only")
        rows = SPECIAL_SCENARIOS[name](**flat)
        out_dir = args.output_dir or os.path.join(
            os.environ.get("SCOUTSIM_OUTPUT_ROOT", "out"), name)
        write_rows_csv(rows, os.path.join(out_dir, f"{name}.csv"))
        print(json.dumps(rows, indent=2))
        return EXIT_OK
    raise ConfigError("scenario", f"unknown scenario {name!r}; "
                      f"try 'scoutsim scenario list'")


def _fluid_params(args, k_bar=None):
    return fluid.FluidParams(beta=args.beta, tau=args.tau_s,
                             C=args.rate_pps, N=args.n,
                             k_bar=args.k_bar if k_bar is None else k_bar)


def _cmd_fluid(args):
    if args.mode == "trajectory":
        p = _fluid_params(args)
        w0 = args.w0_pkts if args.w0_pkts is not None else 4 * p.w_eq
        q0 = args.q0_pkts
        traj = fluid.integrate(p, w0, q0, horizon=args.horizon_rtts * p.tau)
        os.makedirs(args.output_dir, exist_ok=True)
        traj.write_csv(os.path.join(args.output_dir, "trajectory.csv"))
        l1, l2 = fluid.eigenvalues(p, p.w_eq)
        info = {
            "classification": fluid.classify(p, p.w_eq),
            "re_lambda": l1.real,
            "im_lambda": abs(l1.imag),
            "bound_2bdp_sqrtbeta": fluid.stability_bound(p.BDP, p.beta),
            "k_bar": p.k_bar,
            "w_eq_pkts": p.w_eq,
            "final_w_pkts": float(traj.w[-1]),
            "final_q_pkts": float(traj.q[-1]),
        }
        print(json.dumps(info, indent=2))
        return EXIT_OK
    # sweep mode: a beta grid crossed with k_bar factors of the bound
    betas = [float(b) for b in args.betas.split(",")]
    factors = [float(f) for f in args.kbar_factors.split(",")]
    points = []
    for beta in betas:
        bound = fluid.stability_bound(args.tau_s * args.rate_pps, beta)
        for f in factors:
            points.append(fluid.FluidParams(
                beta=beta, tau=args.tau_s, C=args.rate_pps, N=args.n,
                k_bar=f * bound))
    rows = fluid.sweep(points)
    os.makedirs(args.output_dir, exist_ok=True)
    fluid.write_sweep_csv(rows, os.path.join(args.output_dir, "sweep.csv"))
    stable = sum(r["classification"] == fluid.STABLE_SPIRAL for r in rows)
    print(json.dumps({"points": len(rows), "stable_spiral": stable}))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="scoutsim",
        description="Priority-probe transport simulator and ODE analyzer")
    sub = p.add_subparsers(dest="cmd", required=True)

    runp = sub.add_parser("run", help="run an experiment config (JSON)")
    runp.add_argument("config")
    runp.add_argument("-o", "--output-dir", default=None)
    runp.add_argument("--summary-only", action="store_true")
    runp.set_defaults(fn=_cmd_run)

    scp = sub.add_parser("scenario",
                         help="run a named scenario ('list' to see them)")
    scp.add_argument("name")
    scp.add_argument("overrides", nargs="*", metavar="key=value")
    scp.add_argument("-o", "--output-dir", default=None)
    scp.add_argument("--summary-only", action="store_true")
    scp.set_defaults(fn=_cmd_scenario)

    flp = sub.add_parser("fluid", help="ODE model: trajectory or sweep")
    flp.add_argument("mode", choices=("trajectory", "sweep"))
    flp.add_argument("--beta", type=float, default=0.04)
    flp.add_argument("--tau-s", type=float, default=1e-4)
    flp.add_argument("--rate-pps", type=float, default=833_333.0)
    flp.add_argument("--n", type=int, default=5)
    flp.add_argument("--k-bar", type=float, default=100.0)
    flp.add_argument("--w0-pkts", type=float, default=None)
    flp.add_argument("--q0-pkts", type=float, default=0.0)
    flp.add_argument("--horizon-rtts", type=float, default=10_000.0)
    flp.add_argument("--betas", default="0.0001,0.001,0.01,0.1")
    flp.add_argument("--kbar-factors", default="0.25,0.5,0.9,1.1,2.0,4.0")
    flp.add_argument("-o", "--output-dir", default="out/fluid")
    flp.set_defaults(fn=_cmd_fluid)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except fluid.FluidDivergenceError as e:
        print(f"diverged: {e}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
