"""Command line front end.

Verbs: run, sweep, model, export-topology. Exit codes: 0 ok, 1 configuration
error, 2 deadlock or invariant failure.
"""

import argparse
import os
import sys

from . import analytics
from . import config as configmod
from . import runner
from . import topology as topomod
from .engine import DeadlockError, SimulationError
from .workload import WorkloadError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _parse_axis(spec):
    if "=" not in spec:
        raise configmod.ConfigError("axis %r: want key=v1,v2,..." % (spec,))
    key, _, values = spec.partition("=")
    return key.strip(), [v.strip() for v in values.split(",") if v.strip()]


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg["seeds"] = [args.seed]
    if getattr(args, "set", None):
        for item in args.set:
            key, _, value = item.partition("=")
            configmod.set_value(cfg, key.strip(), value)
        configmod.validate(cfg)


def cmd_run(args):
    cfg = configmod.load_config(args.config)
    _apply_overrides(cfg, args)
    out_root = args.out or "results"
    summaries = runner.run_all_seeds(cfg, out_root, trace=args.trace)
    for s in summaries:
        print("seed %d: %d flows, avg fct %.3f us, p99 fct %.3f us, ooo %.4f"
              % (s["seed"], s["flow_count"], s["avg_fct_ns"] / 1000.0,
                 s["p99_fct_ns"] / 1000.0, s["ooo_fraction"]))
    return EXIT_OK


def cmd_sweep(args):
    cfg = configmod.load_config(args.config)
    _apply_overrides(cfg, args)
    axes = {}
    for spec in args.axis:
        key, values = _parse_axis(spec)
        axes[key] = values
    if not axes:
        raise configmod.ConfigError("sweep needs at least one --axis")
    header, rows = runner.sweep(cfg, axes, jobs=args.jobs)
    text = runner.sweep_csv(header, rows)
    out = args.out or "sweep.csv"
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with open(out, "w") as fh:
        fh.write(text)
    print("wrote %s (%d rows)" % (out, len(rows)))
    return EXIT_OK


_MODEL_DEFAULTS = {
    "hosts": 1024.0,
    "flows_per_host": 1.0,
    "bandwidth_bps": 200e9,
    "latency_s": 5e-6,
    "mtu_bytes": 2048.0,
    "per_flow_bytes": 11.0,
}


def cmd_model(args):
    fixed = dict(_MODEL_DEFAULTS)
    for item in args.set or ():
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in fixed:
            raise configmod.ConfigError("unknown model input %r" % (key,))
        fixed[key] = float(value)
    key, values = _parse_axis(args.axis)
    if key not in fixed:
        raise configmod.ConfigError("unknown model axis %r" % (key,))
    header, rows = analytics.model_table(args.subcommand,
                                         {key: [float(v) for v in values]},
                                         fixed)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("%g" % v for v in row))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print("wrote %s" % args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_export_topology(args):
    cfg = configmod.load_config(args.config)
    _apply_overrides(cfg, args)
    seed = cfg["seeds"][0]
    topo = runner.build_topology(cfg, seed)
    text = topomod.export_edge_list(topo)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print("wrote %s (%d links)" % (args.out, len(topo.links)))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="flowcutsim",
        description="Deterministic packet-level simulator for flowcut "
                    "switching and baseline routing policies.")
    sub = p.add_subparsers(dest="verb", required=True)

    run_p = sub.add_parser("run", help="execute a config, one run per seed")
    run_p.add_argument("config")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--out", default=None)
    run_p.add_argument("--trace", action="store_true")
    run_p.add_argument("--set", action="append", metavar="KEY=VALUE")
    run_p.set_defaults(fn=cmd_run)

    sweep_p = sub.add_parser("sweep", help="Cartesian parameter sweep")
    sweep_p.add_argument("config")
    sweep_p.add_argument("--axis", action="append", default=[],
                         metavar="KEY=V1,V2,...")
    sweep_p.add_argument("--jobs", type=int, default=None)
    sweep_p.add_argument("--seed", type=int, default=None)
    sweep_p.add_argument("--out", default=None)
    sweep_p.add_argument("--set", action="append", metavar="KEY=VALUE")
    sweep_p.set_defaults(fn=cmd_sweep)

    model_p = sub.add_parser("model", help="analytic resource model tables")
    model_p.add_argument("subcommand",
                         choices=("active-flows", "memory", "ack-overhead"))
    model_p.add_argument("--axis", required=True, metavar="NAME=V1,V2,...")
    model_p.add_argument("--set", action="append", metavar="NAME=VALUE")
    model_p.add_argument("--out", default=None)
    model_p.set_defaults(fn=cmd_model)

    exp_p = sub.add_parser("export-topology", help="emit the built edge list")
    exp_p.add_argument("config")
    exp_p.add_argument("--seed", type=int, default=None)
    exp_p.add_argument("--out", default=None)
    exp_p.set_defaults(fn=cmd_export_topology)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (configmod.ConfigError, WorkloadError, topomod.TopologyError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except DeadlockError as exc:
        print("deadlock: %s" % exc, file=sys.stderr)
        for line in exc.stuck_flows:
            print("  stuck: %s" % line, file=sys.stderr)
        return EXIT_RUNTIME
    except (SimulationError, AssertionError) as exc:
        print("invariant failure: %s" % exc, file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
