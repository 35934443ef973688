"""Command-line interface: run one trial, sweep antenna counts, or report
information-exchange costs.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from . import harness, scenario
from .config import load_config
from .errors import CjtsimError, ConfigError


def _cmd_run(args):
    cfg = load_config(args.config)
    records = harness.run_trial(cfg, args.seed)
    print("scheme,total_power_w,sum_rate_bps_hz,feasible,solver_iters")
    for r in records:
        print(f"{r.scheme},{r.total_power_w:.17g},{r.sum_rate_bps_hz:.17g},"
              f"{int(r.feasible)},{r.solver_iters}")
    return 0


def _cmd_sweep(args):
    cfg = load_config(args.config)
    try:
        n_tx_list = [int(v) for v in args.ntx.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --ntx list '{args.ntx}'") from exc
    if not n_tx_list:
        raise ConfigError("--ntx list is empty")
    rows = harness.sweep_antennas(cfg, n_tx_list, args.trials, args.seed)
    csv = harness.sweep_csv(rows)
    if args.out:
        with open(args.out, "w", newline="") as f:
            f.write(csv)
    else:
        sys.stdout.write(csv)
    if args.fig:
        from .plots import plot_power_vs_antennas
        plot_power_vs_antennas(rows, args.fig)
    return 0


def _cmd_exchange(args):
    cfg = load_config(args.config)
    topo = scenario.build_topology(cfg.n_bs, cfg.n_tx, cfg.n_ue,
                                   cfg.serving_pattern)
    print("scheme,bytes_per_coherence_block,bytes_per_stationarity_period,"
          "blocks_per_period")
    for scheme in ("centralized", "decentralized"):
        c = harness.exchange_cost(topo, scheme, args.blocks)
        print(f"{c.scheme},{c.bytes_per_coherence_block},"
              f"{c.bytes_per_stationarity_period},{c.blocks_per_period}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="cjtsim",
        description="Coordinated joint-transmission precoding simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one Monte Carlo trial")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, required=True)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="power comparison over antenna counts")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--ntx", required=True,
                         help="comma-separated antenna counts, e.g. 16,32,48,64")
    p_sweep.add_argument("--trials", type=int, default=50)
    p_sweep.add_argument("--seed", type=int, required=True)
    p_sweep.add_argument("--out", help="CSV output path (stdout if omitted)")
    p_sweep.add_argument("--fig", help="also render a power-vs-antennas figure")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_ex = sub.add_parser("exchange", help="information-exchange accounting")
    p_ex.add_argument("--config", required=True)
    p_ex.add_argument("--blocks", type=int, default=1000,
                      help="coherence blocks per covariance stationarity period")
    p_ex.set_defaults(func=_cmd_exchange)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CjtsimError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
