"""Command-line front end.

Five subcommands: ``run``, ``sweep``, ``constants``, ``estimate-creg``,
``version``.  Run and sweep take a config path (or a preset name when no
file of that name exists); ``--set key=value`` overrides individual keys,
and sweep flags win over the sweep_* config keys.

Exit codes: 0 completed, 1 configuration or usage error, 2 blow-up
detected, 3 step-size underflow.  A sweep exits with the most severe code
among its rows (error rows count as 1).
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .constants import threshold_report
from .diagnostics import estimate_c_reg
from .harness import (ConfigError, PRESET_NAMES, _parse_grid_value,
                      build_sweep_spec, load_config, parse_config_text,
                      preset_text, run_scenario, run_sweep, status_exit_code)

__all__ = ["main"]


def _parse_overrides(pairs):
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got '{pair}'")
        key, _, value = pair.partition("=")
        out[key.strip()] = value.strip()
    return out


def _load(cfg_arg, overrides):
    if not os.path.isfile(cfg_arg) and cfg_arg in PRESET_NAMES:
        return parse_config_text(preset_text(cfg_arg),
                                 source=f"<preset {cfg_arg}>", overrides=overrides)
    return load_config(cfg_arg, overrides=overrides)


def _cmd_run(args):
    cfg = _load(args.config, _parse_overrides(args.set))
    outcome = run_scenario(cfg)
    print(f"status: {outcome.status.value}")
    print(f"t_reached: {outcome.final_state.t!r}")
    if outcome.t_event is not None:
        print(f"t_event: {outcome.t_event!r}")
    print(f"outputs: {cfg.outputs}")
    return status_exit_code(outcome.status)


def _cmd_sweep(args):
    cfg = _load(args.config, _parse_overrides(args.set))
    values = None
    if args.values is not None:
        try:
            values = tuple(float(tok) for tok in args.values.split(",") if tok.strip())
        except ValueError:
            raise ConfigError(f"--values expects comma-separated numbers, got '{args.values}'")
    spec = build_sweep_spec(cfg, axis=args.axis, values=values, jobs=args.jobs)
    rows = run_sweep(spec)
    worst = 0
    for row in rows:
        print(f"{spec.axis}={row.value:g}: {row.status}  peak linf_u {row.peak_linf_u:.6g}")
        if row.status == "Completed":
            code = 0
        elif row.status == "BlowUpDetected":
            code = 2
        elif row.status == "StepSizeUnderflow":
            code = 3
        else:
            code = 1
        worst = max(worst, code)
    print(f"table: {os.path.join(cfg.outputs, 'sweep.csv')}")
    return worst


def _cmd_constants(args):
    rep = threshold_report(args.dim, args.chi, args.cbeta, args.creg, mu=args.mu)
    print(f"dim = {rep.dim}")
    print(f"chi = {rep.chi!r}")
    print(f"c_beta = {rep.c_beta!r}")
    print(f"c_reg = {rep.c_reg!r}")
    print(f"mu_star = {rep.mu_star!r}")
    if args.mu is not None:
        print(f"mu = {args.mu!r}")
        if rep.q0 is not None:
            print(f"q0 = {rep.q0!r}")
        else:
            print("q0 = none" + (" (mu <= mu_star)" if args.mu <= rep.mu_star else ""))
    return 0


def _cmd_estimate_creg(args):
    grid = _parse_grid_value(args.grid, "--grid")
    est = estimate_c_reg(args.gamma, grid, t_end=args.t_end, dt=args.dt)
    for name, ratio in est.ratios:
        print(f"{name}: {ratio:.12e}")
    print(f"c_reg = {est.c_reg:.12e}  (gamma = {est.gamma!r})")
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="chemohapto",
        description="Chemotaxis-haptotaxis simulator and threshold constants.")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario from a config file or preset")
    p_run.add_argument("config", help="config path, or one of: " + ", ".join(PRESET_NAMES))
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
    p_run.set_defaults(fn=_cmd_run)

    p_sw = sub.add_parser("sweep", help="scan one parameter axis")
    p_sw.add_argument("config", help="base config path or preset name")
    p_sw.add_argument("--axis", choices=("mu", "r", "chi"))
    p_sw.add_argument("--values", help="comma-separated, strictly increasing")
    p_sw.add_argument("--jobs", type=int, help="parallel width (default 1)")
    p_sw.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_sw.set_defaults(fn=_cmd_sweep)

    p_c = sub.add_parser("constants", help="damping threshold from given constants")
    p_c.add_argument("--dim", type=int, required=True)
    p_c.add_argument("--chi", type=float, required=True)
    p_c.add_argument("--cbeta", type=float, required=True)
    p_c.add_argument("--creg", type=float, required=True)
    p_c.add_argument("--mu", type=float, help="report the integrability order for this damping")
    p_c.set_defaults(fn=_cmd_constants)

    p_e = sub.add_parser("estimate-creg", help="empirical regularity-constant witness")
    p_e.add_argument("--gamma", type=float, required=True)
    p_e.add_argument("--grid", required=True, help="same syntax as the config key, e.g. '1d 64 4.0'")
    p_e.add_argument("--t-end", type=float, default=4.0)
    p_e.add_argument("--dt", type=float, default=1e-3)
    p_e.set_defaults(fn=_cmd_estimate_creg)

    p_v = sub.add_parser("version", help="print the package version")
    p_v.set_defaults(fn=lambda args: (print(__version__), 0)[1])

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
