"""Command-line entry point.

    apic-contact run <config> [--out DIR] [--mode M] [--law L] [--mu X] [--iters N]
    apic-contact toy1d <mode> <tau-list> [--out DIR]
    apic-contact verify

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .config import RunConfig, format_config, parse_config
from .contact import LAWS
from .diagnostics import CSVRecorder
from .errors import InvalidInputError, NumericalFailure
from .integrator import run
from .scenarios import ramp_scenario, two_block_impact
from .toy1d import ToyState, integrate_toy, write_trajectory
from .transfers import MODES
from .verify import run_checks
from .vtk import write_snapshot

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def build_scenario(cfg: RunConfig):
    if cfg.scenario == "two-block":
        return two_block_impact(cfg.k, mode=cfg.mode, law=cfg.law, mu=cfg.mu, iterations=cfg.iterations,
                                dt=cfg.dt, tau=cfg.tau, end_time=cfg.end_time)
    return ramp_scenario(cfg.h, mu=cfg.mu, mode=cfg.mode, law=cfg.law, iterations=cfg.iterations,
                         dt=cfg.dt, tau=cfg.tau, end_time=cfg.end_time)


class _Every:
    """Call ``hook`` only on steps that are multiples of ``every``."""

    def __init__(self, hook, every):
        self.hook = hook
        self.every = every

    def __call__(self, model, state):
        if state.step % self.every == 0:
            self.hook(model, state)


def run_config(cfg: RunConfig) -> Path:
    """Run a resolved config and write its outputs; returns the output directory."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.txt").write_text(format_config(cfg))
    if cfg.scenario == "toy1d":
        unstable = []
        for tau in cfg.taus:
            traj = integrate_toy(ToyState(1.0, -1.0, 0.0), cfg.mode, tau, cfg.end_time, sample_every=10)
            write_trajectory(traj, out)
            if traj.unstable:
                unstable.append(tau)
        if unstable:
            raise NumericalFailure(f"toy dynamics unstable for tau = {', '.join(f'{t:g}' for t in unstable)}")
        return out

    scenario = build_scenario(cfg)

    def snapshot(model, state):
        write_snapshot(model, state, out / f"snapshot_{state.step:07d}.vtk")

    with open(out / "diagnostics.csv", "w", newline="") as fh:
        hooks = [_Every(CSVRecorder(fh), cfg.diagnostics_every), _Every(snapshot, cfg.snapshot_every)]
        # the final state is always recorded, whatever the cadence
        final = run(scenario.model, scenario.state, scenario.end_time, hooks=hooks,
                    every=math.gcd(cfg.diagnostics_every, cfg.snapshot_every))
        if final.step % cfg.diagnostics_every:
            hooks[0].hook(scenario.model, final)
        if final.step % cfg.snapshot_every:
            snapshot(scenario.model, final)
    return out


def _parser():
    p = argparse.ArgumentParser(prog="apic-contact", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario from a config file")
    r.add_argument("config_path", nargs="?", help="configuration file")
    r.add_argument("--config", dest="config_flag", help="configuration file (alternative to the positional)")
    r.add_argument("--out", help="output directory")
    r.add_argument("--mode", choices=MODES)
    r.add_argument("--law", choices=LAWS)
    r.add_argument("--mu", type=float)
    r.add_argument("--iters", type=int)
    t = sub.add_parser("toy1d", help="integrate the 1D two-particle model")
    t.add_argument("mode", choices=MODES)
    t.add_argument("taus", help="comma separated augury times")
    t.add_argument("--out", default="out")
    t.add_argument("--t-end", type=float, default=40.0)
    sub.add_parser("verify", help="run the built-in property checks")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        if args.command == "verify":
            return EXIT_OK if run_checks() else EXIT_NUMERICAL
        if args.command == "toy1d":
            text = f"scenario = toy1d\nmode = {args.mode}\ntaus = {args.taus}\nend_time = {args.t_end!r}\nout = {args.out}\n"
            cfg = parse_config(text)
        else:
            path = args.config_flag or args.config_path
            if path is None:
                raise InvalidInputError("run needs a configuration file")
            try:
                text = Path(path).read_text()
            except OSError as exc:
                raise InvalidInputError(f"cannot read config {path}: {exc.strerror}") from None
            overrides = dict(out=args.out, mode=args.mode, law=args.law, mu=args.mu, iterations=args.iters)
            cfg = parse_config(text, overrides)
        out = run_config(cfg)
        print(f"wrote {out}")
        return EXIT_OK
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
