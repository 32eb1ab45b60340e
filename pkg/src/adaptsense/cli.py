"""Command-line interface.

Subcommands:
  sense     one adaptive sensing run, with a per-slot summary
  sweep     Monte Carlo over trials, CSV + manifest output
  fig2      per-slot verification-statistic trace (CSV + SVG)
  fig3      termination-slot distribution (CSV + SVG)
  fig4      throughput vs transmit power (CSV + SVG)
  validate  fast structural-invariant suite (nonzero exit on failure)
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .config import ConfigError, ScenarioConfig, load_config, load_preset, realize


def _add_common(parser):
    parser.add_argument("--config", type=Path, default=None,
                        help="scenario TOML file (default: desk preset)")
    parser.add_argument("--full-scale", action="store_true",
                        help="use the full-scale preset (long-running)")
    parser.add_argument("--seed", type=int, default=0,
                        help="base seed / trial offset")
    parser.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory")


def _scenario(args) -> ScenarioConfig:
    if args.config is not None and args.full_scale:
        raise ConfigError("--config and --full-scale are mutually exclusive")
    if args.config is not None:
        return load_config(args.config)
    return load_preset("full" if args.full_scale else "desk")


def _cmd_sense(args) -> int:
    cfg = realize(_scenario(args), args.seed)
    row, outcome = harness.run_trial(cfg, 0, harness.ExperimentPlan(cfg).link)
    print(f"terminated at mini slot {outcome.terminated_slot} "
          f"of {cfg.mini_slots} (halted: {outcome.halted})")
    for rec in outcome.verification_trace:
        print(f"  slot {rec.slot:2d}: rho/v = {rec.normalized:.6g} "
              f"(noise level {rec.noise_level:.6g}, bound {rec.bound:.3g})")
    print(f"relative spectral error: {row.relative_error:.4f}")
    print(f"false alarm rate: {row.false_alarm_rate:.3f}, "
          f"detection rate: {row.detection_rate:.3f}")
    print(f"throughput adaptive/baseline: "
          f"{row.throughput_adaptive:.4g} / {row.throughput_baseline:.4g} "
          f"bits/s (ratio {row.throughput_adaptive / row.throughput_baseline:.4f})")
    return 0


def _cmd_sweep(args) -> int:
    plan = harness.ExperimentPlan(
        scenario=_scenario(args), trials=args.trials,
        base_seed=args.seed, output_dir=args.out)
    _, aggregate = harness.run(plan)
    for key in sorted(aggregate):
        print(f"{key}: {aggregate[key]:.6g}")
    print(f"outputs written to {args.out}")
    return 0


def _cmd_fig2(args) -> int:
    outcome = harness.trace_experiment(_scenario(args), args.seed, args.out)
    print(f"terminated at mini slot {outcome.terminated_slot}; "
          f"trace.csv and trace.svg written to {args.out}")
    return 0


def _cmd_fig3(args) -> int:
    _, aggregate = harness.termination_experiment(
        _scenario(args), args.trials, args.seed, args.out)
    print(f"mean termination slot {aggregate['mean_terminated_slot']:.3f} "
          f"over {args.trials} trials; outputs in {args.out}")
    return 0


def _cmd_fig4(args) -> int:
    harness.throughput_sweep(_scenario(args), args.trials, args.seed,
                             args.out, distance_km=args.distance_km)
    print(f"throughput.csv and throughput.svg written to {args.out}")
    return 0


def _cmd_validate(args) -> int:
    failures = harness.check_invariants(
        _scenario(args) if (args.config or args.full_scale) else None)
    if failures:
        for name in failures:
            print(f"FAIL {name}", file=sys.stderr)
        return 1
    print("all structural invariants hold")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="adaptsense",
        description="Adaptive compressive wideband spectrum sensing simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sense", help="single adaptive sensing run")
    _add_common(p)
    p.set_defaults(func=_cmd_sense)

    p = sub.add_parser("sweep", help="Monte Carlo sweep")
    _add_common(p)
    p.add_argument("--trials", type=int, default=10)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("fig2", help="verification-statistic trace")
    _add_common(p)
    p.set_defaults(func=_cmd_fig2)

    p = sub.add_parser("fig3", help="termination-slot distribution")
    _add_common(p)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=_cmd_fig3)

    p = sub.add_parser("fig4", help="throughput vs transmit power")
    _add_common(p)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--distance-km", type=float, default=0.05)
    p.set_defaults(func=_cmd_fig4)

    p = sub.add_parser("validate", help="structural invariant suite")
    _add_common(p)
    p.set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
