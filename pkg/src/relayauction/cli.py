"""Command line entry point: ``simulate``, ``verify`` and ``example``.

Exit codes: 0 success, 1 configuration error, 2 verification violation.
"""
from __future__ import annotations

import argparse
import sys
import time

from .channel import MBPS, ConfigError
from .experiment import ExperimentFailure, _kind, load_config, run_experiment, write_results
from .fixtures import FIXTURES
from .mechanisms import MechanismKind, run_mechanism
from .verification import first_price_const_power, sweep

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION = 0, 1, 2
NEGATIVE_CONTROL = "FirstPriceConstPower"


def _simulate(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
        cfg.validate()
    t0 = time.perf_counter()
    rows = run_experiment(cfg)
    csv_path, script = write_results(rows, args.out)
    print(f"{len(rows)} rows in {time.perf_counter() - t0:.1f} s")
    print(f"wrote {csv_path}")
    print(f"wrote {script}")
    return EXIT_OK


def _verify(args) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be at least 1")
    if args.mechanism.replace("-", "").replace("_", "").lower() == NEGATIVE_CONTROL.lower():
        kind, mech = MechanismKind.PROPOSED_CONST_POWER, first_price_const_power
    else:
        kind, mech = _kind(args.mechanism), None
        if kind is MechanismKind.FULL_INFO_BASELINE:
            raise ConfigError("the full-information baseline takes no bids to verify")
    result = sweep(kind, args.trials, args.seed, num_relays=args.relays,
                   num_destinations=args.destinations, mechanism=mech)
    print(f"mechanism {args.mechanism}: {result.scenarios} scenarios, "
          f"{result.evaluated} deviations evaluated")
    if result.skipped:
        print("skipped: " + ", ".join(f"{k}={v}" for k, v in sorted(result.skipped.items())))
    for r in result.reports[:args.show]:
        print(f"  relay {r.relay}: true alpha {r.true_alpha:.6g}, bid {r.deviation_alpha:.6g}, "
              f"gain {r.violation_margin:.6g}")
    for trial, witnesses in result.ir_failures[:args.show]:
        print(f"  IR failure in draw {trial}: {witnesses}")
    print(f"deviation reports: {len(result.reports)}; IR failures: {len(result.ir_failures)}")
    if result.scenarios < args.trials:
        print(f"warning: only {result.scenarios} usable scenarios found", file=sys.stderr)
    return EXIT_OK if result.passed else EXIT_VIOLATION


def _describe(label, s, out, a) -> None:
    for j, r in enumerate(out.assignment):
        if r is None:
            print(f"  {label}: destination {j + 1} unserved")
            continue
        print(f"  {label}: relay {r + 1} -> destination {j + 1}, power {out.power[j]:.6g} W, "
              f"rate {out.achieved_rate[j] / MBPS:.6g} Mbps")
        print(f"      payment {out.payment[r]:.6g}, interference cost "
              f"{out.interference_cost[j]:.6g}")
    print(f"      BS utility {out.bs_utility:.6g} (a = {a:g} per Mbps)")


def _example(args) -> int:
    fx = FIXTURES[args.id]()
    print(f"Example {args.id}: {fx.scenario.num_relays} relays, 1 destination")
    for label, spec in (("proposed", fx.proposed), ("VCG", fx.vcg)):
        _describe(label, fx.scenario, run_mechanism(fx.scenario, spec), spec.a)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relayauction",
                                     description="Truthful reverse auctions for D2D relay selection")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the Monte Carlo comparison grid")
    sim.add_argument("--config", required=True, help="JSON or key = value file")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--workers", type=int, default=None, help="override worker processes")
    sim.set_defaults(func=_simulate)

    ver = sub.add_parser("verify", help="truthfulness and IR sweep on small random cells")
    ver.add_argument("--mechanism", required=True,
                     help="mechanism kind, or FirstPriceConstPower for the negative control")
    ver.add_argument("--trials", type=int, default=200)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--relays", type=int, default=5)
    ver.add_argument("--destinations", type=int, default=3)
    ver.add_argument("--show", type=int, default=5, help="violations to print")
    ver.set_defaults(func=_verify)

    ex = sub.add_parser("example", help="run a worked single-destination example")
    ex.add_argument("--id", type=int, choices=sorted(FIXTURES), required=True)
    ex.set_defaults(func=_example)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ExperimentFailure, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
