"""Command-line front end: ``python -m mirrorqsd <command> ...``.

Angles accept multiples of pi (``pi/12``, ``5pi/12``, ``-pi/24``), plain
radians (``0.26``) or degrees (``15deg``).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from pathlib import Path

from . import __version__
from .model import DomainError, mirror_ensemble
from .optics import angles_for_schedule, preparation_settings, write_jsonl
from .scan import (
    FIGURES,
    ConfigError,
    ScanConfig,
    emulate_point,
    figure_data,
    locus_report,
    rows_to_csv,
    rows_to_json,
    scan,
)
from .strategies import MuConvention, Strategy, bounds_report, mcd_nu, quantum_value
from .walk import (
    CompilationMismatchError,
    UnsupportedScheduleError,
    compile_strategy,
    derive_outcome_map,
    verify_schedule,
)

OUTPUT_DIR_ENV = "MIRRORQSD_OUTPUT_DIR"

_PI_RE = re.compile(
    r"^\s*(?P<sign>[-+]?)\s*(?P<num>\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+\.?\d*))?\s*$",
    re.IGNORECASE,
)


def parse_angle(text: str) -> float:
    """Parse an angle given in fractions of pi, radians, or degrees."""
    s = text.strip()
    m = _PI_RE.match(s)
    if m:
        num = float(m.group("num")) if m.group("num") else 1.0
        den = float(m.group("den")) if m.group("den") else 1.0
        value = num * math.pi / den
        return -value if m.group("sign") == "-" else value
    if s.lower().endswith("deg"):
        return math.radians(float(s[:-3]))
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}") from None


def _default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def _dump(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _strategy_arg(parser):
    parser.add_argument("--strategy", type=Strategy, choices=list(Strategy), required=True,
                        metavar="{med,mcd}",
                        help="med (minimum error) or mcd (maximum confidence)")


def _point_args(parser):
    _strategy_arg(parser)
    parser.add_argument("--p", type=float, required=True, help="prior of each mirror state, 0 < p <= 0.5")
    parser.add_argument("--theta", type=parse_angle, required=True, help="state angle, e.g. pi/12")


def _mc_args(parser, photons_default):
    parser.add_argument("--photons", type=int, default=photons_default, help="photons per run")
    parser.add_argument("--runs", type=int, default=30, help="repeated runs per setting")
    parser.add_argument("--seed", type=int, default=0, help="random seed")
    parser.add_argument("--convention", type=MuConvention, choices=list(MuConvention),
                        default=MuConvention.DERIVED, metavar="{derived,printed}",
                        help="MED mu denominator used by the walk")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mirrorqsd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="quantum value, noncontextual bound and gap at one point")
    _point_args(p)

    p = sub.add_parser("scan", help="grid scan of the advantage region")
    _strategy_arg(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--p", type=float, help="single p value")
    g.add_argument("--p-range", nargs=3, metavar=("MIN", "MAX", "COUNT"), help="p grid")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--theta", type=parse_angle, action="append",
                   help="single theta; given twice it is read as MIN MAX of a degenerate grid")
    g.add_argument("--theta-range", nargs=3, metavar=("MIN", "MAX", "COUNT"), help="theta grid")
    _mc_args(p, photons_default=0)
    p.add_argument("--output", help="output file ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("walk", help="compile and dump the quantum-walk coin schedule")
    _point_args(p)
    p.add_argument("--convention", type=MuConvention, choices=list(MuConvention),
                   default=MuConvention.DERIVED, metavar="{derived,printed}")
    p.add_argument("--samples", type=int, default=100, help="Haar states used by the verification")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("experiment", help="emulate the photon-counting experiment")
    _point_args(p)
    _mc_args(p, photons_default=100_000)
    p.add_argument("--records", help="write per-run counts as JSON lines to this file")

    p = sub.add_parser("locus", help="solve for the equality locus at fixed theta")
    _strategy_arg(p)
    p.add_argument("--theta", type=parse_angle, required=True)
    p.add_argument("--p-min", type=float, default=1e-6)
    p.add_argument("--p-max", type=float, default=0.5)

    p = sub.add_parser("figure", help="write the data behind a figure panel")
    p.add_argument("--figure", choices=FIGURES, required=True)
    p.add_argument("--out-dir", help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")
    p.add_argument("--p-range", nargs=3, metavar=("MIN", "MAX", "COUNT"), default=("0.005", "0.5", "100"))
    p.add_argument("--theta-range", nargs=3, metavar=("MIN", "MAX", "COUNT"),
                   default=("0.005", str(math.pi / 2 - 0.005), "100"))
    _mc_args(p, photons_default=0)
    return parser


def _range(values, angle=False):
    conv = parse_angle if angle else float
    return conv(values[0]), conv(values[1]), int(values[2])


def _cmd_bounds(args) -> int:
    r = bounds_report(args.p, args.theta, args.strategy)
    _dump({
        "strategy": r.strategy.value,
        "p": r.p,
        "theta": r.theta,
        "quantum": r.quantum_value,
        "noncontextual": r.noncontextual_value,
        "gap": r.gap,
        "advantage": r.advantage,
    })
    return 0


def _cmd_scan(args) -> int:
    if args.p is not None:
        p_grid = (args.p, args.p, 1)
    elif args.p_range:
        p_grid = _range(args.p_range)
    else:
        p_grid = ScanConfig.p_grid
    if args.theta:
        if len(args.theta) > 2:
            raise ConfigError("theta_grid: --theta given more than twice")
        lo, hi = args.theta[0], args.theta[-1]
        theta_grid = (lo, hi, 1 if lo == hi else 2)
    elif args.theta_range:
        theta_grid = _range(args.theta_range, angle=True)
    else:
        theta_grid = ScanConfig.theta_grid
    config = ScanConfig(
        strategy=args.strategy, p_grid=p_grid, theta_grid=theta_grid,
        mu_convention=args.convention, n_photons=args.photons, runs=args.runs,
        seed=args.seed, output_path=args.output, format=args.format,
    )
    rows = scan(config)
    text = rows_to_csv(rows) if config.format == "csv" else rows_to_json(rows)
    if config.output_path == "-":
        sys.stdout.write(text)
        return 0
    path = Path(config.output_path) if config.output_path else (
        _default_output_dir() / f"scan_{config.strategy.value}.{config.format}"
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {len(rows)} rows to {path}", file=sys.stderr)
    return 0


def _cmd_walk(args) -> int:
    schedule, povm = compile_strategy(args.p, args.theta, args.strategy, args.convention)
    outcome_map = derive_outcome_map(schedule, povm)
    optimal = compile_strategy(args.p, args.theta, args.strategy)[1]
    plates = [
        {"element": s.element_id, "angle": s.angle, "angle_over_pi": s.in_units_of_pi()}
        for s in angles_for_schedule(schedule)
    ]
    prep = [
        {"state": i + 1, "element": s.element_id, "angle": s.angle, "angle_over_pi": s.in_units_of_pi()}
        for i, s in enumerate(preparation_settings(mirror_ensemble(args.p, args.theta)))
    ]
    _dump({
        "strategy": args.strategy.value,
        "p": args.p,
        "theta": args.theta,
        "convention": args.convention.value,
        "schedule": schedule.to_dict(),
        "waveplates": plates,
        "preparation": prep,
        "outcome_map": {
            str(x): povm.labels[k] for x, k in sorted(outcome_map.positions.items())
        },
        "deviation_from_optimal_povm": verify_schedule(schedule, optimal, args.samples, args.seed),
    })
    return 0


def _cmd_experiment(args) -> int:
    estimate, records = emulate_point(
        args.p, args.theta, args.strategy, args.photons, args.runs, args.seed, args.convention
    )
    if args.records:
        write_jsonl(records, args.records)
    _dump({
        "strategy": args.strategy.value,
        "p": args.p,
        "theta": args.theta,
        "source": "povm" if args.strategy is Strategy.MCD and mcd_nu(args.p, args.theta) > 1 else "walk",
        "analytic": quantum_value(args.p, args.theta, args.strategy),
        "mean": estimate.mean,
        "std": estimate.std,
        "runs": estimate.runs,
        "excluded_runs": estimate.excluded_runs,
        "n_photons": args.photons,
        "seed": args.seed,
    })
    return 0


def _cmd_locus(args) -> int:
    _dump(locus_report(args.strategy, args.theta, (args.p_min, args.p_max)))
    return 0


def _cmd_figure(args) -> int:
    config = ScanConfig(
        strategy=Strategy.MED if args.figure.startswith("fig3") else Strategy.MCD,
        p_grid=_range(args.p_range),
        theta_grid=_range(args.theta_range, angle=True),
        mu_convention=args.convention,
        n_photons=args.photons,
        runs=args.runs,
        seed=args.seed,
    )
    out_dir = Path(args.out_dir) if args.out_dir else _default_output_dir()
    for path in figure_data(args.figure, config, out_dir):
        print(path)
    return 0


_COMMANDS = {
    "bounds": _cmd_bounds,
    "scan": _cmd_scan,
    "walk": _cmd_walk,
    "experiment": _cmd_experiment,
    "locus": _cmd_locus,
    "figure": _cmd_figure,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (DomainError, ConfigError, UnsupportedScheduleError, CompilationMismatchError, OSError) as exc:
        print(f"mirrorqsd {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
