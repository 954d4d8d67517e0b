"""Command-line front end: rate curves, distance limits, teleportation fidelity and MC checks.

Every subcommand writes CSV or JSON to stdout (or ``--output``). Exit status is
0 on success, including "link dead" and "no finite limit" results, and 2 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import montecarlo, rates, teleport
from .serialize import to_csv, to_json

SEED_ENV = "TIMEBIN_SEED"
DEFAULT_SEED = 20020101


class ConfigError(ValueError):
    pass


def _int_like(text: str) -> int:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value.is_integer():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def _positive_int(text: str) -> int:
    value = _int_like(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _odd_int(text: str) -> int:
    value = _int_like(text)
    try:
        return rates.check_trunks(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _odd_list(text: str) -> list[int]:
    return [_odd_int(part) for part in text.split(",") if part.strip()]


def _seed(text: str) -> int:
    value = _int_like(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a non-negative 64-bit integer")
    return value


def _default_seed() -> str:
    return os.environ.get(SEED_ENV, str(DEFAULT_SEED))


def read_config(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment. Keys use flag names."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eta", type=float, default=rates.PAPER_ETA, help="detector efficiency (default 0.25)")
    common.add_argument("--dark", type=float, default=rates.PAPER_DARK, help="dark-count probability per qubit (default 1e-4)")
    common.add_argument("--alpha", type=float, default=rates.PAPER_ALPHA_DB_PER_KM, help="fibre attenuation in dB/km (default 0.25)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("-o", "--output", default=None, help="write here instead of stdout")
    common.add_argument("--config", default=None, help="key = value file mirroring the flags; flags win")

    parser = argparse.ArgumentParser(
        prog="timebin",
        description=__doc__.splitlines()[0],
        epilog=f"Monte Carlo seeds default to ${SEED_ENV} when set, else {DEFAULT_SEED}.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("rates", parents=[common], help="net-rate table versus distance")
    p.add_argument("--n", type=_odd_list, default=[1, 3], help="comma-separated odd trunk counts")
    p.add_argument("--lmin", type=float, default=0.0)
    p.add_argument("--lmax", type=float, default=300.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--optical-error", type=float, default=0.0)
    subs["rates"] = p

    p = sub.add_parser("max-distance", parents=[common], help="distance where the net rate vanishes")
    p.add_argument("--n", type=_odd_int, default=1)
    p.add_argument("--optical-error", type=float, default=0.0)
    subs["max-distance"] = p

    p = sub.add_parser("optimal-n", parents=[common], help="best odd trunk count at one distance")
    p.add_argument("--length", type=float, default=150.0)
    p.add_argument("--n-max", type=_odd_int, default=15)
    p.add_argument("--optical-error", type=float, default=0.0)
    subs["optimal-n"] = p

    p = sub.add_parser("teleport", parents=[common], help="teleportation fidelities and fringe scan")
    p.add_argument("--a0", type=float, default=1 / math.sqrt(2), help="early-bin amplitude of the input qubit")
    p.add_argument("--phase", type=float, default=0.0, help="input qubit phase in rad")
    p.add_argument("--xi", type=float, default=1.0, help="indistinguishability at the Bell measurement")
    p.add_argument("--f-acc", type=float, default=0.0, help="accidental-coincidence fraction")
    p.add_argument("--fit-pole", type=float, default=None, help="fit knobs to this pole fidelity")
    p.add_argument("--fit-eq", type=float, default=None, help="fit knobs to this equator fidelity")
    p.add_argument("--route", choices=("physical", "projector"), default="projector")
    p.add_argument("--scan-points", type=_int_like, default=0, help="beta settings over [0, 2 pi)")
    p.add_argument("--scan-out", default=None, help="write the fringe CSV here")
    subs["teleport"] = p

    p = sub.add_parser("fit-noise", parents=[common], help="noise knobs from measured fidelities")
    p.add_argument("--fit-pole", type=float, required=True)
    p.add_argument("--fit-eq", type=float, required=True)
    subs["fit-noise"] = p

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo relay versus analytic rates")
    p.add_argument("--n", type=_odd_int, default=3)
    p.add_argument("--length", type=float, default=100.0)
    p.add_argument("--trials", type=_positive_int, default=10_000_000)
    p.add_argument("--seed", type=_seed, default=_default_seed())
    p.add_argument("--method", choices=("auto", "events", "counts"), default="auto")
    p.add_argument("--no-auto-scale", action="store_true")
    subs["mc"] = p
    return parser, subs


def parse_args(argv: list[str] | None) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            config = read_config(args.config)
        except (OSError, ConfigError) as exc:
            parser.error(str(exc))
        sub = subs[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in config.items():
            action = known.get(key)
            if action is None or key in ("config", "help"):
                sub.error(f"unknown config key {key!r}")
            if action.nargs == 0:
                defaults[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                defaults[key] = value
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _detector(args) -> rates.DetectorModel:
    if args.alpha <= 0:
        raise ValueError("--alpha must be positive")
    return rates.DetectorModel(eta=args.eta, dark=args.dark)


def cmd_rates(args) -> str:
    det = _detector(args)
    if args.step <= 0 or args.lmax < args.lmin or args.lmin < 0:
        raise ValueError("need 0 <= lmin <= lmax and step > 0")
    count = int(math.floor((args.lmax - args.lmin) / args.step + 1e-9)) + 1
    lengths = args.lmin + args.step * np.arange(count)
    rows = rates.r_net_curve(lengths, args.n, det, args.alpha, args.optical_error)
    if args.format == "json":
        return to_json({"rows": [dict(zip(rates.CURVE_HEADER, r.values())) for r in rows]})
    return to_csv(rates.CURVE_HEADER, (r.values() for r in rows))


def _params(args) -> dict:
    return {"eta": args.eta, "dark": args.dark, "alpha_db_per_km": args.alpha}


def cmd_max_distance(args) -> str:
    det = _detector(args)
    try:
        limit = rates.max_distance(args.n, det, args.alpha, optical_error=args.optical_error)
        out = {"n": args.n, "L_max_km": limit.l_max_km, "status": limit.status}
    except rates.LinkDeadError:
        out = {"n": args.n, "L_max_km": None, "status": "link_dead"}
    return to_json({**out, **_params(args)})


def cmd_optimal_n(args) -> str:
    det = _detector(args)
    best = rates.optimal_n(args.length, det, args.alpha, args.n_max, args.optical_error)
    return to_json(
        {"L_km": best.length_km, "n_opt": best.n, "r_net": best.r_net, "status": best.status, "n_max": args.n_max, **_params(args)}
    )


def _knobs(args) -> teleport.NoiseKnobs:
    if (args.fit_pole is None) != (args.fit_eq is None):
        raise ValueError("--fit-pole and --fit-eq go together")
    if args.fit_pole is not None:
        return teleport.fit_noise_knobs(args.fit_pole, args.fit_eq)
    return teleport.NoiseKnobs(xi=args.xi, f_acc=args.f_acc)


def cmd_teleport(args) -> str:
    knobs = _knobs(args)
    if not 0.0 <= args.a0 <= 1.0:
        raise ValueError("--a0 must lie in [0, 1]")
    qubit = teleport.TimeBinQubit(args.a0, math.sqrt(1.0 - args.a0**2), args.phase)
    report = teleport.mean_fidelity_decomposed(knobs, args.route)
    outcome, rho = teleport.teleport(qubit, knobs, args.route)

    scan_csv = None
    if args.scan_points:
        if args.scan_points < 3:
            raise ValueError("--scan-points needs at least 3 settings")
        beta = 2 * math.pi * np.arange(args.scan_points) / args.scan_points
        scan = teleport.equatorial_scan(args.phase, beta, knobs, args.route)
        scan_csv = to_csv(("beta_rad", "rate"), scan.rows())
        if args.scan_out:
            Path(args.scan_out).write_text(scan_csv)
    if args.format == "csv":
        if scan_csv is None:
            raise ValueError("--format csv needs --scan-points")
        return scan_csv

    out = report.as_dict()
    out.update(
        xi=knobs.xi,
        f_acc=knobs.f_acc,
        input_fidelity=teleport.fidelity(qubit, rho),
        bsm_probability=outcome.probability,
    )
    if scan_csv is not None:
        out["scan_visibility"] = scan.visibility()
    return to_json(out)


def cmd_fit_noise(args) -> str:
    knobs = teleport.fit_noise_knobs(args.fit_pole, args.fit_eq)
    return to_json({"xi": knobs.xi, "f_acc": knobs.f_acc, "visibility": knobs.visibility})


def cmd_mc(args) -> str:
    det = _detector(args)
    if args.length < 0:
        raise ValueError("--length must be non-negative")
    t = rates.transmission(args.alpha, args.length)
    result = montecarlo.compare(
        args.n, t, det, args.trials, args.seed,
        auto_scale=not args.no_auto_scale, method=args.method, length_km=args.length,
    )
    return to_json(result.as_dict())


COMMANDS = {
    "rates": cmd_rates,
    "max-distance": cmd_max_distance,
    "optimal-n": cmd_optimal_n,
    "teleport": cmd_teleport,
    "fit-noise": cmd_fit_noise,
    "mc": cmd_mc,
}


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    try:
        text = COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"timebin {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
