"""``skc`` command line: point reports, sweeps, reference figures and validation.

Exit codes: 0 success, 1 validation failure, 2 invalid input, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys

from . import experiments as ex
from .channel import ChannelParams
from .errors import ModelError, NumericalError

EXIT_OK, EXIT_VALIDATION, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


class InputError(Exception):
    pass


def parse_rho(text) -> complex:
    """Accept ``0.9``, ``0.6+0.2j`` or polar ``0.8@1.57`` (magnitude@radians)."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace(" ", "")
    try:
        if "@" in s:
            mag, ang = s.split("@", 1)
            return complex(float(mag) * math.cos(float(ang)), float(mag) * math.sin(float(ang)))
        return complex(s.replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse rho {text!r}") from None


def parse_modes(text) -> tuple:
    modes = tuple(m.strip() for m in str(text).split(",") if m.strip())
    bad = [m for m in modes if m not in ex.MODES]
    if bad or not modes:
        raise argparse.ArgumentTypeError(f"modes must be a comma list drawn from {','.join(ex.MODES)}")
    return modes


def _positive_int(text) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _default_threads() -> int:
    raw = os.environ.get("SKC_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# parser


def _add_common(sp, *, modes_default):
    sp.add_argument("--config", help="INI file; keys mirror the long flags, flags win")
    sp.add_argument("--p", type=float, default=1.0, help="channel variance (default 1)")
    sp.add_argument("--snr-a-db", type=float, default=None, help="p / sigma_A^2 in dB")
    sp.add_argument("--snr-b-db", type=float, default=None, help="p / sigma_B^2 in dB (default: Alice's)")
    sp.add_argument("--snr-e-db", type=float, default=None, help="p / sigma_E^2 in dB (default: Alice's)")
    sp.add_argument("--rho", type=parse_rho, default=0j, help="correlation: 0.9, 0.6+0.2j or mag@radians")
    sp.add_argument("--tol", type=float, default=1e-3, help="3-D envelope quadrature tolerance in bits")
    sp.add_argument("--modes", type=parse_modes, default=modes_default,
                    help=f"comma list from {','.join(ex.MODES)}")
    sp.add_argument("--out", help="output file (default stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", type=_positive_int, default=200_000, help="Monte Carlo samples per point")
    sp.add_argument("--clamp", action="store_true", help="zero negative lower bounds")
    sp.add_argument("--max-evals", type=_positive_int, default=1 << 27,
                    help="integrand evaluation budget per envelope entropy")
    sp.add_argument("--threads", type=_positive_int, default=_default_threads(),
                    help="grid points evaluated concurrently (default $SKC_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skc", description="Secret-key capacity bounds for CSI and RSS sampling.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("point", help="all quantities at one parameter point")
    _add_common(sp, modes_default=("csi", "rss", "high_snr"))

    sp = sub.add_parser("sweep", help="one axis over a linear grid")
    _add_common(sp, modes_default=("csi", "rss"))
    sp.add_argument("--axis", choices=ex.AXES, default="snr_db")
    sp.add_argument("--start", type=float, default=0.0)
    sp.add_argument("--stop", type=float, default=30.0)
    sp.add_argument("--count", type=_positive_int, default=10)

    sp = sub.add_parser("figure", help="recompute a reference figure with per-cell deltas")
    _add_common(sp, modes_default=("csi", "rss", "high_snr"))
    sp.add_argument("name", choices=("fig2", "fig4", "fig5"))

    sp = sub.add_parser("validate", help="Monte Carlo cross-checks (default: 9-point grid)")
    _add_common(sp, modes_default=("oracle",))
    sp.add_argument("--tol-sigma", type=float, default=3.0, help="pass band in standard errors")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> None:
    """Load ``--config`` values as subcommand defaults so explicit flags override them.

    Keys are read from ``[DEFAULT]`` and from the section named after the
    subcommand; dashes and underscores are interchangeable.
    """
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = configparser.ConfigParser()
    try:
        with open(known.config) as fh:
            cfg.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise InputError(f"cannot read config {known.config}: {exc}") from None
    section = cfg[known.command] if cfg.has_section(known.command or "") else cfg.defaults()
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sp = subparsers.choices.get(known.command)
    if sp is None:
        return
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, raw in section.items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None or dest in ("config", "help"):
            raise InputError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = cfg.BOOLEAN_STATES.get(raw.lower())
            if defaults[dest] is None:
                raise InputError(f"config key {key!r} needs a boolean")
            continue
        try:
            value = action.type(raw) if action.type else raw
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise InputError(f"config key {key!r}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise InputError(f"config key {key!r} must be one of {list(action.choices)}")
        defaults[dest] = value
    sp.set_defaults(**defaults)


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, float)):
        return format(float(v), ".9g") if not isinstance(v, int) else str(v)
    return str(v)


def render_csv(rows, cols) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in cols])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o).__name__)


def _clean(obj):
    # JSON has no nan/inf; emit null instead
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def render_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, default=_json_default, allow_nan=False) + "\n"


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _exit_for(results) -> int:
    kinds = {r.get("failure") for r in results}
    if "numerical" in kinds:
        return EXIT_NUMERICAL
    if "model" in kinds:
        return EXIT_INPUT
    return EXIT_OK


# --------------------------------------------------------------------------
# commands


def _params(args) -> ChannelParams:
    if args.snr_a_db is None:
        raise InputError("--snr-a-db is required")
    return ChannelParams.from_snr_db(args.snr_a_db, args.snr_b_db, args.snr_e_db, args.rho, args.p)


def cmd_point(args) -> int:
    params = _params(args)
    res = ex.point(params, args.tol, modes=args.modes, clamp=args.clamp, seed=args.seed, samples=args.samples,
                   max_evals=args.max_evals)
    if args.format == "json":
        _emit(render_json(ex.to_json(res)), args.out)
    else:
        _emit(render_csv([res["row"]], ex.columns(args.modes) + ["error"]), args.out)
    return _exit_for([res])


def cmd_sweep(args) -> int:
    spec = ex.SweepSpec(
        axis=args.axis, start=args.start, stop=args.stop, count=args.count, p=args.p,
        snr_a_db=0.0 if args.snr_a_db is None else args.snr_a_db, snr_b_db=args.snr_b_db,
        snr_e_db=args.snr_e_db, rho=args.rho, modes=args.modes, tol=args.tol, seed=args.seed,
        samples=args.samples, max_evals=args.max_evals,
    )
    results = ex.sweep(spec, clamp=args.clamp, threads=args.threads)
    if args.format == "json":
        _emit(render_json([ex.to_json(r) for r in results]), args.out)
    else:
        _emit(render_csv([r["row"] for r in results], [spec.axis] + ex.columns(spec.modes) + ["error"]), args.out)
    return _exit_for(results)


def cmd_figure(args) -> int:
    results = ex.figure(args.name, modes=args.modes, tol=args.tol, clamp=args.clamp, threads=args.threads,
                        max_evals=args.max_evals)
    if args.format == "json":
        _emit(render_json([ex.to_json(r) for r in results]), args.out)
    else:
        _emit(render_csv([r["row"] for r in results], ex.figure_columns(args.name, args.modes)), args.out)
    return _exit_for(results)


def cmd_validate(args) -> int:
    if args.snr_a_db is None:
        params_list = ex.validation_grid(args.p)
    else:
        params_list = [_params(args)]
    reports = ex.validate_grid(params_list, args.samples, args.seed, args.tol_sigma, args.tol, args.threads)
    if args.format == "json":
        _emit(render_json({"passed": all(r.passed for r in reports),
                           "reports": [r.as_dict() for r in reports]}), args.out)
    else:
        _emit(render_csv(ex.validation_rows(reports), ex.VALIDATION_COLUMNS), args.out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VALIDATION


COMMANDS = {"point": cmd_point, "sweep": cmd_sweep, "figure": cmd_figure, "validate": cmd_validate}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except (InputError, ModelError) as exc:
        print(f"skc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"skc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
