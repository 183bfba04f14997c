import argparse
import json
import math
import os
import sys

import pandas as pd
from pydantic import ValidationError

# Add the project root directory to sys.path
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from app.schemas import CrossingsModel, DiscordResultModel, PeakModel, StateFile
from backend import measurement_oracle, nanopore, x_discord
from backend.cs_x_transform import is_cs, is_x, table_digest, transform_matrix
from backend.density_core import EntropyUnit, validate
from backend.errors import ConfigError, DiscordError, NotX
from backend.x_canonical import XState, canonicalize
from utils.config import load_settings
from utils.logger import log_info, set_level

__version__ = "1.0.0"
CSV_FLOAT = "%.17g"


# --- Helpers ---
def load_state_file(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return StateFile.model_validate(json.load(fh)).to_array()


def write_csv(df: pd.DataFrame, out):
    if out:
        df.to_csv(out, index=False, float_format=CSV_FLOAT)
    else:
        df.to_csv(sys.stdout, index=False, float_format=CSV_FLOAT)


def canonical_from_matrix(m, tol):
    """X matrices go straight to canonical form; CS matrices pass through H2 first."""
    if not is_x(m, tol):
        if not is_cs(m, tol):
            raise NotX("state is neither X nor centrosymmetric; use --method oracle")
        m = transform_matrix(m, tol=tol)
    return canonicalize(XState.from_matrix(m, tol), tol)


# --- Subcommands ---
def cmd_discord(args, settings):
    m = load_state_file(args.input)
    rho = validate(m, settings.tol)
    if args.method == "oracle":
        value = measurement_oracle.discord(rho, settings.units, threads=settings.threads)
        model = DiscordResultModel(q_value=value, unit=settings.units, method="oracle")
    else:
        result = x_discord.discord(canonical_from_matrix(rho.entries, settings.tol), settings.units)
        model = DiscordResultModel(**result.as_dict())
    print(model.model_dump_json())
    return 0


def cmd_cs2x(args, settings):
    m = load_state_file(args.input)
    out = transform_matrix(m, inverse=args.inverse, tol=settings.tol)
    print(StateFile.from_array(out).model_dump_json())
    return 0


def cmd_nanopore(args, settings):
    unit = EntropyUnit.parse(settings.units).value
    records = nanopore.sweep(args.N, args.beta, args.t_start, args.t_end, args.steps,
                             threads=settings.threads, unit=unit)
    df = pd.DataFrame({
        "alpha_t": [r.alpha_t for r in records],
        f"q0_{unit}": [r.q0 for r in records],
        f"q_pi2_{unit}": [r.q_pi2 for r in records],
        f"q_theta_{unit}": [math.nan if r.q_theta is None else r.q_theta for r in records],
        f"q_{unit}": [r.q for r in records],
        "theta_opt": [r.theta_opt for r in records],
    })
    write_csv(df, args.out)
    return 0


def cmd_crossings(args, settings):
    roots = nanopore.find_branch_crossings(args.N, args.beta, (args.t_min, args.t_max), strict=True)
    print(CrossingsModel(roots).model_dump_json())
    return 0


def cmd_limit(args, settings):
    print(f"{nanopore.thermodynamic_limit_discord(args.beta, settings.units):.17g}")
    return 0


def cmd_spectrum(args, settings):
    lines = nanopore.flicker_spectrum(args.N, args.beta, args.samples, args.harmonics,
                                      threads=settings.threads)
    df = pd.DataFrame({"harmonic": [l.harmonic for l in lines],
                       "amplitude": [l.amplitude for l in lines]})
    write_csv(df, args.out)
    return 0


def cmd_scond(args, settings):
    params = nanopore.NanoporeParams(args.N, args.beta, args.t)
    curve = nanopore.conditional_entropy_curve(params, args.points, settings.units)
    write_csv(pd.DataFrame(curve, columns=["theta", "s_cond"]), args.out)
    return 0


def cmd_peak(args, settings):
    alpha_t, q = nanopore.peak_discord(args.N, args.beta, args.steps)
    print(PeakModel(alpha_t=alpha_t, q_bits=q).model_dump_json())
    return 0


def cmd_selftest(args, settings):
    from app.selftest import run_selftest
    return run_selftest(settings, skip_oracle=args.skip_oracle)


# --- Parser ---
class PrintVersion(argparse.Action):
    """Prints the provenance line on one line, unwrapped."""

    def __init__(self, option_strings, dest=argparse.SUPPRESS, default=argparse.SUPPRESS, help=None):
        super().__init__(option_strings, dest=dest, default=default, nargs=0, help=help)

    def __call__(self, parser, namespace, values, option_string=None):
        print(f"discord-flicker {__version__} cs2x-table sha256:{table_digest()}")
        parser.exit()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="discord-flicker", allow_abbrev=False,
        description="Quantum discord of two-qubit X/CS states and nanopore discord flickering.")
    parser.add_argument("--units", choices=("bits", "nats"), default=None)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--version", action=PrintVersion, help="print version and CS->X table digest")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discord", allow_abbrev=False, help="discord of a state from a JSON file")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=("piecewise", "oracle"), default="piecewise")
    p.set_defaults(handler=cmd_discord)

    p = sub.add_parser("cs2x", allow_abbrev=False, help="CS -> X transform of a JSON matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--inverse", action="store_true", help="X -> CS instead")
    p.set_defaults(handler=cmd_cs2x)

    def nanopore_args(p):
        p.add_argument("--N", type=int, required=True)
        p.add_argument("--beta", type=float, required=True)

    p = sub.add_parser("nanopore", allow_abbrev=False, help="discord sweep over alpha*t (CSV)")
    nanopore_args(p)
    p.add_argument("--t-start", type=float, default=0.0)
    p.add_argument("--t-end", type=float, default=math.pi)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_nanopore)

    p = sub.add_parser("nanopore-crossings", allow_abbrev=False, help="times where Q0 and Q_pi/2 cross (JSON)")
    nanopore_args(p)
    p.add_argument("--t-min", type=float, default=0.0)
    p.add_argument("--t-max", type=float, default=math.pi)
    p.set_defaults(handler=cmd_crossings)

    p = sub.add_parser("nanopore-limit", allow_abbrev=False, help="thermodynamic-limit discord")
    p.add_argument("--beta", type=float, required=True)
    p.set_defaults(handler=cmd_limit)

    p = sub.add_parser("nanopore-spectrum", allow_abbrev=False, help="flickering spectrum (CSV)")
    nanopore_args(p)
    p.add_argument("--samples", type=int, default=1024)
    p.add_argument("--harmonics", type=int, default=16)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_spectrum)

    p = sub.add_parser("nanopore-scond", allow_abbrev=False, help="conditional entropy over theta at one time (CSV)")
    nanopore_args(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--points", type=int, default=91)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_scond)

    p = sub.add_parser("nanopore-peak", allow_abbrev=False, help="largest discord over one period (JSON, bits)")
    nanopore_args(p)
    p.add_argument("--steps", type=int, default=2000)
    p.set_defaults(handler=cmd_peak)

    p = sub.add_parser("selftest", allow_abbrev=False, help="run the acceptance checks")
    p.add_argument("--skip-oracle", action="store_true")
    p.set_defaults(handler=cmd_selftest)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code is None else int(e.code)

    try:
        settings = load_settings().override(
            units=args.units, tol=args.tol, seed=args.seed, threads=args.threads,
            log_level="DEBUG" if args.verbose else None)
    except ConfigError as e:
        print(f"❌ configuration error: {e}", file=sys.stderr)
        return 2
    set_level(settings.log_level)
    print(f"config: {settings.describe()}", file=sys.stderr)
    log_info(f"command {args.command} with {settings.describe()}")

    try:
        return args.handler(args, settings)
    except DiscordError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except (ValidationError, json.JSONDecodeError, OSError, ValueError) as e:
        print(f"❌ usage error: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
