"""Command-line runner: ``fdastap <verb> --config FILE|PRESET --out DIR``.

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .config import PRESETS, load_config
from .errors import ConfigError, NumericalError
from .experiments import VERBS

log = logging.getLogger("fdastap")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _floats(n):
    def parse(text):
        try:
            vals = [float(x) for x in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got '{text}'")
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got '{text}'")
        return vals

    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help=f"TOML scenario file or preset name ({', '.join(PRESETS)})")
    common.add_argument("--out", default=None, help="output directory (omit to print the summary only)")
    common.add_argument("--seed", type=int, default=None, help="override [run].seed")
    common.add_argument("--threads", type=int, default=None, help="override [run].threads")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="fdastap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    sub.add_parser("spectrum", parents=[common], help="MVDR clutter spectra and ridge counts")
    sub.add_parser("rank-table", parents=[common], help="predicted vs measured clutter rank")
    sub.add_parser("sinr", parents=[common], help="SINR versus Doppler for the three filters")
    rj = sub.add_parser("reject", parents=[common], help="interference rejection before/after")
    rj.add_argument("--center", type=_floats(3), default=None, help="region center f_T,f_d,f_R")
    rj.add_argument("--widths", type=_floats(3), default=None, help="region widths f_T,f_d,f_R")
    sub.add_parser("bench", parents=[common], help="flop counts and wall time of the filter paths")
    return parser


def _apply_overrides(exp, args):
    if args.seed is not None:
        exp.run.seed = args.seed
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        exp.run.threads = args.threads
    if getattr(args, "center", None) is not None or getattr(args, "widths", None) is not None:
        if exp.interference is None:
            raise ConfigError(f"{exp.source}: --center/--widths need an [interference] table")
        if args.center is not None:
            exp.interference.center = args.center
        if args.widths is not None:
            if any(not 0 < w <= 1 for w in args.widths):
                raise ConfigError("--widths must lie in (0, 1]")
            exp.interference.widths = args.widths
    if args.verb == "sinr" and exp.target is None:
        raise ConfigError(f"{exp.source}: the sinr verb needs a [target] table")
    if args.verb == "reject" and exp.interference is None:
        raise ConfigError(f"{exp.source}: the reject verb needs an [interference] table")
    return exp


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        exp = _apply_overrides(load_config(args.config), args)
        log.info("running %s from %s", args.verb, exp.source)
        result = VERBS[args.verb](exp, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(json.dumps(result.summary, indent=2, sort_keys=True, default=float))
    for p in result.outputs:
        log.info("wrote %s", p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
