"""Run every shipped preset through the CLI, one output directory each.

    python scripts/run_all.py [--out results] [--only sinr_comparison ...]
"""
import argparse
import sys
import time
from pathlib import Path

from fdastap.cli import main as cli_main
from fdastap.config import PRESETS

VERB = {
    "spectrum_np3": "spectrum",
    "spectrum_np6": "spectrum",
    "rank_table": "rank-table",
    "sinr_comparison": "sinr",
    "bench_sweep": "bench",
    "reject_cluster": "reject",
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--only", nargs="*", choices=PRESETS)
    args = ap.parse_args()
    status = 0
    for preset in args.only or PRESETS:
        t0 = time.perf_counter()
        code = cli_main([VERB[preset], "--config", preset, "--out", str(Path(args.out) / preset)])
        print(f"# {preset}: exit {code} in {time.perf_counter() - t0:.1f} s", file=sys.stderr)
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main())
