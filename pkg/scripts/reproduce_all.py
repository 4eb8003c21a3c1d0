"""Regenerate every named figure/table artifact into one output directory.

Usage: python3 scripts/reproduce_all.py [--out-dir out] [--gnuplot]
"""

import argparse
import sys

from paced_auctions.cli import REPRODUCE_IDS, main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="out")
    ap.add_argument("--gnuplot", action="store_true",
                    help="also emit gnuplot scripts")
    ap.add_argument("--Ts", default="100000",
                    help="horizons for the delta_cdf experiment")
    args = ap.parse_args()
    for rid in REPRODUCE_IDS:
        print(f"== {rid} ==")
        argv = ["reproduce", rid, "--out-dir", args.out_dir, "--Ts", args.Ts]
        if args.gnuplot:
            argv.append("--gnuplot")
        code = cli_main(argv)
        if code != 0:
            print(f"reproduction {rid} failed with exit code {code}",
                  file=sys.stderr)
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
