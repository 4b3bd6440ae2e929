#!/usr/bin/env python3
"""End-to-end demo: synthetic data -> least-squares fits -> ABC model
selection -> deterministic, stochastic and mixture stability maps.

All outputs land in ``--out`` (default ./pipeline_out); every stage is a
CLI command, so each subdirectory carries a replayable manifest.
"""

import argparse
import sys
from pathlib import Path

from drillstab import cli


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="pipeline_out")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, default=5000,
                    help="ABC population size (paper-scale: 25000)")
    ap.add_argument("--noise", type=float, default=0.8)
    args = ap.parse_args()
    out = Path(args.out)

    stages = [
        ["gen-data", "--out-dir", out / "data", "--model", "m3",
         "--noise", str(args.noise), "--seed", str(args.seed)],
        ["fit", "--out-dir", out / "fit", "--data", out / "data/dataset.csv",
         "--starts", "3", "--seed", str(args.seed)],
        ["abc", "--out-dir", out / "abc", "--data", out / "data/dataset.csv",
         "--n", str(args.n), "--seed", str(args.seed)],
        ["map", "--out-dir", out / "map_deterministic"],
        ["map", "--out-dir", out / "map_stochastic", "--mode", "stochastic",
         "--abc-state", out / "abc/abc_state"],
        ["map", "--out-dir", out / "map_mixture", "--mode", "mixture",
         "--abc-state", out / "abc/abc_state"],
    ]
    for argv in stages:
        argv = [str(a) for a in argv]
        print("drillstab", " ".join(argv))
        code = cli.main(argv)
        if code != 0:
            print(f"stage failed with exit code {code}", file=sys.stderr)
            return code
    print(f"\ndone; inspect {out}/*/manifest.json and the SVG/CSV outputs")
    return 0


if __name__ == "__main__":
    sys.exit(main())
