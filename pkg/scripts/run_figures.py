#!/usr/bin/env python3
"""Regenerate the six bundled staircase presets into figures_out/.

Each preset writes one CSV per curve (lg n in cm^-2 against C_q); point the
files at any plotter.  Example:

    python3 scripts/run_figures.py --out figures_out
"""

import argparse
import sys

from qcap.cli import main as qcap_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="figures_out")
    ap.add_argument("--figures", type=int, nargs="*", default=list(range(1, 7)))
    args = ap.parse_args()
    for figure in args.figures:
        rc = qcap_main(["cq", "--figure", str(figure), "--out", args.out])
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
