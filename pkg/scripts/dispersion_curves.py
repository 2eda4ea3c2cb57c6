"""Export physical/spurious dispersion curves and group velocities for a set of
penalty parameters on the unit lattice, with the reference curves alongside."""

import argparse
from pathlib import Path

from sipgwave.cli import main


def parse():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--s", type=float, nargs="+", default=[1.5, 2.0, 3.0, 5.0])
    p.add_argument("--samples", type=int, default=4096)
    p.add_argument("--out", type=Path, default=Path("results/dispersion"))
    return p.parse_args()


if __name__ == "__main__":
    a = parse()
    argv = ["--s", *map(str, a.s), "--h", "1", "--samples", str(a.samples), "--out", str(a.out)]
    raise SystemExit(main(["dispersion", *argv]) or main(["critical", *argv, "--branch", "spurious"]))
