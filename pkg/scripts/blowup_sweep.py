"""Observability quotient along an h sweep for packets concentrated near the
band edge, on either branch, plus a low-frequency control run.

Prints one line per run and writes the tables under --out.
"""

import argparse
from dataclasses import asdict
from pathlib import Path

import numpy as np

from sipgwave.observability import ObsExperimentSpec, blowup_experiment
from sipgwave.output import write_csv, write_json


def parse():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--T", type=float, default=4.0)
    p.add_argument("--fracs", type=float, nargs="+", default=[0.95, 0.98],
                   help="carriers as fractions of pi/h")
    p.add_argument("--h", type=float, nargs="+", default=[1 / 50, 1 / 100, 1 / 200])
    p.add_argument("--jobs", type=int, default=3)
    p.add_argument("--out", type=Path, default=Path("results/blowup"))
    return p.parse_args()


def runs(a):
    for frac in a.fracs:
        for branch in ("physical", "spurious"):
            yield f"{branch}_{frac:g}", dict(xi0_frac=frac, branch=branch)
    yield "control", dict(xi0_frac=0.2 / np.pi, branch="physical")


if __name__ == "__main__":
    a = parse()
    for name, kw in runs(a):
        spec = ObsExperimentSpec(s=a.s, T=a.T, hs=tuple(a.h), **kw)
        rep = blowup_experiment(spec, jobs=a.jobs)
        cfg = asdict(spec)
        cols = {k: [getattr(r, k) for r in rep.rows] for k in ("h", "N", "E_total", "intE_Omega", "C_h")}
        write_csv(a.out / f"{name}.csv", cols, cfg)
        write_json(a.out / f"{name}.json", rep.summary(), cfg)
        C = ", ".join(f"{c:.4g}" for c in rep.C)
        print(f"{name:>18}: C_h = [{C}]  min ratio {rep.ratio:.3g}  slope {rep.slope:.3g}  {rep.verdict}")
