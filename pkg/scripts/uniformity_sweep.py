"""Observability quotient along an h sweep for Fourier-filtered and bi-grid
data, repeated over several seeds."""

import argparse
from pathlib import Path

from sipgwave.observability import ObsExperimentSpec, uniform_time, uniformity_experiment
from sipgwave.output import write_csv


def parse():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--T", type=float, default=4.0)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--h", type=float, nargs="+", default=[1 / 50, 1 / 100, 1 / 200])
    p.add_argument("--jobs", type=int, default=3)
    p.add_argument("--out", type=Path, default=Path("results/uniformity"))
    return p.parse_args()


if __name__ == "__main__":
    a = parse()
    print(f"travel-time bound for delta = {a.delta}: {uniform_time(min(a.h), a.s, a.delta):.4g}")
    table = {k: [] for k in ("data", "seed", "ratio", "C_min", "C_max")}
    for data in ("fourier", "bigrid"):
        for seed in a.seeds:
            spec = ObsExperimentSpec(s=a.s, T=a.T, hs=tuple(a.h), data=data, delta=a.delta, seed=seed)
            rep = uniformity_experiment(spec, jobs=a.jobs)
            for k, v in (("data", data), ("seed", seed), ("ratio", rep.ratio),
                         ("C_min", rep.C.min()), ("C_max", rep.C.max())):
                table[k].append(v)
            print(f"{data:>8} seed {seed}: ratio {rep.ratio:.4f}  {rep.verdict}")
    write_csv(a.out / "uniformity.csv", table, {"script": "uniformity_sweep", **vars(a), "out": str(a.out)})
