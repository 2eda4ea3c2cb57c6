"""Command-line front end.

Every subcommand resolves its parameters as defaults < YAML config file
(--config) < command-line flags, validates them, and writes its outputs into
--out with a provenance header. Outputs depend only on the resolved
configuration, so identical runs are byte-identical.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .evolution import (
    ObservationRegion,
    check_wrap,
    evolve_spectral,
    leapfrog,
    max_frequency,
    spurious_fraction,
)
from .initial_data import (
    WavePacketSpec,
    bigrid_data,
    default_gamma,
    fourier_filter,
    make_wavepacket,
    random_bigrid,
    random_filtered,
)
from .lattice import DGState, GridSpec, sdft_forward
from .observability import ObsExperimentSpec, blowup_experiment, uniform_time, uniformity_experiment
from .output import write_json, write_table
from .symbols import (
    PHYSICAL,
    SPURIOUS,
    branch_curve,
    check_branch,
    dispersion,
    find_critical_points,
    group_velocity,
)

log = logging.getLogger("sipgwave")

DEFAULTS = {
    "s": [2.0],
    "h": [1.0],
    "N": None,
    "L": None,
    "T": 4.0,
    "dt_safety": 0.5,
    "delta": 0.5,
    "xi0_frac": [0.95],
    "gamma": None,
    "branch": PHYSICAL,
    "filter": "none",
    "engine": "spectral",
    "out": "out",
    "seed": 0,
    "format": "csv",
    "samples": 4096,
    "x_star": 0.0,
    "kind": None,
    "halfwidth": 0.5,
    "n_times": 401,
    "snapshots": 5,
    "jobs": 1,
}

LIST_KEYS = ("s", "h", "xi0_frac")


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            loaded = yaml.safe_load(fh) or {}
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key in LIST_KEYS:
        cfg[key] = [float(x) for x in _as_list(cfg[key])]
    cfg["command"] = args.command
    validate(cfg)
    return cfg


def validate(cfg: dict):
    if any(not s > 1 for s in cfg["s"]):
        raise ValueError("penalty parameter must satisfy s > 1")
    if any(not h > 0 for h in cfg["h"]):
        raise ValueError("mesh size h must be positive")
    if not 0 < cfg["delta"] < 1:
        raise ValueError("delta must lie in (0, 1)")
    if cfg["N"] is not None and (int(cfg["N"]) <= 0 or int(cfg["N"]) % 2):
        raise ValueError("N must be a positive even integer")
    if cfg["L"] is not None and not cfg["L"] > 0:
        raise ValueError("L must be positive")
    if not cfg["T"] > 0:
        raise ValueError("T must be positive")
    if not 0 < cfg["dt_safety"] <= 1:
        raise ValueError("dt-safety must lie in (0, 1]")
    if any(not 0 <= f <= 1 for f in cfg["xi0_frac"]):
        raise ValueError("xi0-frac must lie in [0, 1]")
    if cfg["gamma"] is not None and not cfg["gamma"] > 0:
        raise ValueError("gamma must be positive")
    cfg["branch"] = check_branch(cfg["branch"])
    if cfg["filter"] not in ("none", "fourier", "bigrid"):
        raise ValueError("filter must be none, fourier or bigrid")
    if cfg["engine"] not in ("spectral", "leapfrog", "both"):
        raise ValueError("engine must be spectral, leapfrog or both")
    if cfg["format"] not in ("csv", "json"):
        raise ValueError("format must be csv or json")
    if cfg["kind"] not in (None, "blowup", "uniformity"):
        raise ValueError("kind must be blowup or uniformity")
    if int(cfg["samples"]) < 2:
        raise ValueError("samples must be at least 2")


def _tag(x: float) -> str:
    return f"{x:g}".replace(".", "p")


# --- subcommands -----------------------------------------------------------

def cmd_dispersion(cfg: dict):
    out = Path(cfg["out"])
    h, n = cfg["h"][0], int(cfg["samples"])
    files = []
    for s in cfg["s"]:
        curve = branch_curve(h, s, n)
        files.append(write_table(out / f"dispersion_s{_tag(s)}", curve.as_columns(), cfg, cfg["format"]))
        rows = {"branch": [], "xi": [], "lambda": [], "vg": []}
        for branch in (PHYSICAL, SPURIOUS):
            for xi in find_critical_points(h, s, branch, max(n, 2048)):
                rows["branch"].append(branch)
                rows["xi"].append(xi)
                rows["lambda"].append(float(dispersion(xi, h, s, branch)))
                rows["vg"].append(float(group_velocity(xi, h, s, branch, one_sided=True)))
        files.append(write_table(out / f"critical_s{_tag(s)}", rows, cfg, cfg["format"]))
    return files


def cmd_critical(cfg: dict):
    out = Path(cfg["out"])
    h, n = cfg["h"][0], max(int(cfg["samples"]), 2048)
    rows = {"s": [], "branch": [], "xi": [], "xi_h_over_pi": []}
    for s in cfg["s"]:
        for xi in find_critical_points(h, s, cfg["branch"], n):
            rows["s"].append(s)
            rows["branch"].append(cfg["branch"])
            rows["xi"].append(xi)
            rows["xi_h_over_pi"].append(xi * h / np.pi)
    return [write_table(out / "critical", rows, cfg, cfg["format"])]


def cmd_groupvel(cfg: dict):
    out = Path(cfg["out"])
    h = cfg["h"][0]
    cols = {k: [] for k in ("s", "xi", "vg_ph", "vg_sp", "vg_ph_fd", "vg_sp_fd")}
    step = 1e-6 / h
    for s in cfg["s"]:
        for frac in cfg["xi0_frac"]:
            xi = frac * np.pi / h
            cols["s"].append(s)
            cols["xi"].append(xi)
            for b, key in ((PHYSICAL, "ph"), (SPURIOUS, "sp")):
                cols[f"vg_{key}"].append(float(group_velocity(xi, h, s, b, one_sided=True)))
                lo, hi = max(xi - step, 0.0), min(xi + step, np.pi / h)
                fd = (dispersion(hi, h, s, b) - dispersion(lo, h, s, b)) / (hi - lo)
                cols[f"vg_{key}_fd"].append(float(fd))
    return [write_table(out / "groupvel", cols, cfg, cfg["format"])]


def _sim_data(cfg: dict, s: float):
    """Grid and data for the simulate subcommand."""
    h = cfg["h"][0]
    T = cfg["T"]
    frac = cfg["xi0_frac"][0]
    if cfg["N"] is not None and cfg["L"] is not None:
        grid = GridSpec(float(cfg["L"]), int(cfg["N"]))
    elif cfg["N"] is not None:
        grid = GridSpec(int(cfg["N"]) * h / 2, int(cfg["N"]))
    else:
        need = 1 + 1.5 * T + (6 / (cfg["gamma"] or default_gamma(h)))
        grid = GridSpec.from_spacing(h, cfg["L"] or need)
    gamma = cfg["gamma"] or default_gamma(grid.h)
    if cfg["filter"] == "none":
        xi0 = frac * np.pi / grid.h
        v = abs(float(group_velocity(xi0, grid.h, s, cfg["branch"], one_sided=True)))
        check_wrap(grid.L, v, T, gamma, a=abs(cfg["x_star"]))
        pk = WavePacketSpec(cfg["x_star"], xi0, gamma, cfg["branch"])
        U0, U1 = make_wavepacket(pk, grid, s)
    elif cfg["filter"] == "fourier":
        U0, U1 = random_filtered(grid, s, cfg["seed"], cfg["delta"], cfg["halfwidth"])
    else:
        U0, U1 = random_bigrid(grid, cfg["seed"], cfg["halfwidth"])
    return grid, U0, U1


def _snapshot_columns(res, grid, idx):
    cols = {k: [] for k in ("t", "x", "A_re", "A_im", "J_re", "J_im")}
    for i in idx:
        U = res.U[i]
        cols["t"].extend([res.times[i]] * grid.N)
        cols["x"].extend(grid.x)
        cols["A_re"].extend(np.real(U[:, 0]))
        cols["A_im"].extend(np.imag(U[:, 0]))
        cols["J_re"].extend(np.real(U[:, 1]))
        cols["J_im"].extend(np.imag(U[:, 1]))
    return cols


def cmd_simulate(cfg: dict):
    out = Path(cfg["out"])
    s = cfg["s"][0]
    T = cfg["T"]
    grid, U0, U1 = _sim_data(cfg, s)
    region = ObservationRegion(grid)
    files = []
    results = {}
    nsnap = max(int(cfg["snapshots"]), 2)
    if cfg["engine"] in ("leapfrog", "both"):
        dt = cfg["dt_safety"] * 2 / max_frequency(grid, s)
        per = max(1, int(np.ceil(T / (int(cfg["n_times"]) - 1) / dt)))
        dt = T / ((int(cfg["n_times"]) - 1) * per)
        results["leapfrog"] = leapfrog(U0, U1, grid, s, dt, T, cfg["dt_safety"], per, region)
        times = results["leapfrog"].times
    else:
        times = np.linspace(0, T, int(cfg["n_times"]))
    if cfg["engine"] in ("spectral", "both"):
        results["spectral"] = evolve_spectral(U0, U1, grid, s, times, region)
    for name, res in results.items():
        cols = {
            "t": res.times,
            "E_total": res.energy_trace,
            "E_Omega": res.local_energy_trace,
        }
        files.append(write_table(out / f"energy_{name}", cols, cfg, cfg["format"]))
        idx = np.unique(np.linspace(0, len(res.times) - 1, nsnap).round().astype(int))
        files.append(write_table(out / f"snapshots_{name}", _snapshot_columns(res, grid, idx), cfg, cfg["format"]))
    if cfg["engine"] == "both":
        a, b = results["leapfrog"], results["spectral"]
        err = np.linalg.norm(a.U - b.U, axis=(1, 2)) / max(np.linalg.norm(b.U[0]), 1e-300)
        files.append(write_table(out / "cross_engine", {"t": a.times, "rel_l2_error": err}, cfg, cfg["format"]))
        files.append(write_json(out / "cross_engine_summary.json", {
            "final_rel_l2_error": float(err[-1]),
            "max_rel_l2_error": float(err.max()),
        }, cfg))
    return files


def _obs_spec(cfg: dict) -> ObsExperimentSpec:
    data = {"none": "packet", "fourier": "fourier", "bigrid": "bigrid"}[cfg["filter"]]
    hs = cfg["h"] if len(cfg["h"]) > 1 or cfg["h"][0] != 1.0 else [1 / 50, 1 / 100, 1 / 200]
    engine = cfg["engine"] if cfg["engine"] != "both" else "spectral"
    return ObsExperimentSpec(
        s=cfg["s"][0],
        T=cfg["T"],
        hs=tuple(hs),
        data=data,
        branch=cfg["branch"],
        xi0_frac=cfg["xi0_frac"][0],
        x_star=cfg["x_star"],
        gamma=cfg["gamma"],
        delta=cfg["delta"],
        seed=int(cfg["seed"]),
        halfwidth=cfg["halfwidth"],
        engine=engine,
        n_times=int(cfg["n_times"]),
        dt_safety=cfg["dt_safety"],
    )


def cmd_observability(cfg: dict):
    out = Path(cfg["out"])
    spec = _obs_spec(cfg)
    kind = cfg["kind"] or ("blowup" if spec.data == "packet" else "uniformity")
    run = blowup_experiment if kind == "blowup" else uniformity_experiment
    report = run(spec, jobs=int(cfg["jobs"]))
    rows = report.rows
    cols = {
        "h": [r.h for r in rows],
        "N": [r.N for r in rows],
        "E_total": [r.E_total for r in rows],
        "intE_Omega": [r.intE_Omega for r in rows],
        "C_h": [r.C_h for r in rows],
    }
    summary = report.summary()
    if spec.data == "fourier":
        summary["uniform_time_bound"] = max(uniform_time(h, spec.s, spec.delta) for h in spec.hs)
    return [
        write_table(out / "observability", cols, cfg, cfg["format"]),
        write_json(out / "observability_summary.json", summary, cfg),
    ]


def cmd_filters(cfg: dict):
    out = Path(cfg["out"])
    s = cfg["s"][0]
    h = cfg["h"][0]
    N = int(cfg["N"]) if cfg["N"] is not None else 256
    grid = GridSpec(cfg["L"] or N * h / 2, N)
    rng = np.random.default_rng(int(cfg["seed"]))
    odd = rng.standard_normal(N // 2)
    bg = bigrid_data(odd, grid)
    inj = np.zeros(N)
    inj[1::2] = odd
    raw = DGState(inj, np.zeros(N))
    ff = fourier_filter(raw, grid, cfg["delta"])
    cols = {"xi": grid.xi}
    fracs = {}
    high = np.abs(grid.xi) > np.pi / (2 * grid.h)
    for name, st in (("injected", raw), ("bigrid", bg), ("fourier", ff)):
        p = np.abs(sdft_forward(st, grid).Ahat) ** 2
        cols[f"power_{name}"] = p
        fracs[name] = float(p[high].sum() / p.sum()) if p.sum() > 0 else 0.0
    zero = DGState(np.zeros(N), np.zeros(N))
    payload = {
        "high_frequency_fraction": fracs,
        "spurious_energy_fraction_bigrid": spurious_fraction(bg, zero, grid, s),
        "grid": {"L": grid.L, "N": grid.N, "h": grid.h},
    }
    return [
        write_table(out / "filters", cols, cfg, cfg["format"]),
        write_json(out / "filters_summary.json", payload, cfg),
    ]


COMMANDS = {
    "dispersion": cmd_dispersion,
    "groupvel": cmd_groupvel,
    "critical": cmd_critical,
    "simulate": cmd_simulate,
    "observability": cmd_observability,
    "filters": cmd_filters,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sipgwave", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"sipgwave {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="YAML file with any of the options below")
        sp.add_argument("--s", type=float, nargs="+", help="penalty parameter(s), > 1")
        sp.add_argument("--h", type=float, nargs="+", help="mesh size(s); a list is an h sweep")
        sp.add_argument("--N", type=int, help="even cell count")
        sp.add_argument("--L", type=float, help="half-width of the periodic domain")
        sp.add_argument("--T", type=float, help="final time")
        sp.add_argument("--dt-safety", dest="dt_safety", type=float, help="leapfrog CFL safety factor")
        sp.add_argument("--delta", type=float, help="Fourier filter fraction in (0, 1)")
        sp.add_argument("--xi0-frac", dest="xi0_frac", type=float, nargs="+",
                        help="carrier frequency as a fraction of pi/h")
        sp.add_argument("--gamma", type=float, help="packet concentration (default h^-1/2)")
        sp.add_argument("--x-star", dest="x_star", type=float, help="packet centre")
        sp.add_argument("--branch", help="physical or spurious")
        sp.add_argument("--filter", help="none, fourier or bigrid")
        sp.add_argument("--engine", help="spectral, leapfrog or both")
        sp.add_argument("--kind", help="observability experiment: blowup or uniformity")
        sp.add_argument("--samples", type=int, help="frequency samples on [0, pi/h]")
        sp.add_argument("--halfwidth", type=float, help="support half-width of random data")
        sp.add_argument("--n-times", dest="n_times", type=int, help="time samples on [0, T]")
        sp.add_argument("--snapshots", type=int, help="number of snapshot instants")
        sp.add_argument("--jobs", type=int, help="parallel sweep rows")
        sp.add_argument("--out", help="output directory (created if missing)")
        sp.add_argument("--seed", type=int, help="random seed")
        sp.add_argument("--format", help="csv or json")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        files = COMMANDS[args.command](cfg)
    except (ValueError, OSError) as exc:
        print(f"sipgwave {args.command}: error: {exc}", file=sys.stderr)
        return 2
    for f in files:
        log.info("wrote %s", f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
