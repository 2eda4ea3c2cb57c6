"""Observability-constant experiments.

For one solution the sharp constant in E <= C int_0^T E_Omega dt is the
quotient E / int_0^T E_Omega dt; the experiments report this lower bound on
the true constant C_h^s(T) over a sweep of mesh sizes.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .evolution import EvolutionResult, ObservationRegion, check_wrap, evolve_spectral, leapfrog
from .initial_data import (
    WavePacketSpec,
    default_gamma,
    make_wavepacket,
    packet_profile,
    random_bigrid,
    random_filtered,
)
from .lattice import GridSpec
from .symbols import BRANCHES, PHYSICAL, check_branch, group_velocity

DATA_KINDS = ("packet", "fourier", "bigrid")


@dataclass
class ObsExperimentSpec:
    s: float = 2.0
    T: float = 4.0
    hs: tuple = (1 / 50, 1 / 100, 1 / 200)
    data: str = "packet"
    branch: str = PHYSICAL
    xi0_frac: float = 0.95
    x_star: float = 0.0
    gamma: float | None = None  # None: h**-0.5 per mesh
    delta: float = 0.5
    seed: int = 0
    halfwidth: float = 0.5
    a: float = 1.0
    engine: str = "spectral"
    n_times: int = 401
    dt_safety: float = 0.5

    def __post_init__(self):
        self.hs = tuple(float(h) for h in self.hs)
        if not self.T > 0:
            raise ValueError("T must be positive")
        if any(b >= a for a, b in zip(self.hs, self.hs[1:])) or any(h <= 0 for h in self.hs):
            raise ValueError("h-list must be positive and strictly decreasing")
        if self.data not in DATA_KINDS:
            raise ValueError(f"data must be one of {DATA_KINDS}")
        if self.engine not in ("spectral", "leapfrog"):
            raise ValueError("engine must be 'spectral' or 'leapfrog'")
        self.branch = check_branch(self.branch)
        if self.data == "fourier" and not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")


@dataclass
class ObsRow:
    h: float
    N: int
    L: float
    E_total: float
    E_total_T: float
    intE_Omega: float
    C_h: float


@dataclass
class ObsReport:
    kind: str
    spec: ObsExperimentSpec
    rows: list = field(default_factory=list)
    slope: float = float("nan")
    residual: float = float("nan")
    verdict: str = ""
    ratio: float = float("nan")

    @property
    def C(self) -> np.ndarray:
        return np.array([r.C_h for r in self.rows])

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "slope": self.slope,
            "residual": self.residual,
            "ratio": self.ratio,
            "verdict": self.verdict,
            "note": "C_h is the quotient for one solution, a lower bound on the observability constant",
            "spec": asdict(self.spec),
        }


def observability_quotient(result: EvolutionResult) -> float:
    """E(0) / int_0^T E_Omega dt with trapezoidal quadrature in time."""
    denom = result.integrated_local_energy()
    if denom < 1e-300:
        warnings.warn("localized energy vanishes to machine precision; quotient is infinite")
        return float("inf")
    return float(result.energy_trace[0] / denom)


def uniform_time(h: float, s: float, delta: float, a: float = 1.0, samples: int = 2048) -> float:
    """Travel-time bound 2a / min group velocity of the physical branch over
    the filtered band |xi| <= pi delta / h."""
    xi = np.linspace(0, np.pi * delta / h, samples)
    vmin = float(np.min(group_velocity(xi, h, s, PHYSICAL)))
    return 2 * a / vmin


def _vmax(h, s, branches, xi=None):
    if xi is None:
        xi = np.linspace(0, np.pi / h, 2049)[:-1]
    return max(float(np.max(np.abs(group_velocity(xi, h, s, b, one_sided=True)))) for b in branches)


def build_data(spec: ObsExperimentSpec, h: float):
    """Grid and initial data for one row of a sweep."""
    s, T, a = spec.s, spec.T, spec.a
    if spec.data == "packet":
        gamma = spec.gamma if spec.gamma is not None else default_gamma(h)
        pk = WavePacketSpec(spec.x_star, spec.xi0_frac * np.pi / h, gamma, spec.branch)
        # speeds present in the packet spectrum
        xi = np.linspace(-np.pi / h, np.pi / h, 4097)
        prof = np.abs(packet_profile(pk, xi))
        v = _vmax(h, s, [spec.branch], xi[prof >= 1e-8 * prof.max()])
        need = a + v * T + 6 / gamma
        grid = GridSpec.from_spacing(h, need)
        check_wrap(grid.L, v, T, gamma, a)
        U0, U1 = make_wavepacket(pk, grid, s)
        return grid, U0, U1
    if spec.data == "fourier":
        v = _vmax(h, s, [PHYSICAL])
        grid = GridSpec.from_spacing(h, a + v * T)
        check_wrap(grid.L, v, T, None, a)
        U0, U1 = random_filtered(grid, s, spec.seed, spec.delta, spec.halfwidth)
        return grid, U0, U1
    v = _vmax(h, s, BRANCHES)
    grid = GridSpec.from_spacing(h, a + v * T)
    check_wrap(grid.L, v, T, None, a)
    U0, U1 = random_bigrid(grid, spec.seed, spec.halfwidth)
    return grid, U0, U1


def run_row(spec: ObsExperimentSpec, h: float):
    grid, U0, U1 = build_data(spec, h)
    region = ObservationRegion(grid, spec.a)
    times = np.linspace(0, spec.T, spec.n_times)
    if spec.engine == "spectral":
        res = evolve_spectral(U0, U1, grid, spec.s, times, region=region)
    else:
        from .evolution import max_frequency

        dt = spec.dt_safety * 2 / max_frequency(grid, spec.s)
        steps_per_sample = max(1, int(np.ceil((spec.T / (spec.n_times - 1)) / dt)))
        dt = spec.T / ((spec.n_times - 1) * steps_per_sample)
        res = leapfrog(U0, U1, grid, spec.s, dt, spec.T, spec.dt_safety, steps_per_sample, region)
    q = observability_quotient(res)
    row = ObsRow(
        h=h,
        N=grid.N,
        L=grid.L,
        E_total=float(res.energy_trace[0]),
        E_total_T=float(res.energy_trace[-1]),
        intE_Omega=res.integrated_local_energy(),
        C_h=q,
    )
    return row, res


def _fit(report: ObsReport):
    hs = np.array([r.h for r in report.rows])
    C = report.C
    if len(hs) >= 2 and np.all(np.isfinite(C)) and np.all(C > 0):
        x, y = np.log(1 / hs), np.log(C)
        coef = np.polyfit(x, y, 1)
        report.slope = float(coef[0])
        report.residual = float(np.sqrt(np.mean((np.polyval(coef, x) - y) ** 2)))


def _sweep(spec: ObsExperimentSpec, jobs: int) -> list:
    with ThreadPoolExecutor(max_workers=max(int(jobs), 1)) as pool:
        rows = [row for row, _ in pool.map(lambda h: run_row(spec, h), spec.hs)]
    for row in rows:
        if not row.E_total > 0:
            raise ValueError(f"initial data carry zero energy at h = {row.h:g}")
    return rows


def blowup_experiment(spec: ObsExperimentSpec, min_ratio: float = 2.0, jobs: int = 1) -> ObsReport:
    """C_h along the h-list for concentrated data; verdict 'blow-up' when C_h
    grows monotonically by at least ``min_ratio`` at every refinement."""
    report = ObsReport("blowup", spec, _sweep(spec, jobs))
    _fit(report)
    C = report.C
    ratios = C[1:] / C[:-1]
    report.ratio = float(np.min(ratios)) if ratios.size else float("nan")
    report.verdict = "blow-up" if ratios.size and np.all(ratios >= min_ratio) else "no blow-up"
    return report


def uniformity_experiment(spec: ObsExperimentSpec, max_ratio: float = 2.0, jobs: int = 1) -> ObsReport:
    """C_h along the h-list for filtered data; verdict 'uniform' when
    max C_h / min C_h <= ``max_ratio``.

    For Fourier-filtered data T must exceed the travel-time bound of
    :func:`uniform_time` on every mesh.
    """
    if spec.data == "fourier":
        t_u = max(uniform_time(h, spec.s, spec.delta, spec.a) for h in spec.hs)
        if spec.T <= t_u:
            raise ValueError(f"T = {spec.T} does not exceed the uniform time bound {t_u:.4g}")
    report = ObsReport("uniformity", spec, _sweep(spec, jobs))
    _fit(report)
    C = report.C
    report.ratio = float(np.max(C) / np.min(C))
    report.verdict = "uniform" if report.ratio <= max_ratio else "not uniform"
    return report
