"""Time evolution of M U'' + R U = 0 and the associated energies.

Two independent engines are provided: an exact per-frequency propagator
built on the eigenpairs of the symbol pencil, and a central-difference
(leapfrog) integrator in physical space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import MassSolver, assemble_mass, assemble_stiffness_stencil, check_penalty
from .lattice import DGState, GridSpec, Spectrum, sdft_forward, sdft_inverse
from .symbols import eigenvalues, eigenvectors, mass_symbol

_SINC_CUTOFF = 1e-12


class CFLError(ValueError):
    pass


class WrapError(ValueError):
    """The periodic domain is too short to emulate the real line."""


@dataclass(frozen=True)
class ObservationRegion:
    """Nodes with x_j outside the open interval (-a, a)."""

    grid: GridSpec
    a: float = 1.0
    complement: bool = False

    @property
    def index(self) -> np.ndarray:
        outside = np.abs(self.grid.x) >= self.a
        idx = np.nonzero(~outside if self.complement else outside)[0]
        if idx.size == 0:
            raise ValueError("observation region contains no nodes")
        return idx


def total_energy(U: DGState, V: DGState, grid: GridSpec, s: float) -> float:
    """1/2 (<R U, U> + <M V, V>) with the unweighted l2 pairing."""
    R = assemble_stiffness_stencil(grid, s)
    M = assemble_mass(grid)
    return 0.5 * (R.pair(U, U) + M.pair(V, V))


def local_energy(U: DGState, V: DGState, grid: GridSpec, s: float, region=None) -> float:
    """Energy with the pairing restricted to the nodes of ``region``.

    The operators act on the whole state; only the outer sum is restricted.
    ``region`` may be an ObservationRegion or an index array.
    """
    if region is None:
        region = ObservationRegion(grid)
    idx = region.index if isinstance(region, ObservationRegion) else np.asarray(region)
    if idx.size == 0:
        raise ValueError("observation region contains no nodes")
    R = assemble_stiffness_stencil(grid, s)
    M = assemble_mass(grid)
    return 0.5 * (R.pair(U, U, idx) + M.pair(V, V, idx))


def energy_density(U: np.ndarray, V: np.ndarray, grid: GridSpec, s: float) -> np.ndarray:
    """Per-node energy for stacked states of shape (..., N, 2).

    Summing over any node subset gives the corresponding local energy.
    """
    R = assemble_stiffness_stencil(grid, s).stencil
    M = assemble_mass(grid).stencil

    def act(st, u):
        return (
            np.roll(u, 1, axis=-2) @ st.left.T
            + u @ st.center.T
            + np.roll(u, -1, axis=-2) @ st.right.T
        )

    e = np.real(np.sum(np.conj(U) * act(R, U), axis=-1) + np.sum(np.conj(V) * act(M, V), axis=-1))
    return 0.5 * e


def fourier_energy(U: DGState, V: DGState, grid: GridSpec, s: float) -> float:
    """Total energy evaluated on the spectrum (Parseval):
    1/(4 pi) sum_k dxi [U^* R(xi_k) U + V^* M(xi_k) V]."""
    from .symbols import symbols

    sym = symbols(grid.xi, grid.h, s)
    u = sdft_forward(U, grid).stacked()
    v = sdft_forward(V, grid).stacked()
    qu = np.einsum("ki,kij,kj->k", np.conj(u), sym.R, u)
    qv = np.einsum("ki,kij,kj->k", np.conj(v), sym.M, v)
    return float(np.real(np.sum(qu + qv)) * grid.dxi / (4 * np.pi))


@dataclass
class EvolutionResult:
    times: np.ndarray
    U: np.ndarray  # (nt, N, 2)
    V: np.ndarray  # (nt, N, 2)
    grid: GridSpec
    s: float
    energy_trace: np.ndarray = field(init=False)
    local_energy_trace: np.ndarray = field(init=False)
    region: ObservationRegion | None = None

    def __post_init__(self):
        if self.region is None:
            self.region = ObservationRegion(self.grid)
        dens = energy_density(self.U, self.V, self.grid, self.s)
        self.energy_trace = dens.sum(axis=-1)
        self.local_energy_trace = dens[:, self.region.index].sum(axis=-1)

    def state(self, i: int):
        return DGState.from_stacked(self.U[i]), DGState.from_stacked(self.V[i])

    def integrated_local_energy(self) -> float:
        return float(np.trapezoid(self.local_energy_trace, self.times))


def modal_coefficients(u0: np.ndarray, u1: np.ndarray, xi: np.ndarray, h: float, s: float):
    """Coefficients of the spectra (k, 2) in the M-orthonormal eigenbasis.

    Returns (vecs, lams, a, c) with vecs[b] of shape (k, 2) and a[b], c[b]
    the displacement and velocity coefficients for branch b = 0 (physical),
    1 (spurious).
    """
    M = mass_symbol(xi * h)
    vph, vsp = eigenvectors(xi, h, s)
    Lph, Lsp = eigenvalues(xi, h, s)
    vecs = (vph, vsp)
    lams = (np.sqrt(Lph), np.sqrt(Lsp))
    a = [np.einsum("ki,kij,kj->k", np.conj(v), M, u0) for v in vecs]
    c = [np.einsum("ki,kij,kj->k", np.conj(v), M, u1) for v in vecs]
    return vecs, lams, a, c


def evolve_spectral(
    U0: DGState,
    U1: DGState,
    grid: GridSpec,
    s: float,
    times,
    region: ObservationRegion | None = None,
) -> EvolutionResult:
    """Exact solution of the semi-discrete system at the requested times."""
    s = check_penalty(s)
    U0.check(grid)
    U1.check(grid)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    xi, h = grid.xi, grid.h
    f0 = sdft_forward(U0, grid)
    f1 = sdft_forward(U1, grid)
    vecs, lams, a, c = modal_coefficients(f0.stacked(), f1.stacked(), xi, h, s)
    t = times[:, None]
    Uh = 0
    Vh = 0
    for v, lam, ab, cb in zip(vecs, lams, a, c):
        lt = lam[None, :] * t
        small = lam[None, :] <= _SINC_CUTOFF
        with np.errstate(divide="ignore", invalid="ignore"):
            sinc = np.where(small, t, np.sin(lt) / np.where(small, 1.0, lam[None, :]))
        disp = np.cos(lt) * ab + sinc * cb
        vel = -lam[None, :] * np.sin(lt) * ab + np.cos(lt) * cb
        Uh = Uh + disp[..., None] * v[None]
        Vh = Vh + vel[..., None] * v[None]
    real = all(
        np.isrealobj(x) or not np.any(np.imag(x))
        for x in (U0.A, U0.J, U1.A, U1.J)
    )
    U = _inverse_stack(Uh, grid, real)
    V = _inverse_stack(Vh, grid, real)
    # t = 0 is returned as given rather than after a transform round trip
    at0 = times == 0
    U[at0] = U0.stacked()
    V[at0] = U1.stacked()
    return EvolutionResult(times, U, V, grid, s, region=region)


def _inverse_stack(fh: np.ndarray, grid: GridSpec, real: bool) -> np.ndarray:
    """Inverse SDFT of (nt, N, 2) spectra."""
    out = np.empty(fh.shape, dtype=float if real else complex)
    for i in range(fh.shape[0]):
        st = sdft_inverse(Spectrum.from_stacked(grid.xi, fh[i]), grid)
        u = st.stacked()
        out[i] = u.real if real else u
    return out


def max_frequency(grid: GridSpec, s: float) -> float:
    """Largest temporal frequency max_k lambda_sp(xi_k) on the grid."""
    _, Lsp = eigenvalues(grid.xi, grid.h, s)
    return float(np.sqrt(np.max(Lsp)))


def leapfrog(
    U0: DGState,
    U1: DGState,
    grid: GridSpec,
    s: float,
    dt: float | None,
    T: float,
    safety: float = 0.5,
    sample_every: int = 1,
    region: ObservationRegion | None = None,
) -> EvolutionResult:
    """Central differences M (U^{n+1} - 2U^n + U^{n-1}) / dt^2 + R U^n = 0.

    ``dt`` must satisfy dt <= safety * 2 / lambda_max; when None it is set to
    that bound. The step is then shrunk so that T is a whole number of steps.
    Velocities at interior steps are centred differences; the last sample
    uses one extra step.
    """
    s = check_penalty(s)
    U0.check(grid)
    U1.check(grid)
    lam_max = max_frequency(grid, s)
    dt_max = safety * 2 / lam_max
    if dt is None:
        dt = dt_max
    if dt > dt_max * (1 + 1e-12):
        raise CFLError(
            f"time step {dt:.6g} exceeds the admissible {dt_max:.6g} "
            f"(lambda_max = {lam_max:.6g}, safety = {safety})"
        )
    nsteps = max(1, int(np.ceil(T / dt - 1e-9)))
    dt = T / nsteps
    Mop = assemble_mass(grid)
    Rop = assemble_stiffness_stencil(grid, s)
    solver = MassSolver(Mop)

    def accel(u):
        return -solver.solve_stacked(Rop.apply(DGState.from_stacked(u)).stacked())

    real = np.isrealobj(U0.A) and np.isrealobj(U0.J) and np.isrealobj(U1.A) and np.isrealobj(U1.J)
    dtype = float if real else complex
    u_prev = U0.stacked().astype(dtype)
    v0 = U1.stacked().astype(dtype)
    u_cur = u_prev + dt * v0 + 0.5 * dt**2 * accel(u_prev)
    Us, Vs, ts = [u_prev], [v0], [0.0]
    n = 1
    while n <= nsteps:
        u_next = 2 * u_cur - u_prev + dt**2 * accel(u_cur)
        if n % sample_every == 0 or n == nsteps:
            Us.append(u_cur)
            Vs.append((u_next - u_prev) / (2 * dt))
            ts.append(n * dt)
        u_prev, u_cur = u_cur, u_next
        n += 1
    return EvolutionResult(np.array(ts), np.array(Us), np.array(Vs), grid, s, region=region)


def spurious_fraction(U: DGState, V: DGState, grid: GridSpec, s: float) -> float:
    """Share of the total energy carried by the spurious eigenmode."""
    f0 = sdft_forward(U, grid).stacked()
    f1 = sdft_forward(V, grid).stacked()
    _, lams, a, c = modal_coefficients(f0, f1, grid.xi, grid.h, s)
    parts = [np.sum(l**2 * np.abs(ab) ** 2 + np.abs(cb) ** 2) for l, ab, cb in zip(lams, a, c)]
    tot = parts[0] + parts[1]
    return float(parts[1] / tot) if tot > 0 else 0.0


def check_wrap(L: float, v_max: float, T: float, gamma: float | None, a: float = 1.0):
    """Refuse runs where waves could travel around the torus.

    Requires L >= a + v_max T + 6 / gamma.
    """
    margin = 6.0 / gamma if gamma else 0.0
    need = a + v_max * T + margin
    if L < need:
        raise WrapError(f"half-width L = {L:.6g} too small; need at least {need:.6g}")
    return need
