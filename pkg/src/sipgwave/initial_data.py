"""Special initial data: branch-concentrated wave packets, modal projections,
Fourier filtering and bi-grid data with vanishing jumps."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .assembly import check_penalty
from .lattice import DGState, GridSpec, Spectrum, sdft_forward, sdft_inverse
from .symbols import PHYSICAL, check_branch, eigenvalues, eigenvectors, is_degenerate, mass_symbol

TAIL_BOUND = 1e-8


class TailError(ValueError):
    """Packet envelope not negligible at the edge of the periodic domain."""


@dataclass(frozen=True)
class GaussianEnvelope:
    """phi(x) = exp(-x^2 / 2), phi_hat(eta) = sqrt(2 pi) exp(-eta^2 / 2)."""

    def fhat(self, eta):
        return np.sqrt(2 * np.pi) * np.exp(-0.5 * np.asarray(eta) ** 2)

    def decay(self, z):
        """|phi(z)| / |phi(0)|."""
        return np.exp(-0.5 * np.asarray(z) ** 2)


ENVELOPES = {"gaussian": GaussianEnvelope()}


def default_gamma(h: float) -> float:
    return h ** -0.5


@dataclass(frozen=True)
class WavePacketSpec:
    x_star: float
    xi0: float
    gamma: float
    branch: str = PHYSICAL
    envelope: str = "gaussian"

    def __post_init__(self):
        check_branch(self.branch)
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.envelope not in ENVELOPES:
            raise ValueError(f"unknown envelope {self.envelope!r}")


def packet_profile(spec: WavePacketSpec, xi: np.ndarray) -> np.ndarray:
    """u_hat^0 on the frequency samples ``xi`` (all inside the band)."""
    env = ENVELOPES[spec.envelope]
    g = spec.gamma
    return (
        np.sqrt(2 * np.pi / g)
        * env.fhat((xi - spec.xi0) / g)
        * np.exp(-1j * spec.x_star * (xi - spec.xi0))
    )


def packet_tail(spec: WavePacketSpec, grid: GridSpec) -> float:
    """Relative size of the envelope at the nearest domain edge."""
    env = ENVELOPES[spec.envelope]
    d = min(grid.L - spec.x_star, grid.L + spec.x_star)
    return float(env.decay(spec.gamma * d))


def make_wavepacket(spec: WavePacketSpec, grid: GridSpec, s: float, check_tails: bool = True):
    """Initial data (U0, U1) concentrated on one branch near (x*, xi0).

    The velocity is chosen so that only the exp(+i t lambda) wave is present,
    hence the data are complex valued.
    """
    s = check_penalty(s)
    h = grid.h
    if abs(spec.xi0) > np.pi / h:
        raise ValueError("carrier frequency outside [-pi/h, pi/h]")
    if spec.gamma < 4 or h * spec.gamma > 0.25:
        warnings.warn(
            f"gamma = {spec.gamma:.4g} with h gamma = {h * spec.gamma:.4g} is outside "
            "the concentration regime gamma >= 4, h gamma <= 1/4",
            stacklevel=2,
        )
    if check_tails:
        tail = packet_tail(spec, grid)
        if tail > TAIL_BOUND:
            raise TailError(
                f"packet envelope at the domain edge is {tail:.3g} of its peak; "
                "increase L or gamma"
            )
    xi = grid.xi
    u0 = packet_profile(spec, xi)
    vph, vsp = eigenvectors(xi, h, s)
    Lph, Lsp = eigenvalues(xi, h, s)
    if spec.branch == PHYSICAL:
        v, lam = vph, np.sqrt(Lph)
    else:
        v, lam = vsp, np.sqrt(Lsp)
    U0h = v * u0[:, None]
    U1h = v * (1j * lam * u0)[:, None]
    U0 = sdft_inverse(Spectrum.from_stacked(xi, U0h), grid)
    U1 = sdft_inverse(Spectrum.from_stacked(xi, U1h), grid)
    return U0, U1


def mode_project(pair, grid: GridSpec, s: float, branch: str):
    """M-orthogonal projection of a spectrum pair onto one eigenbranch.

    ``pair`` is (U0hat, U1hat) as Spectrum objects; the projector at each
    frequency is w -> v (v^* M w) with v^* M v = 1. Frequencies where the
    pencil is degenerate use the one-sided eigenvectors and trigger a warning.
    """
    s = check_penalty(s)
    branch = check_branch(branch)
    xi = grid.xi
    if is_degenerate(xi * grid.h, s).any():
        warnings.warn("degenerate frequency in projection; using one-sided eigenvectors", stacklevel=2)
    M = mass_symbol(xi * grid.h)
    vph, vsp = eigenvectors(xi, grid.h, s)
    v = vph if branch == PHYSICAL else vsp
    out = []
    for sp in pair:
        w = sp.stacked()
        coef = np.einsum("ki,kij,kj->k", np.conj(v), M, w)
        out.append(Spectrum.from_stacked(sp.xi, v * coef[:, None]))
    return tuple(out)


def project_state(U: DGState, V: DGState, grid: GridSpec, s: float, branch: str):
    """Physical-space wrapper around :func:`mode_project`."""
    pu, pv = mode_project((sdft_forward(U, grid), sdft_forward(V, grid)), grid, s, branch)
    real = np.isrealobj(U.A) and np.isrealobj(U.J) and np.isrealobj(V.A) and np.isrealobj(V.J)
    outs = []
    for p in (pu, pv):
        st = sdft_inverse(p, grid)
        outs.append(DGState(st.A.real.copy(), st.J.real.copy()) if real else st)
    return tuple(outs)


def fourier_filter(state: DGState, grid: GridSpec, delta: float) -> DGState:
    """Remove all spectral content with |xi| > pi delta / h."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    sp = sdft_forward(state, grid)
    keep = np.abs(sp.xi) <= np.pi * delta / grid.h
    out = Spectrum(sp.xi, np.where(keep, sp.Ahat, 0), np.where(keep, sp.Jhat, 0))
    real = np.isrealobj(state.A) and np.isrealobj(state.J)
    res = sdft_inverse(out, grid)
    if real:
        return DGState(res.A.real.copy(), res.J.real.copy())
    return res


def bigrid_data(odd_values, grid: GridSpec) -> DGState:
    """Zero jumps, A given on odd nodes and averaged into even nodes:
    A_{2j} = (A_{2j+1} + A_{2j-1}) / 2, periodically."""
    odd = np.asarray(odd_values)
    if odd.shape != (grid.N // 2,):
        raise ValueError(f"expected {grid.N // 2} odd-node values, got shape {odd.shape}")
    A = np.zeros(grid.N, dtype=odd.dtype if np.iscomplexobj(odd) else float)
    A[1::2] = odd
    A[0::2] = 0.5 * (odd + np.roll(odd, 1))
    return DGState(A, np.zeros_like(A))


def random_window(grid: GridSpec, seed: int, halfwidth: float = 0.5) -> np.ndarray:
    """Seeded standard normal values on nodes with |x_j| < halfwidth, zero elsewhere."""
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(grid.N)
    return np.where(np.abs(grid.x) < halfwidth, vals, 0.0)


def random_bigrid(grid: GridSpec, seed: int, halfwidth: float = 0.5):
    """Bi-grid displacement and velocity from seeded random odd-node values."""
    rng = np.random.default_rng(seed)
    xo = grid.x[1::2]
    mask = np.abs(xo) < halfwidth
    u0 = np.where(mask, rng.standard_normal(xo.size), 0.0)
    u1 = np.where(mask, rng.standard_normal(xo.size), 0.0)
    return bigrid_data(u0, grid), bigrid_data(u1, grid)


def random_filtered(grid: GridSpec, s: float, seed: int, delta: float, halfwidth: float = 0.5,
                    branch: str = PHYSICAL):
    """Seeded random data projected on one branch and Fourier filtered."""
    rng = np.random.default_rng(seed)
    mask = np.abs(grid.x) < halfwidth
    comps = [np.where(mask, rng.standard_normal(grid.N), 0.0) for _ in range(4)]
    U = DGState(comps[0], comps[1])
    V = DGState(comps[2], comps[3])
    U, V = project_state(U, V, grid, s, branch)
    return fourier_filter(U, grid, delta), fourier_filter(V, grid, delta)
