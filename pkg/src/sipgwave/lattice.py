"""Periodic lattices, two-component nodal states and the semi-discrete Fourier transform.

The transform pair on a grid of N nodes x_j = -L + j h is

    f_hat(xi_k) = h * sum_j f_j exp(-i xi_k x_j),
    f_j         = (1 / 2 pi) * sum_k f_hat(xi_k) exp(i xi_k x_j) * dxi,

with xi_k = 2 pi k / (N h), k = -N/2 .. N/2 - 1, and dxi = 2 pi / (N h).
Spectra are stored in ascending xi order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L, L) with N cells."""

    L: float
    N: int

    def __post_init__(self):
        if self.N <= 0 or self.N % 2:
            raise ValueError(f"N must be a positive even integer, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @classmethod
    def from_spacing(cls, h: float, L_min: float, pow2: bool = True) -> "GridSpec":
        """Smallest grid with spacing h whose half-width is at least L_min.

        With ``pow2`` the cell count is rounded up to a power of two so the
        FFT path is used.
        """
        n = int(np.ceil(2 * L_min / h - 1e-9))
        n += n % 2
        if pow2:
            n = 1 << int(np.ceil(np.log2(n)))
        return cls(L=n * h / 2, N=n)

    @property
    def h(self) -> float:
        return 2 * self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    @property
    def xi(self) -> np.ndarray:
        k = np.arange(-self.N // 2, self.N // 2)
        return np.pi * k / self.L

    @property
    def dxi(self) -> float:
        return np.pi / self.L

    def origin_index(self) -> int:
        """Index of the node sitting at x = 0."""
        return self.N // 2


@dataclass
class DGState:
    """Averages A_j and jumps J_j at every node. Arrays may be complex."""

    A: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A)
        self.J = np.asarray(self.J)
        if self.A.shape != self.J.shape or self.A.ndim != 1:
            raise ValueError(
                f"A and J must be 1-d with equal length, got {self.A.shape} and {self.J.shape}"
            )

    @classmethod
    def zeros(cls, grid: GridSpec, dtype=float) -> "DGState":
        return cls(np.zeros(grid.N, dtype=dtype), np.zeros(grid.N, dtype=dtype))

    @classmethod
    def from_stacked(cls, u: np.ndarray) -> "DGState":
        """Inverse of :meth:`stacked`: an (N, 2) array of (A_j, J_j) rows."""
        return cls(u[:, 0].copy(), u[:, 1].copy())

    def stacked(self) -> np.ndarray:
        return np.stack([self.A, self.J], axis=-1)

    def __len__(self):
        return self.A.shape[0]

    def check(self, grid: GridSpec):
        if len(self) != grid.N:
            raise ValueError(f"state has {len(self)} nodes, grid has {grid.N}")


@dataclass
class Spectrum:
    """SDFT of a DGState on the discrete frequency grid of ``grid``."""

    xi: np.ndarray
    Ahat: np.ndarray
    Jhat: np.ndarray

    @classmethod
    def from_stacked(cls, xi: np.ndarray, u: np.ndarray) -> "Spectrum":
        return cls(xi, u[:, 0].copy(), u[:, 1].copy())

    def stacked(self) -> np.ndarray:
        return np.stack([self.Ahat, self.Jhat], axis=-1)


def _is_pow2(n: int) -> bool:
    return n & (n - 1) == 0


def _forward(f: np.ndarray, grid: GridSpec, method: str) -> np.ndarray:
    h, N = grid.h, grid.N
    if method == "auto":
        method = "fft" if _is_pow2(N) else "direct"
    if method == "fft":
        # xi_k L = pi k, so exp(-i xi_k x_j) = (-1)^k exp(-2 pi i k j / N)
        k = np.arange(-N // 2, N // 2)
        sign = np.where(k % 2, -1.0, 1.0)
        return h * sign * np.fft.fftshift(np.fft.fft(f))
    if method == "direct":
        phase = np.exp(-1j * np.outer(grid.xi, grid.x))
        return h * (phase @ f)
    raise ValueError(f"unknown method {method!r}")


def _inverse(fh: np.ndarray, grid: GridSpec, method: str) -> np.ndarray:
    N = grid.N
    if method == "auto":
        method = "fft" if _is_pow2(N) else "direct"
    if method == "fft":
        k = np.arange(-N // 2, N // 2)
        sign = np.where(k % 2, -1.0, 1.0)
        # (1/2pi) * dxi = 1 / (N h); ifft already divides by N
        return np.fft.ifft(np.fft.ifftshift(sign * fh)) / grid.h
    if method == "direct":
        phase = np.exp(1j * np.outer(grid.x, grid.xi))
        return (phase @ fh) * grid.dxi / (2 * np.pi)
    raise ValueError(f"unknown method {method!r}")


def sdft_forward(state: DGState, grid: GridSpec, method: str = "auto") -> Spectrum:
    """Transform both components of ``state``.

    ``method`` is ``"fft"``, ``"direct"`` (O(N^2) summation) or ``"auto"``
    (FFT when N is a power of two).
    """
    state.check(grid)
    return Spectrum(
        grid.xi,
        _forward(state.A, grid, method),
        _forward(state.J, grid, method),
    )


def is_conjugate_symmetric(fh: np.ndarray, rtol: float = 1e-10) -> bool:
    """True when fh(-xi) = conj(fh(xi)) on the discrete grid.

    Index 0 holds xi = -pi/h, which is its own mirror image.
    """
    mirrored = np.concatenate([fh[:1], fh[:0:-1]])
    scale = max(np.max(np.abs(fh)), 1e-300)
    return bool(np.max(np.abs(fh - np.conj(mirrored))) <= rtol * scale)


def sdft_inverse(
    spec: Spectrum, grid: GridSpec, real: bool = False, method: str = "auto"
) -> DGState:
    """Inverse transform. With ``real=True`` the spectrum must be conjugate
    symmetric and a real-valued state is returned."""
    if spec.Ahat.shape != (grid.N,) or spec.Jhat.shape != (grid.N,):
        raise ValueError("spectrum length does not match grid")
    if real:
        for name, fh in (("Ahat", spec.Ahat), ("Jhat", spec.Jhat)):
            if not is_conjugate_symmetric(fh):
                raise ValueError(f"{name} is not conjugate symmetric; cannot return a real state")
    A = _inverse(spec.Ahat, grid, method)
    J = _inverse(spec.Jhat, grid, method)
    if real:
        return DGState(A.real.copy(), J.real.copy())
    return DGState(A, J)


def l2_norm_sq(state: DGState, grid: GridSpec) -> float:
    """h * sum_j (|A_j|^2 + |J_j|^2)."""
    return float(grid.h * (np.sum(np.abs(state.A) ** 2) + np.sum(np.abs(state.J) ** 2)))
