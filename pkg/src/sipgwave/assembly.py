"""Mass and stiffness operators of the P1 SIPG scheme on a periodic lattice.

Unknowns are ordered node by node as (A_0, J_0, A_1, J_1, ...). Each operator
is a block stencil (left, center, right) of 2x2 blocks acting on nodes
j-1, j, j+1, closed periodically.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import solve_banded

from .lattice import DGState, GridSpec


def check_penalty(s: float) -> float:
    s = float(s)
    if not s > 1:
        raise ValueError(f"penalty parameter must satisfy s > 1, got {s}")
    return s


@dataclass(frozen=True)
class BlockStencil:
    left: np.ndarray
    center: np.ndarray
    right: np.ndarray

    def symbol(self, theta):
        """left e^{-i theta} + center + right e^{i theta}, theta = xi h.

        Returns an array of shape theta.shape + (2, 2).
        """
        e = np.exp(1j * np.asarray(theta, dtype=float))[..., None, None]
        return self.left * np.conj(e) + self.center + self.right * e


@dataclass(frozen=True)
class LatticeOperator:
    stencil: BlockStencil
    grid: GridSpec

    def apply(self, state: DGState) -> DGState:
        state.check(self.grid)
        u = state.stacked()
        st = self.stencil
        out = (
            np.roll(u, 1, axis=0) @ st.left.T
            + u @ st.center.T
            + np.roll(u, -1, axis=0) @ st.right.T
        )
        return DGState.from_stacked(out)

    def dense(self) -> np.ndarray:
        N = self.grid.N
        if N > 4096:
            raise ValueError("dense assembly is only meant for small test grids")
        mat = np.zeros((2 * N, 2 * N))
        st = self.stencil
        for j in range(N):
            r = slice(2 * j, 2 * j + 2)
            jl, jr = (j - 1) % N, (j + 1) % N
            mat[r, 2 * jl:2 * jl + 2] += st.left
            mat[r, 2 * j:2 * j + 2] += st.center
            mat[r, 2 * jr:2 * jr + 2] += st.right
        return mat

    def pair(self, u: DGState, v: DGState, idx=None) -> float:
        """Real part of sum over nodes in ``idx`` of conj(v_j) . (Op u)_j."""
        w = self.apply(u)
        prod = np.conj(v.A) * w.A + np.conj(v.J) * w.J
        if idx is not None:
            prod = prod[idx]
        return float(np.real(np.sum(prod)))


def mass_stencil(h: float) -> BlockStencil:
    return BlockStencil(
        left=np.array([[h / 6, -h / 12], [h / 12, -h / 24]]),
        center=np.array([[2 * h / 3, 0.0], [0.0, h / 6]]),
        right=np.array([[h / 6, h / 12], [-h / 12, -h / 24]]),
    )


def stiffness_stencil(h: float, s: float) -> BlockStencil:
    return BlockStencil(
        left=np.array([[-1 / h, 0.0], [0.0, -1 / (4 * h)]]),
        center=np.array([[2 / h, 0.0], [0.0, (2 * s - 1) / (2 * h)]]),
        right=np.array([[-1 / h, 0.0], [0.0, -1 / (4 * h)]]),
    )


def assemble_mass(grid: GridSpec) -> LatticeOperator:
    return LatticeOperator(mass_stencil(grid.h), grid)


def assemble_stiffness_stencil(grid: GridSpec, s: float) -> LatticeOperator:
    return LatticeOperator(stiffness_stencil(grid.h, check_penalty(s)), grid)


# --- bilinear form from the basis functions -------------------------------
#
# On the reference lattice (h = 1) every basis function restricted to an
# element is linear, so it is fully described by its one-sided values at the
# element ends. Values are kept as exact fractions; the h scaling of each
# term of the form is applied at the end.

def _traces(kind: str, offset: int):
    """Values (left end, right end) on the element [x_e, x_{e+1}] of the basis
    function of type ``kind`` centred at node e + offset, h = 1."""
    one, half = Fraction(1), Fraction(1, 2)
    if kind == "A":
        table = {0: (one, Fraction(0)), 1: (Fraction(0), one)}
    else:
        # phi^J_i = 1/2 sign(x_i - x) hat_i(x): -1/2 hat on the right of x_i
        table = {0: (-half, Fraction(0)), 1: (Fraction(0), half)}
    return table.get(offset, (Fraction(0), Fraction(0)))


def _one_sided(kind: str, center: int, node: int):
    """(value, slope) limits from the left and from the right at ``node`` of
    the basis function centred at ``center`` (h = 1). Exact fractions."""
    res = []
    for elem in (node - 1, node):  # element to the left, element to the right
        v0, v1 = _traces(kind, center - elem)
        slope = v1 - v0
        val = v1 if elem == node - 1 else v0
        res.append((val, slope))
    return res  # [(f(x-), f'(x-)), (f(x+), f'(x+))]


def _form_entry(ki: str, ci: int, kj: str, cj: int):
    """a^s(phi_i, phi_j) on the unit lattice, split as (grad-grad, flux, [u][v]).

    Every part scales as 1/h, so a_h^s = (grad + flux + s * jumps) / h.
    """
    grad = Fraction(0)
    for elem in range(min(ci, cj) - 1, max(ci, cj) + 1):
        ui = _traces(ki, ci - elem)
        uj = _traces(kj, cj - elem)
        grad += (ui[1] - ui[0]) * (uj[1] - uj[0])
    flux = Fraction(0)
    pen = Fraction(0)
    for node in range(min(ci, cj) - 1, max(ci, cj) + 2):
        (ilv, ils), (irv, irs) = _one_sided(ki, ci, node)
        (jlv, jls), (jrv, jrs) = _one_sided(kj, cj, node)
        jump_i, jump_j = ilv - irv, jlv - jrv
        avg_di, avg_dj = (ils + irs) / 2, (jls + jrs) / 2
        flux -= jump_i * avg_dj + jump_j * avg_di
        pen += jump_i * jump_j
    return grad, flux, pen


def stiffness_from_bilinear_form(h: float, s: float) -> BlockStencil:
    """Block stencil of a_h^s obtained by exact integration over the basis.

    Row block (node j) against column block (node j + d) holds
    a(phi_{j+d}^c, phi_j^r) for r, c in (A, J); the form is symmetric.
    """
    s = check_penalty(s)
    blocks = {}
    for d in (-1, 0, 1):
        blk = np.zeros((2, 2))
        for r, kr in enumerate("AJ"):
            for c, kc in enumerate("AJ"):
                grad, flux, pen = _form_entry(kr, 0, kc, d)
                blk[r, c] = (float(grad + flux) + s * float(pen)) / h
        blocks[d] = blk
    return BlockStencil(left=blocks[-1], center=blocks[0], right=blocks[1])


def assemble_stiffness_quadrature(grid: GridSpec, s: float) -> LatticeOperator:
    return LatticeOperator(stiffness_from_bilinear_form(grid.h, s), grid)


def bilinear_form(kind_i: str, i: int, kind_j: str, j: int, h: float, s: float) -> float:
    """a_h^s(phi_i^{kind_i}, phi_j^{kind_j}) on the infinite lattice."""
    check_penalty(s)
    grad, flux, pen = _form_entry(kind_i, i, kind_j, j)
    return (float(grad + flux) + s * float(pen)) / h


def mass_from_basis(h: float) -> BlockStencil:
    """Gram matrix of the basis by exact integration of products of linears."""
    blocks = {}
    for d in (-1, 0, 1):
        blk = np.zeros((2, 2))
        for r, kr in enumerate("AJ"):
            for c, kc in enumerate("AJ"):
                acc = Fraction(0)
                for elem in range(min(0, d) - 1, max(0, d) + 1):
                    a0, a1 = _traces(kr, -elem)
                    b0, b1 = _traces(kc, d - elem)
                    # integral over [0, 1] of two linear functions
                    acc += (2 * a0 * b0 + a0 * b1 + a1 * b0 + 2 * a1 * b1) / 6
                blk[r, c] = float(acc) * h
        blocks[d] = blk
    return BlockStencil(left=blocks[-1], center=blocks[0], right=blocks[1])


# --- periodic block-tridiagonal solve ---------------------------------------

class MassSolver:
    """Direct solver for the periodic block-tridiagonal mass system.

    The interleaved 2N x 2N matrix is banded (3 sub/super diagonals) apart
    from the two corner blocks coupling node 0 and node N-1. Those are split
    off as a rank-4 update and handled with the Woodbury identity; the banded
    part is eliminated by LAPACK's banded LU.
    """

    def __init__(self, op: LatticeOperator, pivot_tol: float = 1e-13):
        self.op = op
        N = op.grid.N
        if N < 3:
            raise ValueError("periodic block solve needs at least 3 nodes")
        st = op.stencil
        n = 2 * N
        band = np.zeros((7, n))  # solve_banded layout, l = u = 3
        for j in range(N):
            for r in range(2):
                row = 2 * j + r
                for d, blk in ((-1, st.left), (0, st.center), (1, st.right)):
                    jj = j + d
                    if jj < 0 or jj >= N:
                        continue
                    for c in range(2):
                        col = 2 * jj + c
                        band[3 + row - col, col] = blk[r, c]
        self._band = band
        # corner coupling: rows of node 0 see node N-1 (left block),
        # rows of node N-1 see node 0 (right block)
        U = np.zeros((n, 4))
        V = np.zeros((n, 4))
        U[0:2, 0:2] = np.eye(2)
        V[n - 2:n, 0:2] = st.left.T
        U[n - 2:n, 2:4] = np.eye(2)
        V[0:2, 2:4] = st.right.T
        self._V = V
        self._Z = solve_banded((3, 3), band, U)
        cap = np.eye(4) + V.T @ self._Z
        cond = np.linalg.cond(cap)
        if not np.isfinite(cond) or cond > 1 / pivot_tol:
            raise np.linalg.LinAlgError(f"ill-conditioned capacitance matrix (cond={cond:.3g})")
        self._cap_inv = np.linalg.inv(cap)
        diag = band[3]
        if np.min(np.abs(diag)) < pivot_tol * np.max(np.abs(diag)):
            raise np.linalg.LinAlgError("near-zero diagonal pivot in mass operator")

    def solve_stacked(self, rhs: np.ndarray) -> np.ndarray:
        """rhs of shape (N, 2) or (N, 2, k); returns the same shape."""
        shape = rhs.shape
        b = rhs.reshape(2 * self.op.grid.N, -1)
        y = solve_banded((3, 3), self._band, b, check_finite=False)
        x = y - self._Z @ (self._cap_inv @ (self._V.T @ y))
        return x.reshape(shape)

    def solve(self, rhs: DGState) -> DGState:
        rhs.check(self.op.grid)
        return DGState.from_stacked(self.solve_stacked(rhs.stacked()))


def mass_solve(op: LatticeOperator, rhs: DGState) -> DGState:
    """Solve M U = rhs. Build a :class:`MassSolver` to reuse the factorisation."""
    return MassSolver(op).solve(rhs)
