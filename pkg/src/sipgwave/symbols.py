"""Frequency-domain analysis of the SIPG scheme.

Everything is computed in the scaled variable theta = xi h on the unit
lattice and rescaled on output: Lambda(xi) = Lambda_1(xi h) / h^2,
lambda(xi) = lambda_1(xi h) / h, and the group velocity d lambda / d xi is
h-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import check_penalty

PHYSICAL = "physical"
SPURIOUS = "spurious"
BRANCHES = (PHYSICAL, SPURIOUS)

DET_M = 1.0 / 12.0
_LAMBDA_CLAMP = 1e-14
_DEGENERATE_RTOL = 1e-10


def check_branch(branch: str) -> str:
    aliases = {"ph": PHYSICAL, "sp": SPURIOUS}
    branch = aliases.get(branch, branch)
    if branch not in BRANCHES:
        raise ValueError(f"branch must be 'physical' or 'spurious', got {branch!r}")
    return branch


def _theta(xi, h):
    theta = np.asarray(xi, dtype=float) * h
    if np.any(np.abs(theta) > np.pi * (1 + 1e-12)):
        raise ValueError("frequency outside the band [-pi/h, pi/h]")
    return np.clip(theta, -np.pi, np.pi)


@dataclass
class SymbolMatrices:
    xi: np.ndarray
    h: float
    s: float
    M: np.ndarray  # (..., 2, 2) complex Hermitian
    R: np.ndarray  # (..., 2, 2) real diagonal


def mass_symbol(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    c, sn = np.cos(theta), np.sin(theta)
    M = np.empty(theta.shape + (2, 2), dtype=complex)
    M[..., 0, 0] = (2 + c) / 3
    M[..., 0, 1] = 1j * sn / 6
    M[..., 1, 0] = -1j * sn / 6
    M[..., 1, 1] = (2 - c) / 12
    return M


def stiffness_symbol(theta, s: float) -> np.ndarray:
    """Stiffness symbol on the unit lattice (multiply by 1/h^2)."""
    theta = np.asarray(theta, dtype=float)
    R = np.zeros(theta.shape + (2, 2))
    R[..., 0, 0] = 4 * np.sin(theta / 2) ** 2
    R[..., 1, 1] = s - np.cos(theta / 2) ** 2
    return R


def symbols(xi, h: float, s: float) -> SymbolMatrices:
    """Mass and stiffness symbols M_h(xi), R_h^s(xi)."""
    s = check_penalty(s)
    theta = _theta(xi, h)
    return SymbolMatrices(
        np.asarray(xi, dtype=float), h, s, mass_symbol(theta), stiffness_symbol(theta, s) / h**2
    )


def _pencil(theta, s):
    """Coefficients of det(R - Lambda M) = Lambda^2/12 + b Lambda + c (h = 1)
    and their theta-derivatives."""
    c, sn = np.cos(theta), np.sin(theta)
    M11, M22 = (2 + c) / 3, (2 - c) / 12
    R11, R22 = 2 * (1 - c), s - (1 + c) / 2
    dM11, dM22, dR11, dR22 = -sn / 3, sn / 12, 2 * sn, sn / 2
    b = -(R11 * M22 + R22 * M11)
    cc = R11 * R22
    db = -(dR11 * M22 + R11 * dM22 + dR22 * M11 + R22 * dM11)
    dc = dR11 * R22 + R11 * dR22
    return b, cc, db, dc


def _roots(theta, s):
    """(Lambda_ph, Lambda_sp, discriminant) on the unit lattice."""
    b, c, _, _ = _pencil(theta, s)
    disc = np.maximum(b * b - c / 3, 0.0)
    lam_sp = 6 * (-b + np.sqrt(disc))
    # product of the roots is 12 c; avoids cancellation near Lambda_ph = 0
    lam_ph = 12 * c / lam_sp
    lam_ph = np.where(np.abs(lam_ph) <= _LAMBDA_CLAMP, 0.0, lam_ph)
    return lam_ph, lam_sp, disc


def is_degenerate(theta, s) -> np.ndarray:
    """Double eigenvalue of the pencil (only s = 3, theta = +-pi)."""
    b, _, _, _ = _pencil(np.asarray(theta, dtype=float), s)
    _, _, disc = _roots(np.asarray(theta, dtype=float), s)
    return disc <= _DEGENERATE_RTOL * b * b


def eigenvalues(xi, h: float, s: float):
    """(Lambda_ph, Lambda_sp) of S_h^s(xi) = M^{-1} R."""
    s = check_penalty(s)
    lam_ph, lam_sp, _ = _roots(_theta(xi, h), s)
    return lam_ph / h**2, lam_sp / h**2


def dispersion(xi, h: float, s: float, branch: str):
    """lambda(xi) = sqrt(Lambda(xi)) for the requested branch."""
    branch = check_branch(branch)
    lam_ph, lam_sp = eigenvalues(xi, h, s)
    return np.sqrt(lam_ph if branch == PHYSICAL else lam_sp)


def _raw_eigvec(theta, s, Lam, branch):
    """M-normalised eigenvector for eigenvalue Lam (unit lattice).

    Phase convention: the component that dominates at xi = 0 (A for the
    physical branch, J for the spurious one) is real and positive; where it
    vanishes the other component is made real positive instead.
    """
    M = mass_symbol(theta)
    R = stiffness_symbol(theta, s)
    v1 = np.stack([Lam * M[..., 0, 1], R[..., 0, 0] - Lam * M[..., 0, 0]], axis=-1)
    v2 = np.stack([R[..., 1, 1] - Lam * M[..., 1, 1], Lam * M[..., 1, 0]], axis=-1)
    n1 = np.linalg.norm(v1, axis=-1)
    n2 = np.linalg.norm(v2, axis=-1)
    v = np.where((n1 >= n2)[..., None], v1, v2)
    key = 0 if branch == PHYSICAL else 1
    mag = np.abs(v)
    use = np.where(mag[..., key] > 1e-12 * np.max(mag, axis=-1), key, 1 - key)
    ref = np.take_along_axis(v, use[..., None], axis=-1)[..., 0]
    v = v * (np.conj(ref) / np.abs(ref))[..., None]
    norm = np.sqrt(np.real(np.einsum("...i,...ij,...j->...", np.conj(v), M, v)))
    return v / norm[..., None]


def _one_sided_eigvecs(theta, s, step=1e-6):
    """Eigenvectors at a degenerate point as limits from inside the band."""
    inward = -np.sign(theta)
    out = {}
    for branch in BRANCHES:
        vs = []
        for k in (1, 2):
            t = theta + inward * k * step
            lam_ph, lam_sp, _ = _roots(t, s)
            vs.append(_raw_eigvec(t, s, lam_ph if branch == PHYSICAL else lam_sp, branch))
        out[branch] = 2 * vs[0] - vs[1]
    M = mass_symbol(theta)
    vph = out[PHYSICAL]
    vph = vph / np.sqrt(np.real(np.conj(vph) @ M @ vph))
    vsp = out[SPURIOUS]
    vsp = vsp - (np.conj(vph) @ M @ vsp) * vph
    vsp = vsp / np.sqrt(np.real(np.conj(vsp) @ M @ vsp))
    return vph, vsp


def eigenvectors(xi, h: float, s: float):
    """M_h(xi)-orthonormal eigenvectors (v_ph, v_sp), each of shape (..., 2).

    At the degenerate points (s = 3, xi = +-pi/h) the one-sided limits from
    inside the band are returned.
    """
    s = check_penalty(s)
    theta = _theta(xi, h)
    lam_ph, lam_sp, _ = _roots(theta, s)
    vph = _raw_eigvec(theta, s, lam_ph, PHYSICAL)
    vsp = _raw_eigvec(theta, s, lam_sp, SPURIOUS)
    deg = is_degenerate(theta, s)
    if np.any(deg):
        for idx in zip(*np.nonzero(np.atleast_1d(deg))):
            t = float(np.atleast_1d(theta)[idx])
            a, b = _one_sided_eigvecs(t, s)
            if vph.ndim == 1:
                vph, vsp = a, b
            else:
                vph[idx], vsp[idx] = a, b
    return vph, vsp


@dataclass
class BranchPoint:
    xi: float
    Lambda: float
    lam: float
    eigvec: np.ndarray
    vg: float
    branch: str
    degenerate: bool = False


def eigen_branches(xi: float, h: float, s: float):
    """Physical and spurious eigenpairs at one frequency.

    The physical branch is the one continued from eigenvector (1, 0) at
    xi = 0. The two eigenvalues never cross inside the band (the coupling
    M_12 is nonzero there), so this is also the smaller root; see
    :func:`track_branches` for the explicit continuation.
    """
    s = check_penalty(s)
    theta = float(_theta(xi, h))
    deg = bool(is_degenerate(theta, s))
    Lph, Lsp = eigenvalues(xi, h, s)
    vph, vsp = eigenvectors(xi, h, s)
    points = []
    for branch, Lam, v in ((PHYSICAL, Lph, vph), (SPURIOUS, Lsp, vsp)):
        vg = group_velocity(xi, h, s, branch, one_sided=True)
        points.append(BranchPoint(float(xi), float(Lam), float(np.sqrt(Lam)), v, vg, branch, deg))
    return tuple(points)


def _vg_unit(theta, s, branch):
    b, c, db, dc = _pencil(theta, s)
    lam_ph, lam_sp, _ = _roots(theta, s)
    Lam = lam_ph if branch == PHYSICAL else lam_sp
    F_L = Lam / 6 + b
    dLam = -(db * Lam + dc) / F_L
    with np.errstate(divide="ignore", invalid="ignore"):
        vg = dLam / (2 * np.sqrt(Lam))
    # physical branch at xi = 0: lambda ~ |xi|, limit of the slope is 1
    return np.where(Lam == 0.0, 1.0, vg)


def group_velocity(xi, h: float, s: float, branch: str, one_sided: bool = False):
    """d lambda / d xi by implicit differentiation of the pencil determinant.

    At the double eigenvalue (s = 3, xi h = +-pi) the derivative does not
    exist; a ValueError is raised unless ``one_sided`` is set, in which case
    the limit from inside the band is returned.
    """
    s = check_penalty(s)
    branch = check_branch(branch)
    theta = _theta(xi, h)
    deg = is_degenerate(theta, s)
    if np.any(deg):
        if not one_sided:
            raise ValueError(
                "double eigenvalue at s = 3, xi h = +-pi: group velocity is only "
                "defined one-sided; pass one_sided=True or evaluate inside the band"
            )
        theta = np.asarray(theta, dtype=float)
        inward = -np.sign(theta)
        e = 1e-5
        limit = 2 * _vg_unit(theta + inward * e, s, branch) - _vg_unit(theta + 2 * inward * e, s, branch)
        with np.errstate(divide="ignore", invalid="ignore"):
            regular = _vg_unit(theta, s, branch)
        out = np.where(deg, limit, regular)
    else:
        out = _vg_unit(theta, s, branch)
    return float(out) if np.ndim(out) == 0 else out


def reference_dispersions(xi, h: float):
    """(omega_FD, lambda_FEM, lambda_cont) for the 3-point finite difference
    scheme, P1 finite elements, and the continuous wave equation."""
    xi = np.asarray(xi, dtype=float)
    theta = xi * h
    omega = 2 / h * np.abs(np.sin(theta / 2))
    lam_fem = np.sqrt(6 * (1 - np.cos(theta)) / (2 + np.cos(theta))) / h
    return omega, lam_fem, np.abs(xi)


@dataclass
class BranchCurve:
    """Both branches sampled on a uniform grid of [0, pi/h]."""

    h: float
    s: float
    xi: np.ndarray
    Lambda: dict = field(default_factory=dict)
    lam: dict = field(default_factory=dict)
    vg: dict = field(default_factory=dict)
    eigvec: dict = field(default_factory=dict)
    degenerate: np.ndarray | None = None

    def as_columns(self) -> dict:
        omega, lam_fem, lam_cont = reference_dispersions(self.xi, self.h)
        return {
            "xi": self.xi,
            "lambda_ph": self.lam[PHYSICAL],
            "lambda_sp": self.lam[SPURIOUS],
            "vg_ph": self.vg[PHYSICAL],
            "vg_sp": self.vg[SPURIOUS],
            "omega_FD": omega,
            "lambda_FEM": lam_fem,
            "lambda_cont": lam_cont,
        }


def track_branches(theta: np.ndarray, s: float):
    """Label eigenpairs along increasing theta >= 0 by eigenvector continuity.

    Starts from theta[0] = 0 where the physical eigenvector is (1, 0) and at
    every step keeps the labelling that maximises the M-overlap with the
    previous eigenvectors. Returns a boolean array, True where the physical
    branch is the larger root.
    """
    theta = np.asarray(theta, dtype=float)
    if theta[0] != 0 or np.any(np.diff(theta) <= 0):
        raise ValueError("tracking needs an increasing grid starting at 0")
    lam_ph, lam_sp, _ = _roots(theta, s)
    small = _raw_eigvec(theta, s, lam_ph, PHYSICAL)
    large = _raw_eigvec(theta, s, lam_sp, SPURIOUS)
    deg = is_degenerate(theta, s)
    swapped = np.zeros(theta.shape, dtype=bool)
    prev_ph = small[0]
    for i in range(1, len(theta)):
        if deg[i]:
            swapped[i] = swapped[i - 1]
            continue
        M = mass_symbol(theta[i])
        o_small = abs(np.conj(prev_ph) @ M @ small[i])
        o_large = abs(np.conj(prev_ph) @ M @ large[i])
        swapped[i] = o_large > o_small
        prev_ph = large[i] if swapped[i] else small[i]
    return swapped


def branch_curve(h: float, s: float, samples: int = 4096) -> BranchCurve:
    """Sample both branches on ``samples`` uniform points of [0, pi/h]."""
    s = check_penalty(s)
    theta = np.linspace(0.0, np.pi, samples)
    swapped = track_branches(theta, s)
    deg = is_degenerate(theta, s)
    if np.any(swapped & ~deg):
        raise AssertionError("continuation and magnitude ordering disagree")
    xi = theta / h
    curve = BranchCurve(h=h, s=s, xi=xi, degenerate=deg)
    Lph, Lsp = eigenvalues(xi, h, s)
    vph, vsp = eigenvectors(xi, h, s)
    for branch, Lam, v in ((PHYSICAL, Lph, vph), (SPURIOUS, Lsp, vsp)):
        curve.Lambda[branch] = Lam
        curve.lam[branch] = np.sqrt(Lam)
        curve.vg[branch] = group_velocity(xi, h, s, branch, one_sided=True)
        curve.eigvec[branch] = v
    return curve


def _bisect(f, a, b, tol=1e-10, maxiter=200):
    fa = f(a)
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        fm = f(m)
        if abs(fm) <= tol or b - a <= 4 * np.finfo(float).eps * max(1.0, abs(m)):
            return m
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def find_critical_points(h: float, s: float, branch: str, samples: int = 4096) -> list:
    """Frequencies in [0, pi/h] where the group velocity of ``branch`` vanishes.

    Interior zeros are bracketed on a uniform grid and refined by bisection;
    xi = 0 and xi = pi/h are included when the one-sided limit there is 0.
    """
    s = check_penalty(s)
    branch = check_branch(branch)
    if samples < 2048:
        raise ValueError("critical point search needs at least 2048 samples")
    theta = np.linspace(0.0, np.pi, samples + 2)[1:-1]
    vg = _vg_unit(theta, s, branch)
    out = []
    if abs(float(_vg_unit(np.array(0.0), s, branch))) <= 1e-12:
        out.append(0.0)
    f = lambda t: float(_vg_unit(np.array(t), s, branch))
    for i in np.nonzero(np.sign(vg[:-1]) * np.sign(vg[1:]) < 0)[0]:
        out.append(_bisect(f, theta[i], theta[i + 1]))
    for i in np.nonzero(vg == 0.0)[0]:
        out.append(float(theta[i]))
    if not is_degenerate(np.pi, s):
        out.append(np.pi)
    return sorted(t / h for t in out)
