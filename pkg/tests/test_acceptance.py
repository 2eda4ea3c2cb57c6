"""Acceptance criteria, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``;
a PASS/FAIL line per criterion is printed at the end of the session.
"""

import time

import numpy as np
import pytest

from sipgwave.assembly import (
    assemble_mass,
    assemble_stiffness_quadrature,
    assemble_stiffness_stencil,
)
from sipgwave.cli import main as cli_main
from sipgwave.evolution import energy_density, evolve_spectral, leapfrog, spurious_fraction
from sipgwave.initial_data import WavePacketSpec, make_wavepacket
from sipgwave.lattice import DGState, GridSpec
from sipgwave.observability import ObsExperimentSpec, blowup_experiment, uniformity_experiment
from sipgwave.symbols import (
    branch_curve,
    dispersion,
    group_velocity,
    mass_symbol,
    reference_dispersions,
)

S_SET = (1.5, 2.0, 3.0, 5.0)
H_SWEEP = (1 / 50, 1 / 100, 1 / 200)

c1 = pytest.mark.criterion("1", "symbol identities and assembly")
c2a = pytest.mark.criterion("2a", "sandwich, monotonicity, small-xi and s != 3 endpoint velocities")
c2b = pytest.mark.criterion("2b", "s = 3 endpoint velocity windows")
c3 = pytest.mark.criterion("3", "limit regimes")
c4 = pytest.mark.criterion("4", "engine cross-validation")
c5 = pytest.mark.criterion("5", "mode purity")
c6 = pytest.mark.criterion("6", "packet transport")
c7a = pytest.mark.criterion("7a", "blow-up, physical branch at 0.95 pi")
c7b = pytest.mark.criterion("7b", "blow-up, spurious branch at 0.95 pi")
c7c = pytest.mark.criterion("7c", "control carrier 0.2 stays bounded")
c8 = pytest.mark.criterion("8", "uniformity under filtering")
c9 = pytest.mark.criterion("9", "CLI determinism")


# --- 1 ---------------------------------------------------------------------

@c1
def test_det_mass_symbol():
    theta = np.random.default_rng(2024).uniform(-np.pi, np.pi, 10_000)
    det = np.linalg.det(mass_symbol(theta))
    assert np.max(np.abs(det - 1 / 12)) <= 1e-14


@c1
@pytest.mark.parametrize("h", [1.0, 0.25, 0.1])
@pytest.mark.parametrize("s", S_SET)
def test_printed_stencils(h, s):
    N = 8
    g = GridSpec(N * h / 2, N)
    M = assemble_mass(g).dense()
    R = assemble_stiffness_stencil(g, s).dense()
    blocks_M = {
        -1: [[h / 6, -h / 12], [h / 12, -h / 24]],
        0: [[2 * h / 3, 0], [0, h / 6]],
        1: [[h / 6, h / 12], [-h / 12, -h / 24]],
    }
    blocks_R = {
        -1: [[-1 / h, 0], [0, -1 / (4 * h)]],
        0: [[2 / h, 0], [0, (2 * s - 1) / (2 * h)]],
        1: [[-1 / h, 0], [0, -1 / (4 * h)]],
    }
    j = 3
    for off in (-1, 0, 1):
        for dense, blocks in ((M, blocks_M), (R, blocks_R)):
            blk = dense[2 * j : 2 * j + 2, 2 * (j + off) : 2 * (j + off) + 2]
            assert np.array_equal(blk, np.array(blocks[off], dtype=float))


@c1
@pytest.mark.parametrize("s", S_SET)
def test_quadrature_equals_stencil(s):
    g = GridSpec(8.0, 256)
    t0 = time.perf_counter()
    Q = assemble_stiffness_quadrature(g, s).dense()
    elapsed = time.perf_counter() - t0
    S = assemble_stiffness_stencil(g, s).dense()
    assert np.max(np.abs(Q - S)) <= 1e-14
    assert elapsed < 1.0


# --- 2 ---------------------------------------------------------------------

@c2a
def test_dispersion_properties():
    t0 = time.perf_counter()
    for s in S_SET:
        c = branch_curve(1.0, s, 4096).as_columns()
        lam = c["lambda_ph"]
        assert np.all(c["omega_FD"] <= lam * (1 + 1e-14))
        assert np.all(lam <= c["lambda_FEM"] * (1 + 1e-14))
        assert np.all(np.diff(lam) > 0)
        assert abs(group_velocity(1e-4, 1.0, s, "physical") - 1) <= 1e-3
        if s != 3.0:
            for b in ("physical", "spurious"):
                assert abs(group_velocity(np.pi - 1e-3, 1.0, s, b)) <= 2e-2
    assert time.perf_counter() - t0 < 5.0


@c2b
def test_s3_endpoint_physical_window():
    v = group_velocity(np.pi - 1e-3, 1.0, 3.0, "physical")
    assert 0.97 <= v <= 1.0, v


@c2b
def test_s3_endpoint_spurious_window():
    v = group_velocity(np.pi - 1e-3, 1.0, 3.0, "spurious")
    assert -1.0 <= v <= -0.97, v


# --- 3 ---------------------------------------------------------------------

@c3
def test_large_penalty_limit():
    xi = np.linspace(0, np.pi, 4097)
    _, lam_fem, _ = reference_dispersions(xi, 1.0)
    assert np.max(np.abs(dispersion(xi, 1.0, 1e6, "physical") - lam_fem)) <= 1e-4


@c3
def test_h_convergence_at_unit_frequency():
    err = [abs(float(dispersion(1.0, h, 2.0, "physical")) - 1) for h in (1 / 10, 1 / 20, 1 / 40)]
    assert err[0] > err[1] > err[2]


# --- 4 ---------------------------------------------------------------------

@c4
def test_engine_cross_validation():
    t0 = time.perf_counter()
    g = GridSpec(8.0, 128)
    rng = np.random.default_rng(0)
    U0 = DGState(rng.standard_normal(128), rng.standard_normal(128))
    U1 = DGState(rng.standard_normal(128), rng.standard_normal(128))
    ref = evolve_spectral(U0, U1, g, 2.0, np.linspace(0, 2.0, 201))
    E = ref.energy_trace
    assert np.max(np.abs(E - E[0])) <= 1e-10 * E[0]
    errs = []
    for safety in (0.25, 0.125, 0.0625):
        lf = leapfrog(U0, U1, g, 2.0, None, 2.0, safety=safety, sample_every=10**9)
        errs.append(np.linalg.norm(lf.U[-1] - ref.U[-1]))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 2) <= 0.2), orders
    assert time.perf_counter() - t0 < 10.0


# --- 5 ---------------------------------------------------------------------

@c5
@pytest.mark.parametrize("engine", ["spectral", "leapfrog"])
def test_mode_purity(engine):
    g = GridSpec(5.12, 512)  # h = 1/50
    U0, U1 = make_wavepacket(WavePacketSpec(0.0, 0.6 * np.pi / g.h, g.h**-0.5), g, 2.0)
    if engine == "spectral":
        res = evolve_spectral(U0, U1, g, 2.0, [0.0, 1.0, 2.0])
        idx = range(3)
    else:
        res = leapfrog(U0, U1, g, 2.0, None, 2.0, sample_every=1)
        idx = [int(np.argmin(np.abs(res.times - t))) for t in (0.0, 1.0, 2.0)]
        assert np.allclose(res.times[idx], [0, 1, 2], atol=1e-12)
    for i in idx:
        assert spurious_fraction(*res.state(i), g, 2.0) <= 1e-10


# --- 6 ---------------------------------------------------------------------

@c6
@pytest.mark.parametrize("carrier", [0.2, 0.6 * np.pi])
def test_packet_transport(carrier):
    h, T = 1 / 100, 2.0
    g = GridSpec.from_spacing(h, 1 + T + 1)
    U0, U1 = make_wavepacket(WavePacketSpec(0.0, carrier / h, 10.0), g, 2.0)
    res = evolve_spectral(U0, U1, g, 2.0, [0.0, T])
    dens = energy_density(res.U, res.V, g, 2.0)
    centroid = dens @ g.x / dens.sum(axis=1)
    speed = (centroid[0] - centroid[1]) / T  # packets move towards -x
    vg = float(group_velocity(carrier / h, h, 2.0, "physical"))
    assert abs(speed - vg) <= 0.05 * vg


# --- 7 ---------------------------------------------------------------------

def _blowup(**kw):
    spec = ObsExperimentSpec(s=2.0, T=4.0, hs=H_SWEEP, x_star=0.0, **kw)
    t0 = time.perf_counter()
    rep = blowup_experiment(spec, jobs=3)
    assert time.perf_counter() - t0 < 100.0
    return rep


@c7a
def test_blowup_physical():
    rep = _blowup(xi0_frac=0.95, branch="physical")
    C = rep.C
    assert np.all(C[1:] / C[:-1] >= 2), C


@c7b
def test_blowup_spurious():
    rep = _blowup(xi0_frac=0.95, branch="spurious")
    C = rep.C
    assert np.all(C[1:] / C[:-1] >= 2), C


@c7c
def test_control_carrier():
    rep = _blowup(xi0_frac=0.2 / np.pi, branch="physical")
    C = rep.C
    assert C.max() / C.min() < 2, C


# --- 8 ---------------------------------------------------------------------

@c8
@pytest.mark.parametrize("data", ["fourier", "bigrid"])
def test_uniformity(data):
    spec = ObsExperimentSpec(s=2.0, T=4.0, hs=H_SWEEP, data=data, delta=0.5, seed=0)
    t0 = time.perf_counter()
    rep = uniformity_experiment(spec, jobs=3)
    assert time.perf_counter() - t0 < 150.0
    assert rep.ratio <= 2, rep.C


# --- 9 ---------------------------------------------------------------------

@c9
@pytest.mark.parametrize("argv", [
    ["dispersion", "--s", "2", "5", "--samples", "1024"],
    ["simulate", "--engine", "both", "--N", "256", "--L", "4", "--T", "0.5",
     "--xi0-frac", "0.1", "--gamma", "4", "--filter", "none"],
    ["simulate", "--filter", "bigrid", "--N", "256", "--L", "4", "--T", "0.5", "--seed", "7"],
    ["observability", "--filter", "fourier", "--h", "0.04", "0.02", "--seed", "5", "--jobs", "2"],
])
def test_cli_determinism(tmp_path, monkeypatch, argv):
    digests = []
    for run in ("first", "second"):
        d = tmp_path / run
        d.mkdir()
        monkeypatch.chdir(d)
        assert cli_main(argv + ["--out", "out"]) == 0
        digests.append({p.name: p.read_bytes() for p in sorted((d / "out").iterdir())})
    assert digests[0] == digests[1]
    assert digests[0]


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v", *sys.argv[1:]]))
