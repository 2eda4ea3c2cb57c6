import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from sipgwave.evolution import (
    CFLError,
    ObservationRegion,
    WrapError,
    check_wrap,
    energy_density,
    evolve_spectral,
    fourier_energy,
    leapfrog,
    local_energy,
    max_frequency,
    spurious_fraction,
    total_energy,
)
from sipgwave.initial_data import WavePacketSpec, make_wavepacket, random_bigrid
from sipgwave.lattice import DGState, GridSpec
from sipgwave.symbols import eigenvalues, eigenvectors


def mode(grid, k, s, branch=0):
    """Physical-space eigenmode at the grid frequency xi_k."""
    xi = grid.xi[k : k + 1]
    v = eigenvectors(xi, grid.h, s)[branch][0]
    lam = np.sqrt(eigenvalues(xi, grid.h, s)[branch][0])
    ph = np.exp(1j * xi[0] * grid.x)
    return DGState(v[0] * ph, v[1] * ph), lam


def rand_state(grid, seed):
    rng = np.random.default_rng(seed)
    return DGState(rng.standard_normal(grid.N), rng.standard_normal(grid.N))


def test_spectral_identity_at_zero():
    g = GridSpec(4.0, 64)
    U0, U1 = rand_state(g, 0), rand_state(g, 1)
    res = evolve_spectral(U0, U1, g, 2.0, [0.0])
    assert np.max(np.abs(res.U[0] - U0.stacked())) <= 1e-13
    assert np.max(np.abs(res.V[0] - U1.stacked())) <= 1e-13


@pytest.mark.parametrize("branch", [0, 1])
def test_single_mode_period(branch):
    g = GridSpec(2.0, 32)
    U0, lam = mode(g, 20, 2.0, branch)
    P = 2 * np.pi / lam
    res = evolve_spectral(U0, DGState.zeros(g, complex), g, 2.0, [P / 4, P])
    assert np.max(np.abs(res.U[1] - U0.stacked())) <= 1e-10
    assert np.max(np.abs(res.U[0])) <= 1e-10


def test_constant_mode_moves_linearly():
    g = GridSpec(2.0, 16)
    one = DGState(np.ones(16), np.zeros(16))
    res = evolve_spectral(DGState.zeros(g), one, g, 2.0, [0.7])
    assert np.allclose(res.U[0][:, 0], 0.7, atol=1e-13)


def test_spectral_energy_conserved():
    g = GridSpec(4.0, 128)
    U0, U1 = random_bigrid(g, 4)
    res = evolve_spectral(U0, U1, g, 2.0, np.linspace(0, 5, 11))
    E = res.energy_trace
    assert np.max(np.abs(E - E[0])) <= 1e-12 * E[0]


def test_leapfrog_zero_data():
    g = GridSpec(2.0, 32)
    res = leapfrog(DGState.zeros(g), DGState.zeros(g), g, 2.0, None, 1.0)
    assert np.all(res.U == 0) and np.all(res.V == 0)


@pytest.mark.parametrize("safety", [0.9, 0.5, 0.1])
def test_leapfrog_eigen_oscillator(safety):
    g = GridSpec(2.0, 32)
    s = 2.0
    U0, lam = mode(g, 27, s, 1)
    dt = safety * 2 / max_frequency(g, s)
    T = 40 * dt
    res = leapfrog(U0, DGState.zeros(g, complex), g, s, dt, T, safety=1.0)
    om = np.arccos(1 - (lam * dt) ** 2 / 2) / dt
    expect = np.cos(om * res.times)[:, None, None] * U0.stacked()[None]
    assert np.max(np.abs(res.U - expect)) <= 1e-10
    if lam * dt < 1:
        # the discrete frequency deviates from lambda at second order
        assert abs(om - lam) <= (lam * dt) ** 2 * lam / 20


def test_leapfrog_energy_on_packet():
    h = 0.02
    g = GridSpec.from_spacing(h, 4.0)
    U0, U1 = make_wavepacket(WavePacketSpec(0.0, 0.2 / h, 7.0), g, 2.0)
    devs = {}
    for safety in (0.5, 0.25):
        res = leapfrog(U0, U1, g, 2.0, None, 1.0, safety=safety, sample_every=5)
        E = res.energy_trace
        devs[safety] = np.max(np.abs(E - E[0])) / E[0]
    assert devs[0.5] <= 1e-3 and devs[0.25] <= 2.5e-4


def test_leapfrog_matches_spectral():
    g = GridSpec(4.0, 128)
    U0, U1 = random_bigrid(g, 2)
    ref = evolve_spectral(U0, U1, g, 2.0, [1.0])
    errs = []
    for safety in (0.25, 0.125):
        lf = leapfrog(U0, U1, g, 2.0, None, 1.0, safety=safety, sample_every=10**9)
        errs.append(np.max(np.abs(lf.U[-1] - ref.U[0])))
    assert errs[0] / errs[1] > 3.5


def test_cfl_refusal():
    g = GridSpec(2.0, 32)
    lam = max_frequency(g, 2.0)
    with pytest.raises(CFLError, match="lambda_max"):
        leapfrog(DGState.zeros(g), DGState.zeros(g), g, 2.0, 1.1 / lam, 1.0)


def test_energy_zero_and_positive():
    g = GridSpec(2.0, 32)
    assert total_energy(DGState.zeros(g), DGState.zeros(g), g, 2.0) == 0.0
    for seed in range(5):
        assert total_energy(rand_state(g, seed), rand_state(g, seed + 10), g, 2.0) > 0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), s=st.floats(1.05, 10.0))
def test_energy_fourier_cross_check(seed, s):
    g = GridSpec(3.0, 48)
    U, V = rand_state(g, seed), rand_state(g, seed + 1)
    E = total_energy(U, V, g, s)
    assert abs(E - fourier_energy(U, V, g, s)) <= 1e-10 * max(1.0, E)


def test_local_energy_on_all_nodes_is_total():
    g = GridSpec(3.0, 48)
    U, V = rand_state(g, 3), rand_state(g, 4)
    E = total_energy(U, V, g, 2.0)
    assert local_energy(U, V, g, 2.0, np.arange(g.N)) == pytest.approx(E, rel=1e-14)


def test_local_energy_locality():
    g = GridSpec(4.0, 64)
    A = np.zeros(64)
    A[np.abs(g.x) < 0.5] = 1.0
    U = DGState(A, np.zeros(64))
    assert local_energy(U, DGState.zeros(g), g, 2.0) == 0.0


def test_local_energy_partition():
    g = GridSpec(4.0, 64)
    U, V = rand_state(g, 5), rand_state(g, 6)
    out = local_energy(U, V, g, 2.0)
    inside = local_energy(U, V, g, 2.0, ObservationRegion(g, complement=True))
    assert out + inside == pytest.approx(total_energy(U, V, g, 2.0), rel=1e-12)
    dens = energy_density(U.stacked(), V.stacked(), g, 2.0)
    assert dens.sum() == pytest.approx(total_energy(U, V, g, 2.0), rel=1e-12)


def test_empty_region_rejected():
    g = GridSpec(0.5, 8)
    with pytest.raises(ValueError):
        ObservationRegion(g, a=1.0).index


def test_check_wrap():
    assert check_wrap(10.0, 1.0, 4.0, 10.0) == pytest.approx(5.6)
    with pytest.raises(WrapError):
        check_wrap(5.0, 1.0, 4.0, 10.0)


def test_spurious_fraction_preserved():
    g = GridSpec(4.0, 128)
    U0, U1 = random_bigrid(g, 9)
    res = evolve_spectral(U0, U1, g, 2.0, [0.0, 3.0])
    f = [spurious_fraction(*res.state(i), g, 2.0) for i in range(2)]
    assert 0 < f[0] < 1
    assert abs(f[0] - f[1]) <= 1e-10


def test_physical_packet_has_no_spurious_energy():
    g = GridSpec.from_spacing(0.02, 4.0)
    U0, U1 = make_wavepacket(WavePacketSpec(0.0, 0.5 * np.pi / 0.02, 7.0), g, 2.0)
    assert spurious_fraction(U0, U1, g, 2.0) <= 1e-20
