import numpy as np
import pytest

from bosetopo.errors import NumericalError, ValidationError
from bosetopo.models import (ModelSpec, PerturbationSpec, bkc, bloch_symbol, bosonic_ssh, build_model,
                             closed_form_polaritons, photo_magnonic_chain)
from bosetopo.qbh import QuadraticHamiltonian
from bosetopo.spectral import band_structure, diagonalize, finite_size_scan, sort_spectrum, zero_modes
from bosetopo.topology import dressed


def ssh_spec(N=12, t1=0.5, t2=1.0):
    return ModelSpec("BosonicSSH", N, {"t1": t1, "t2": t2})


def test_cell_spectrum_matches_polaritons():
    wa, wm, g = 10e9, 9.8e9, 150e6
    res = diagonalize(photo_magnonic_chain(1, 0, wa, wm, 0.0, g).dynamical_matrix())
    up, lo = closed_form_polaritons(wa, wm, g, rwa=False)
    w = np.sort(res.eigenvalues.real)
    assert np.allclose(w, [-up, -lo, lo, up], rtol=1e-12)
    assert np.all(res.residuals < 1e-12)
    assert not res.flags


def test_diagonal_hamiltonian():
    K = np.diag([1.0, 2.0, 5.0])
    res = diagonalize(QuadraticHamiltonian(K, np.zeros((3, 3))).dynamical_matrix())
    assert np.allclose(np.sort(res.eigenvalues.real), [-5, -2, -1, 1, 2, 5])
    assert np.allclose(np.abs(res.tau3_norms), 1)
    assert np.allclose(res.ipr, 1)


def test_kitaev_boundary_sensitivity():
    w_open = diagonalize(bkc(5, 1.0, 0.4).dynamical_matrix()).eigenvalues
    w_ring = diagonalize(bkc(5, 1.0, 0.4, pbc=True).dynamical_matrix()).eigenvalues
    assert np.max(np.abs(w_open.imag)) < 1e-10
    assert np.max(np.abs(w_ring.imag)) > 0.1


def test_bad_inputs():
    with pytest.raises(NumericalError):
        diagonalize(np.array([[np.nan, 0], [0, 1.0]]))
    with pytest.raises(ValidationError):
        diagonalize(np.eye(3))
    with pytest.raises(ValidationError):
        band_structure(bloch_symbol(ssh_spec()), [])


def test_defective_matrix_is_flagged():
    G = np.array([[1.0, 1.0], [0.0, 1.0]])
    res = diagonalize(G)
    assert any(f.startswith("defective") for f in res.flags)


def test_trace_and_sorting():
    res = diagonalize(build_model(ModelSpec("PhotoMagnonic", 5, {"omega_a": 3.0, "omega_m": 2.5, "t": 0.2, "g": 0.3}, 1)).dynamical_matrix())
    assert abs(res.eigenvalues.sum()) < 1e-10
    w = sort_spectrum(np.array([1 + 1j, -1, 1 - 1j, 0]))
    assert list(w) == [-1, 0, 1 - 1j, 1 + 1j]


def test_flat_bands_without_hopping():
    spec = ModelSpec("PhotoMagnonicRWA", 4, {"omega_a": 0.0, "omega_m": 0.0, "t": 0.0, "g": 0.7}, 1)
    w = band_structure(bloch_symbol(spec), np.linspace(-np.pi, np.pi, 16, endpoint=False))
    assert np.allclose(np.abs(w), 0.7)


def test_ssh_gap_closes_at_equal_hopping():
    k = np.linspace(-np.pi, np.pi, 1001, endpoint=False)
    w = band_structure(bloch_symbol(ssh_spec(t1=1.0, t2=1.0)), k)
    assert np.min(np.abs(w)) < 1e-6


def test_magnon_hopping_gap_closes_at_quarter_momentum():
    g, t = 1.0, 0.25
    tc = g * g / (4 * t)
    spec = ModelSpec("PhotoMagnonicRWA", 8, {"omega_a": 0.0, "omega_m": 0.0, "t": t, "g": g, "spt_gauge": True},
                     3, (PerturbationSpec("MagnonHopping", tc),))
    k = np.linspace(-np.pi, np.pi, 1024, endpoint=False)
    gap = np.min(np.abs(band_structure(bloch_symbol(spec), k)), axis=1)
    kmin = k[np.argsort(gap)[:2]]
    assert np.allclose(np.sort(np.abs(kmin)), [np.pi / 2, np.pi / 2])
    assert gap.min() < 1e-12


def test_zero_modes_shifted_chain():
    h = photo_magnonic_chain(4, 1, 0.0, 0.0, 0.1, 0.9, rwa=True)
    rep = zero_modes(h)
    assert rep.count == 2
    left = [m for m in rep.modes if m.side == "left"]
    right = [m for m in rep.modes if m.side == "right"]
    assert len(left) == 1 and left[0].disconnected and np.isclose(left[0].ipr, 1)
    assert len(right) == 1 and not right[0].disconnected
    support = np.abs(right[0].vector[:h.n_modes]) ** 2
    assert support[[3, 7]].sum() > 1 - 1e-12
    assert all(abs(m.eigenvalue) < rep.tol for m in rep.modes)
    assert all(0 <= m.edge_weight_left <= 1 and 0 <= m.edge_weight_right <= 1 for m in rep.modes)


@pytest.mark.parametrize("N", [4, 8, 12])
def test_unshifted_chain_is_gapped(N):
    assert zero_modes(photo_magnonic_chain(N, 0, 0.0, 0.0, 0.3, 1.0, rwa=True)).count == 0


def test_ssh_edge_modes_and_localization():
    h = build_model(ssh_spec(N=20))
    rep = zero_modes(h, tol=1e-3)
    assert rep.count == 2
    assert rep.count_on("left") == 1 and rep.count_on("right") == 1
    for m in rep.modes:
        assert not m.delocalized
        assert m.localization_length == pytest.approx(1 / np.log(2), rel=0.05)


def test_ssh_splitting_decays_exponentially():
    scan = finite_size_scan(ssh_spec(), [6, 8, 10, 12, 14], "min_abs_eigenvalue")
    assert scan.decay_rate == pytest.approx(np.log(2), rel=0.2)
    assert scan.r_squared > 0.99
    triv = finite_size_scan(ssh_spec(t1=1.0, t2=0.5), [6, 8, 10], "zero_mode_count", tol=1e-3)
    assert triv.values == [0.0, 0.0, 0.0]


def test_kitaev_odd_chains_have_exact_zero_modes():
    spec = ModelSpec("BKC", 5, {"t": 1.0, "delta": 3.0})
    scan = finite_size_scan(spec, [5, 7, 9, 11], "min_abs_eigenvalue")
    assert max(scan.values) < 1e-12


def test_zero_mode_count_is_gauge_invariant():
    h = photo_magnonic_chain(6, 2, 0.0, 0.0, 0.2 + 0.1j, 1.0, rwa=True)
    base = zero_modes(h).count
    rng = np.random.default_rng(4)
    for theta in rng.uniform(0, 2 * np.pi, 10):
        phases = np.r_[np.ones(6), np.full(6, np.exp(1j * theta))]
        assert zero_modes(dressed(h, phases)).count == base


def test_zero_modes_from_raw_matrix():
    h = bkc(7, 1.0, 3.0)
    rep = zero_modes(h.dynamical_matrix(), tol=1e-9)
    assert rep.count == 2
    assert {m.side for m in rep.modes} == {"left", "right"}


def test_scan_validation():
    with pytest.raises(ValidationError):
        finite_size_scan(ssh_spec(), [4, 6], "bogus")
