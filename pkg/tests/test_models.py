import numpy as np
import pytest

from bosetopo.errors import ValidationError
from bosetopo.models import (BlochSymbol, ModelSpec, PerturbationSpec, apply_perturbation, bkc, bloch_symbol,
                             bosonic_ssh, build_model, closed_form_polaritons, coupled_cavity_pair,
                             photo_magnonic_chain, shift_matrix)
from bosetopo.qbh import commutator_residual, quadrature, structure_residuals
from bosetopo.spectral import band_structure, sort_spectrum


def pm_spec(n=1, N=8, rwa=True, gauge=False, tm=None, **kw):
    params = {"omega_a": 0.0, "omega_m": 0.0, "t": 0.3 + 0.1j, "g": 1.0 - 0.2j}
    params.update(kw)
    if gauge:
        params["spt_gauge"] = True
    perts = () if tm is None else (PerturbationSpec("MagnonHopping", tm),)
    return ModelSpec("PhotoMagnonicRWA" if rwa else "PhotoMagnonic", N, params, n, perts)


def test_shift_matrix():
    T = shift_matrix(4, 1)
    assert [tuple(ix) for ix in np.argwhere(T)] == [(1, 0), (2, 1), (3, 2)]
    assert np.array_equal(shift_matrix(3, 0), np.eye(3))
    assert not shift_matrix(3, 3).any()
    assert np.array_equal(shift_matrix(4, 2), T @ T)
    P = shift_matrix(4, 1, periodic=True)
    assert P[0, 3] == 1 and np.allclose(P @ P.T, np.eye(4))
    with pytest.raises(ValidationError):
        shift_matrix(3, 4)


def test_photo_magnonic_two_cells_by_hand():
    wa, wm, t, g = 3.0, 2.5, 0.2 + 0.1j, 0.4 - 0.3j
    h = photo_magnonic_chain(2, 0, wa, wm, t, g)
    gc, tc = np.conj(g), np.conj(t)
    K = np.array([[wa, -tc, gc, 0], [-t, wa, 0, gc], [g, 0, wm, 0], [0, g, 0, wm]])
    D = np.array([[0, 0, gc, 0], [0, 0, 0, gc], [gc, 0, 0, 0], [0, gc, 0, 0]])
    assert np.allclose(h.K, K) and np.allclose(h.delta, D)
    assert h.labels == ("a_0", "a_1", "m_0", "m_1")
    rwa = photo_magnonic_chain(2, 0, wa, wm, t, g, rwa=True)
    assert np.allclose(rwa.K, K) and not rwa.delta.any()


def test_single_cell_has_no_hopping():
    h = photo_magnonic_chain(1, 0, 3.0, 2.0, 0.5, 0.1)
    assert np.allclose(h.K, [[3.0, 0.1], [0.1, 2.0]])


def test_offset_disconnects_left_magnons():
    h = photo_magnonic_chain(6, 2, 0.0, 0.0, 0.3, 1.0, rwa=True)
    for m in (6, 7):
        assert not h.K[m].any() and not h.K[:, m].any()
    with pytest.raises(ValidationError):
        photo_magnonic_chain(3, 4, 0.0, 0.0, 0.3, 1.0)


def test_edge_mode_ratio():
    g, t = 1.0 - 0.5j, 0.3 + 0.2j
    for N in (4, 7):
        h = photo_magnonic_chain(N, 1, 0.0, 0.0, t, g, rwa=True)
        w, V = np.linalg.eigh(h.K)
        zero = np.flatnonzero(np.abs(w) < 1e-10 * abs(g))
        assert zero.size == 2  # the edge mode and the isolated magnon m_0
        Q = V[:, zero]
        v = Q @ np.array([Q[N, 1], -Q[N, 0]])
        v /= np.linalg.norm(v)
        a, m = v[N - 1], v[2 * N - 1]
        assert abs(a) ** 2 + abs(m) ** 2 > 1 - 1e-10
        # row a_{N-2} of K v = 0 reads -conj(t) a + conj(g) m = 0
        assert np.isclose(a / m, np.conj(g) / np.conj(t), rtol=1e-10)


def test_kitaev_chain_matrices():
    t, d = 0.7, 0.3
    h = bkc(2, t, d)
    assert np.allclose(h.K, [[0, -0.5j * t], [0.5j * t, 0]])
    assert np.allclose(h.delta, [[0, 0.5j * d], [0.5j * d, 0]])
    with pytest.raises(ValidationError):
        bkc(1, t, d)


def test_kitaev_chain_pure_hopping_spectrum():
    N, t = 9, 1.3
    w = np.sort(np.linalg.eigvalsh(bkc(N, t, 0.0).K))
    q = np.arange(1, N + 1)
    assert np.allclose(w, np.sort(t * np.cos(np.pi * q / (N + 1))), atol=1e-12)


def test_kitaev_majorana_quadratures_three_sites():
    t, d = 1.0, 0.5
    eps = (d - t) / (d + t)
    G = bkc(3, t, d).dynamical_matrix()
    L = quadrature(3, 0, "x") - eps * quadrature(3, 2, "x")
    R = quadrature(3, 2, "p") - eps * quadrature(3, 0, "p")
    assert commutator_residual(G, L) < 1e-12
    assert commutator_residual(G, R) < 1e-12


def test_ssh():
    h = bosonic_ssh(1, 0.4, 1.0)
    assert np.allclose(h.K, [[0, 0.4], [0.4, 0]])
    t2 = 20e6
    w = np.sort(np.abs(np.linalg.eigvalsh(bosonic_ssh(12, t2 / 2, t2).K)))
    assert np.all(w[:2] < 1e-3 * t2) and w[2] > 0.4 * t2
    w = np.sort(np.abs(np.linalg.eigvalsh(bosonic_ssh(6, 1.0, 0.5).K)))
    assert w[0] > 0.4
    with pytest.raises(ValidationError):
        bosonic_ssh(3, 0.0, 1.0)


def test_polaritons_closed_form_against_cell():
    wa, wm, g = 10e9, 9.7e9, 112.5e6
    up, lo = closed_form_polaritons(wa, wm, g, rwa=True)
    w = np.linalg.eigvalsh(photo_magnonic_chain(1, 0, wa, wm, 0.0, g, rwa=True).K)
    assert np.allclose([lo, up], w, rtol=1e-14)
    up, lo = closed_form_polaritons(wa, wm, g, rwa=False)
    G = photo_magnonic_chain(1, 0, wa, wm, 0.0, g).dynamical_matrix()
    pos = np.sort(np.linalg.eigvals(G).real)[2:]
    assert np.allclose([lo, up], pos, rtol=1e-12)


def test_polaritons_limits():
    assert closed_form_polaritons(2.0, 1.0, 0.0, True) == (2.0, 1.0)
    up, lo = closed_form_polaritons(9.999e9, 9.999e9, 112.5e6, True)
    assert up - lo == pytest.approx(225e6, rel=1e-12)
    full = closed_form_polaritons(10e9, 10e9, 112.5e6, False)
    rwa = closed_form_polaritons(10e9, 10e9, 112.5e6, True)
    assert max(abs(full[0] - rwa[0]), abs(full[1] - rwa[1])) < 112.5e6 ** 2 / 10e9


def test_coupled_cavity_pair():
    w = np.linalg.eigvalsh(coupled_cavity_pair(9.9783e9, 12.7e6).K)
    assert np.allclose(w, [9.9656e9, 9.9910e9], rtol=1e-12)
    w = np.linalg.eigvalsh(coupled_cavity_pair(5.0, 0.0).K)
    assert np.allclose(w, [5.0, 5.0])
    t = 0.3 - 0.4j
    w = np.linalg.eigvalsh(coupled_cavity_pair(5.0, t).K)
    assert np.isclose(w[1] - w[0], 2 * abs(t))


def test_perturbations():
    h = build_model(pm_spec())
    same = apply_perturbation(h, PerturbationSpec("MagnonHopping", 0.0))
    assert np.array_equal(same.K, h.K)
    with pytest.raises(ValidationError):
        apply_perturbation(bkc(4, 1.0, 0.2), PerturbationSpec("MagnonHopping", 0.1))
    with pytest.raises(ValidationError):
        PerturbationSpec("LinearInterpolation", 1.5, pm_spec())
    with pytest.raises(ValidationError):
        PerturbationSpec("Bogus", 0.1)


def test_linear_interpolation():
    a, b = pm_spec(n=1), pm_spec(n=0)
    spec = ModelSpec(a.name, a.N, a.parameters, 1, (PerturbationSpec("LinearInterpolation", 0.25, b),))
    h = build_model(spec)
    ha, hb = build_model(a), build_model(b)
    assert np.allclose(h.K, 0.75 * ha.K + 0.25 * hb.K)


def test_chiral_breaking_symbol():
    t1, t2, t = 0.5, 1.0, 0.3
    spec = ModelSpec("BosonicSSH", 6, {"t1": t1, "t2": t2}, 0, (PerturbationSpec("SshChiralBreaking", t),))
    sym = bloch_symbol(spec)
    for k in np.linspace(-np.pi, np.pi, 7):
        # this orientation gives the displayed symbol evaluated at -k
        q = -k
        want = np.array([[-t * np.sin(q), t1 + t2 * np.exp(1j * q)],
                         [t1 + t2 * np.exp(-1j * q), -t * np.sin(q)]])
        assert np.allclose(sym.K(k), want)
        assert np.isclose(np.linalg.det(sym.K(k)), t ** 2 * np.sin(k) ** 2 - t1 ** 2 - t2 ** 2
                          - 2 * t1 * t2 * np.cos(k))


def test_magnon_hopping_symbol():
    tm = 0.37
    sym = bloch_symbol(pm_spec(tm=tm))
    for k in np.linspace(-3, 3, 5):
        assert np.isclose(sym.K_im(k)[1, 1], -2j * tm * np.sin(k))
        assert np.isclose(sym.K(k)[1, 1], 2 * tm * np.sin(k))


def test_photo_magnonic_dispersion():
    g = 1.0 - 0.2j
    t = 0.3 + 0.1j
    sym = bloch_symbol(pm_spec(n=2, t=t, g=g))
    k = np.linspace(-np.pi, np.pi, 41, endpoint=False)
    Om = -2 * abs(t) * np.cos(k + np.angle(t))
    root = np.sqrt(Om ** 2 + 4 * abs(g) ** 2)
    w = np.linalg.eigvalsh(sym.K(k))
    assert np.allclose(w[:, 0], (Om - root) / 2) and np.allclose(w[:, 1], (Om + root) / 2)


def test_bands_independent_of_offset():
    k = np.linspace(-np.pi, np.pi, 64, endpoint=False)
    ref = sort_spectrum(band_structure(bloch_symbol(pm_spec(n=0)), k))
    for n in (1, 2, 3):
        w = sort_spectrum(band_structure(bloch_symbol(pm_spec(n=n)), k))
        assert np.max(np.abs(w - ref)) < 1e-12


SPECS = [
    pm_spec(n=1),
    pm_spec(n=2, rwa=False, omega_a=5.0, omega_m=4.0),
    pm_spec(n=3, gauge=True, tm=0.2),
    ModelSpec("BKC", 8, {"t": 1.0, "delta": 0.4}),
    ModelSpec("BosonicSSH", 8, {"t1": 0.5, "t2": 1.0}, 0, (PerturbationSpec("SshChiralBreaking", 0.2),)),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.name}-{s.n_offset}")
def test_symbol_rebuilds_open_chain(spec):
    sym = bloch_symbol(spec)
    for N in (4, 6):
        h = build_model(spec, N=N)
        r = sym.real_space(N)
        assert np.allclose(h.K, r.K, atol=1e-14) and np.allclose(h.delta, r.delta, atol=1e-14)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.name}-{s.n_offset}")
@pytest.mark.parametrize("N", [4, 8, 16])
def test_periodic_chain_matches_symbol(spec, N):
    if spec.n_offset > N:
        pytest.skip("offset exceeds chain")
    h = build_model(spec, N=N, pbc=True)
    assert max(structure_residuals(h.dynamical_matrix())) < 1e-12
    w = np.linalg.eigvals(h.dynamical_matrix())
    k = 2 * np.pi * np.arange(N) / N
    k = np.where(k >= np.pi, k - 2 * np.pi, k)
    ws = band_structure(bloch_symbol(spec), k).ravel()
    rho = np.max(np.abs(w))
    assert np.allclose(np.sort_complex(np.round(w / rho, 9)), np.sort_complex(np.round(ws / rho, 9)), atol=1e-8)


def test_kitaev_symbol_against_large_periodic_chain():
    spec = ModelSpec("BKC", 64, {"t": 1.0, "delta": 0.4})
    w = np.linalg.eigvals(build_model(spec, pbc=True).dynamical_matrix())
    k = 2 * np.pi * np.arange(64) / 64
    k = np.where(k >= np.pi, k - 2 * np.pi, k)
    ws = band_structure(bloch_symbol(spec), k).ravel()
    d = np.abs(w[:, None] - ws[None, :]).min(axis=1)
    assert d.max() < 1e-8 * np.max(np.abs(w))


def test_symbol_validation():
    with pytest.raises(ValidationError):
        BlochSymbol({1: (np.eye(2), np.zeros((2, 2))), -1: (2 * np.eye(2), np.zeros((2, 2)))})
    with pytest.raises(ValidationError):
        ModelSpec("Nope", 4, {})
    with pytest.raises(ValidationError):
        ModelSpec("BKC", 4, {"t": 1.0})
    with pytest.raises(ValidationError):
        band_structure(bloch_symbol(SPECS[3]), [4.0])
