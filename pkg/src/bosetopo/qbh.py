"""Quadratic bosonic Hamiltonians and their dynamical matrices.

A Hamiltonian is stored through its hopping matrix ``K`` (Hermitian) and its
pairing matrix ``delta`` (symmetric), with

    H = sum K_ij a_i^dag a_j + 1/2 delta_ij a_i^dag a_j^dag + 1/2 conj(delta_ij) a_j a_i.

The dynamical matrix acting on the Nambu vector ``[a^dag, a]`` is
``G = [[K, -delta], [conj(delta), -conj(K)]]``. A linear form
``v_hat = sum v[i] a_i^dag + v[N + i] a_i`` then satisfies
``[H, v_hat] = (G v)_hat``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ValidationError

STRUCTURE_RTOL = 1e-12


def _scale(*mats: np.ndarray) -> float:
    return max([1.0] + [float(np.max(np.abs(m))) if m.size else 0.0 for m in mats])


@dataclass(frozen=True)
class Onsite:
    """Real on-site frequency ``omega * a_i^dag a_i``."""

    mode: int
    omega: float


@dataclass(frozen=True)
class Hopping:
    """Term ``amplitude * a_i^dag a_j + h.c.`` between distinct modes."""

    i: int
    j: int
    amplitude: complex


@dataclass(frozen=True)
class Pairing:
    """Term ``amplitude * a_i^dag a_j^dag + h.c.``; ``i == j`` is single-mode squeezing."""

    i: int
    j: int
    amplitude: complex


Term = Union[Onsite, Hopping, Pairing]


@dataclass
class QuadraticHamiltonian:
    """Hopping and pairing matrices of a quadratic bosonic Hamiltonian.

    Parameters
    ----------
    K : np.ndarray
        Hermitian N x N hopping matrix.
    delta : np.ndarray
        Complex symmetric N x N pairing matrix.
    labels : sequence of str, optional
        Human-readable mode names.
    cells : sequence of int, optional
        Unit-cell index of every mode, used for edge and localization
        diagnostics. Defaults to one cell per mode.
    """

    K: np.ndarray
    delta: np.ndarray
    labels: Tuple[str, ...] = field(default=())
    cells: Tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        K = np.array(self.K, dtype=complex)
        D = np.array(self.delta, dtype=complex)
        if K.ndim != 2 or K.shape[0] != K.shape[1] or D.shape != K.shape:
            raise ValidationError(f"K and delta must be equal square matrices, got {K.shape} and {D.shape}")
        if not (np.all(np.isfinite(K)) and np.all(np.isfinite(D))):
            raise ValidationError("K and delta must be finite")
        tol = STRUCTURE_RTOL * _scale(K, D)
        if np.max(np.abs(K - K.conj().T), initial=0.0) > tol:
            raise ValidationError("K is not Hermitian")
        if np.max(np.abs(D - D.T), initial=0.0) > tol:
            raise ValidationError("delta is not symmetric")
        self.K = K
        self.delta = D
        n = K.shape[0]
        self.labels = tuple(self.labels) if self.labels else tuple(f"a{i}" for i in range(n))
        self.cells = tuple(self.cells) if self.cells else tuple(range(n))
        if len(self.labels) != n or len(self.cells) != n:
            raise ValidationError("labels and cells must have one entry per mode")

    @property
    def n_modes(self) -> int:
        return self.K.shape[0]

    @property
    def n_cells(self) -> int:
        return max(self.cells) + 1 if self.cells else 0

    @property
    def number_conserving(self) -> bool:
        return bool(np.max(np.abs(self.delta), initial=0.0) <= STRUCTURE_RTOL * _scale(self.K, self.delta))

    def dynamical_matrix(self) -> np.ndarray:
        return dynamical_matrix(self.K, self.delta)


def build_qbh(n_modes: int, terms: Iterable[Term], labels: Sequence[str] = (),
              cells: Sequence[int] = ()) -> QuadraticHamiltonian:
    """Assemble ``K`` and ``delta`` from a list of terms.

    Examples
    --------
    >>> h = build_qbh(2, [Onsite(0, 1.0), Hopping(1, 0, 0.5j)])
    >>> h.K[1, 0]
    0.5j
    """
    if n_modes < 1:
        raise ValidationError("n_modes must be positive")
    K = np.zeros((n_modes, n_modes), dtype=complex)
    D = np.zeros((n_modes, n_modes), dtype=complex)

    def check(*idx: int) -> None:
        for i in idx:
            if not (0 <= i < n_modes):
                raise ValidationError(f"mode index {i} out of range for {n_modes} modes")

    for term in terms:
        if isinstance(term, Onsite):
            check(term.mode)
            if np.iscomplexobj(term.omega) and np.imag(term.omega) != 0:
                raise ValidationError(f"on-site frequency must be real, got {term.omega}")
            K[term.mode, term.mode] += float(np.real(term.omega))
        elif isinstance(term, Hopping):
            check(term.i, term.j)
            if term.i == term.j:
                raise ValidationError("hopping needs two distinct modes; use Onsite for diagonal terms")
            K[term.i, term.j] += term.amplitude
            K[term.j, term.i] += np.conj(term.amplitude)
        elif isinstance(term, Pairing):
            check(term.i, term.j)
            if term.i == term.j:
                D[term.i, term.i] += 2 * term.amplitude
            else:
                D[term.i, term.j] += term.amplitude
                D[term.j, term.i] += term.amplitude
        else:
            raise ValidationError(f"unknown term {term!r}")
    return QuadraticHamiltonian(K, D, tuple(labels), tuple(cells))


def dynamical_matrix(K: np.ndarray, delta: np.ndarray) -> np.ndarray:
    K = np.asarray(K, dtype=complex)
    delta = np.asarray(delta, dtype=complex)
    return np.block([[K, -delta], [delta.conj(), -K.conj()]])


def split_dynamical_matrix(G: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Recover ``(K, delta)`` from a dynamical matrix."""
    G = np.asarray(G, dtype=complex)
    n = G.shape[0] // 2
    return G[:n, :n].copy(), -G[:n, n:].copy()


def tau(s: int, n: int) -> np.ndarray:
    """``sigma_s`` (s = 0..3) tensored with the n x n identity."""
    pauli = {
        0: np.eye(2, dtype=complex),
        1: np.array([[0, 1], [1, 0]], dtype=complex),
        2: np.array([[0, -1j], [1j, 0]], dtype=complex),
        3: np.array([[1, 0], [0, -1]], dtype=complex),
    }
    return np.kron(pauli[s], np.eye(n))


def beta(s: int, n: int = 1) -> np.ndarray:
    """Generators spanning the single-mode Bogoliubov algebra.

    ``beta(1) = -i tau_1``, ``beta(2) = -i tau_2`` and ``beta(3) = tau_3``.
    Their brackets are ``[b1, b2] = -2i b3``, ``[b2, b3] = 2i b1`` and
    ``[b3, b1] = 2i b2``.
    """
    if s == 1:
        return -1j * tau(1, n)
    if s == 2:
        return -1j * tau(2, n)
    if s == 3:
        return tau(3, n)
    raise ValidationError("beta index must be 1, 2 or 3")


_BETA_KINDS = {"S1": 1, "S2": 2, "N": 3}


def beta_matrix(kind: str, n_modes: int, n1: float = 0.0, n2: float = 0.0) -> np.ndarray:
    """Dynamical matrix of a symmetry generator.

    ``kind`` is ``"S1"``, ``"S2"``, ``"N"`` or ``"S"``; the last one is the
    squeezing combination ``n1 * beta1 + n2 * beta2`` with a unit vector
    ``(n1, n2)``.
    """
    if n_modes < 1:
        raise ValidationError("n_modes must be positive")
    if kind in _BETA_KINDS:
        return beta(_BETA_KINDS[kind], n_modes)
    if kind == "S":
        if abs(n1 * n1 + n2 * n2 - 1.0) > 1e-10:
            raise ValidationError(f"squeezing axis ({n1}, {n2}) is not a unit vector")
        return n1 * beta(1, n_modes) + n2 * beta(2, n_modes)
    raise ValidationError(f"unknown generator {kind!r}; expected S1, S2, N or S")


def commutator(G1: np.ndarray, G2: np.ndarray) -> np.ndarray:
    """Matrix commutator; two quadratic forms commute iff this vanishes."""
    G1 = np.asarray(G1)
    G2 = np.asarray(G2)
    if G1.shape != G2.shape or G1.ndim != 2 or G1.shape[0] != G1.shape[1]:
        raise ValidationError(f"cannot commute matrices of shapes {G1.shape} and {G2.shape}")
    return G1 @ G2 - G2 @ G1


def structure_residuals(G: np.ndarray) -> Tuple[float, float]:
    """Relative violations of the two structural identities of a dynamical matrix.

    Returns ``(pseudo_hermitian, particle_hole)`` where the first measures
    ``tau3 G^dag tau3 - G`` and the second ``tau1 conj(G) tau1 + G``.
    """
    G = np.asarray(G, dtype=complex)
    n = G.shape[0] // 2
    t1, t3 = tau(1, n), tau(3, n)
    s = _scale(G)
    return (float(np.max(np.abs(t3 @ G.conj().T @ t3 - G))) / s,
            float(np.max(np.abs(t1 @ G.conj() @ t1 + G))) / s)


def is_dynamical_matrix(G: np.ndarray, rtol: float = STRUCTURE_RTOL) -> bool:
    return max(structure_residuals(G)) <= rtol


def decompose(K: np.ndarray, delta: np.ndarray) -> dict:
    """Real and imaginary parts used by the generator expansion of ``G``.

    ``G = kron(b1, delta_im) + kron(b2, delta_re) + kron(b3, K_re) + i kron(I2, K_im)``.
    """
    K = np.asarray(K, dtype=complex)
    delta = np.asarray(delta, dtype=complex)
    return {"K_re": K.real.copy(), "K_im": K.imag.copy(),
            "delta_re": delta.real.copy(), "delta_im": delta.imag.copy()}


def expand_generators(K: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Rebuild ``G`` from the generator expansion (independent of :func:`dynamical_matrix`)."""
    parts = decompose(K, delta)
    n = np.asarray(K).shape[0]
    one = lambda s: beta(s, 1)
    return (np.kron(one(1), parts["delta_im"]) + np.kron(one(2), parts["delta_re"])
            + np.kron(one(3), parts["K_re"]) + 1j * np.kron(np.eye(2), parts["K_im"]))


def form_bracket(v: np.ndarray, w: np.ndarray) -> complex:
    """Canonical commutator ``[v_hat, w_hat]`` of two linear forms.

    With ``v_hat = sum v[i] a_i^dag + v[N+i] a_i`` this is
    ``sum v[N+i] w[i] - v[i] w[N+i]``.
    """
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    n = v.shape[0] // 2
    return complex(np.sum(v[n:] * w[:n] - v[:n] * w[n:]))


def quadrature(n_modes: int, mode: int, kind: str) -> np.ndarray:
    """Linear-form vector of ``x = (a + a^dag)/sqrt 2`` or ``p = i(a^dag - a)/sqrt 2``."""
    v = np.zeros(2 * n_modes, dtype=complex)
    s = 1 / np.sqrt(2)
    if kind == "x":
        v[mode], v[n_modes + mode] = s, s
    elif kind == "p":
        v[mode], v[n_modes + mode] = 1j * s, -1j * s
    else:
        raise ValidationError("quadrature kind must be 'x' or 'p'")
    return v


def commutator_residual(G: np.ndarray, v: np.ndarray) -> float:
    """Norm of the linear form ``[H, v_hat]``; zero means ``v_hat`` is conserved."""
    return float(np.linalg.norm(np.asarray(G) @ np.asarray(v)))


def random_qbh(n_modes: int, rng: Optional[np.random.Generator] = None,
               scale: float = 1.0) -> QuadraticHamiltonian:
    rng = np.random.default_rng() if rng is None else rng
    A = rng.normal(size=(n_modes, n_modes)) + 1j * rng.normal(size=(n_modes, n_modes))
    B = rng.normal(size=(n_modes, n_modes)) + 1j * rng.normal(size=(n_modes, n_modes))
    return QuadraticHamiltonian(scale * (A + A.conj().T) / 2, scale * (B + B.T) / 2)
