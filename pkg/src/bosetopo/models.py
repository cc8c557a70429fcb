"""Lattice models, perturbations and their Bloch symbols.

Real-space chains list modes species by species, e.g. ``[a_0..a_{N-1},
m_0..m_{N-1}]``, so a translation-invariant matrix is
``sum_r kron(M_r, T^r)`` with ``T`` the lower shift and ``T^{-r} = (T^T)^r``.
A :class:`BlochSymbol` stores the blocks ``M_r`` and evaluates
``M(k) = sum_r exp(i k r) M_r``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError
from .qbh import STRUCTURE_RTOL, QuadraticHamiltonian, dynamical_matrix

MODEL_NAMES = ("PhotoMagnonic", "PhotoMagnonicRWA", "BKC", "BosonicSSH")
PERTURBATION_KINDS = ("MagnonHopping", "SshChiralBreaking", "LinearInterpolation")


def shift_matrix(N: int, n: int = 1, periodic: bool = False) -> np.ndarray:
    """``T_N^n`` where ``T_N`` has ones on the first lower diagonal.

    With ``periodic=True`` the cyclic shift is used instead, so that
    ``n >= N`` wraps around.
    """
    if N < 1:
        raise ValidationError("N must be at least 1")
    if n < 0:
        raise ValidationError("shift power must be non-negative")
    if periodic:
        return np.roll(np.eye(N), n % N, axis=0)
    if n > N:
        raise ValidationError(f"shift power {n} exceeds chain length {N}")
    return np.eye(N, k=-n)


def _layout(species: Sequence[str], N: int) -> Tuple[Tuple[str, ...], Tuple[int, ...]]:
    labels = tuple(f"{s}_{j}" for s in species for j in range(N))
    cells = tuple(j for _ in species for j in range(N))
    return labels, cells


def photo_magnonic_chain(N: int, n: int, omega_a: float, omega_m: float, t: complex, g: complex,
                         rwa: bool = False, pbc: bool = False) -> QuadraticHamiltonian:
    """Photon chain with magnons coupled at offset ``n``.

    Photon ``a_j`` couples to the shifted magnon ``m_{j+n}``; with open
    boundaries the magnons ``m_0..m_{n-1}`` are left disconnected.

    Parameters
    ----------
    N : int
        Number of cells.
    n : int
        Coupling offset, ``0 <= n <= N``.
    omega_a, omega_m : float
        Diagonal frequencies. Pass zeros for the rotating frame at resonance.
    t, g : complex
        Photon hopping (entering as ``-t``) and photon-magnon coupling.
    rwa : bool
        Drop the counter-rotating pairing terms.
    pbc : bool
        Add the wrap-around terms.
    """
    if N < 1:
        raise ValidationError("N must be at least 1")
    if not (0 <= n <= N):
        raise ValidationError(f"offset n={n} must lie in [0, N={N}]")
    T = shift_matrix(N, 1, pbc)
    Tn = shift_matrix(N, n, pbc)
    I = np.eye(N)
    K = np.block([
        [omega_a * I - t * T - np.conj(t) * T.T, np.conj(g) * Tn.T],
        [g * Tn, omega_m * I],
    ])
    if rwa:
        D = np.zeros_like(K)
    else:
        Z = np.zeros((N, N))
        D = np.block([[Z, np.conj(g) * Tn.T], [np.conj(g) * Tn, Z]])
    labels, cells = _layout(("a", "m"), N)
    return QuadraticHamiltonian(K, D, labels, cells)


def coupled_cavity_pair(omega_a: float, t: complex) -> QuadraticHamiltonian:
    """Two photon modes at ``omega_a`` coupled by hopping ``-t``."""
    if omega_a <= 0:
        raise ValidationError("omega_a must be positive")
    K = np.array([[omega_a, -np.conj(t)], [-t, omega_a]], dtype=complex)
    return QuadraticHamiltonian(K, np.zeros((2, 2)), ("a_0", "a_1"), (0, 1))


def bkc(N: int, t: float, delta: float, pbc: bool = False) -> QuadraticHamiltonian:
    """Bosonic Kitaev chain: hopping ``(it/2)(T - T^T)``, pairing ``(i delta/2)(T + T^T)``."""
    if N < 2:
        raise ValidationError("the Kitaev chain needs N >= 2")
    if np.iscomplexobj(t) or np.iscomplexobj(delta):
        raise ValidationError("t and delta must be real")
    T = shift_matrix(N, 1, pbc)
    K = 0.5j * t * (T - T.T)
    D = 0.5j * delta * (T + T.T)
    labels, cells = _layout(("a",), N)
    return QuadraticHamiltonian(K, D, labels, cells)


def bosonic_ssh(N: int, t1: float, t2: float, pbc: bool = False) -> QuadraticHamiltonian:
    """Dimerized chain ``[a_1..a_N, b_1..b_N]`` with intra-cell ``t1`` and inter-cell ``t2``."""
    if N < 1:
        raise ValidationError("N must be at least 1")
    if t1 <= 0 or t2 <= 0:
        raise ValidationError("t1 and t2 must be positive")
    T = shift_matrix(N, 1, pbc)
    I = np.eye(N)
    Z = np.zeros((N, N))
    K = np.block([[Z, t1 * I + t2 * T.T], [t1 * I + t2 * T, Z]])
    labels, cells = _layout(("a", "b"), N)
    return QuadraticHamiltonian(K, np.zeros_like(K), labels, cells)


def closed_form_polaritons(omega_a: float, omega_m: float, g: complex, rwa: bool) -> Tuple[float, float]:
    """Upper and lower polariton frequencies of a single photon-magnon cell."""
    g2 = abs(g) ** 2
    if rwa:
        root = np.sqrt((omega_a - omega_m) ** 2 + 4 * g2)
        return (omega_a + omega_m + root) / 2, (omega_a + omega_m - root) / 2
    if omega_a <= 0 or omega_m <= 0:
        raise ValidationError("the full polariton formula needs positive frequencies")
    radicand = (omega_a ** 2 - omega_m ** 2) ** 2 + 16 * omega_a * omega_m * g2
    assert radicand >= 0
    mean = (omega_a ** 2 + omega_m ** 2) / 2
    lower_sq = mean - np.sqrt(radicand) / 2
    if lower_sq < 0:
        raise ValidationError("coupling beyond the stability bound; lower polariton is imaginary")
    return float(np.sqrt(mean + np.sqrt(radicand) / 2)), float(np.sqrt(lower_sq))


# ---------------------------------------------------------------- perturbations

@dataclass(frozen=True)
class PerturbationSpec:
    """A named perturbation. ``toward`` is only used by ``LinearInterpolation``."""

    kind: str
    strength: float
    toward: Optional["ModelSpec"] = None

    def __post_init__(self) -> None:
        if self.kind not in PERTURBATION_KINDS:
            raise ValidationError(f"unknown perturbation kind {self.kind!r}")
        if not np.isfinite(self.strength):
            raise ValidationError("perturbation strength must be finite")
        if self.kind == "LinearInterpolation":
            if not (0.0 <= self.strength <= 1.0):
                raise ValidationError("interpolation parameter must lie in [0, 1]")
            if self.toward is None:
                raise ValidationError("LinearInterpolation needs a target model")


def _species(h: QuadraticHamiltonian) -> List[str]:
    out: List[str] = []
    for lab in h.labels:
        s = lab.split("_")[0]
        if s not in out:
            out.append(s)
    return out


def _species_block(h: QuadraticHamiltonian, name: str) -> np.ndarray:
    return np.array([i for i, lab in enumerate(h.labels) if lab.split("_")[0] == name])


def apply_perturbation(h: QuadraticHamiltonian, p: PerturbationSpec,
                       pbc: bool = False) -> QuadraticHamiltonian:
    """Return a new Hamiltonian with the perturbation added.

    ``MagnonHopping`` adds ``-i t_m (m_j m_{j+1}^dag - m_j^dag m_{j+1})``;
    ``SshChiralBreaking`` adds ``-(i t/2)(a_{j+1}^dag a_j + b_{j+1}^dag b_j - h.c.)``;
    ``LinearInterpolation`` blends ``(K, delta)`` toward the target entrywise.
    """
    K = h.K.copy()
    D = h.delta.copy()
    species = _species(h)
    if p.kind == "MagnonHopping":
        if species != ["a", "m"]:
            raise ValidationError("magnon hopping needs the photo-magnonic layout")
        idx = _species_block(h, "m")
        T = shift_matrix(len(idx), 1, pbc)
        K[np.ix_(idx, idx)] += -1j * p.strength * T + 1j * p.strength * T.T
    elif p.kind == "SshChiralBreaking":
        if species != ["a", "b"]:
            raise ValidationError("chiral-breaking term needs the SSH layout")
        for s in ("a", "b"):
            idx = _species_block(h, s)
            T = shift_matrix(len(idx), 1, pbc)
            K[np.ix_(idx, idx)] += -0.5j * p.strength * (T - T.T)
    elif p.kind == "LinearInterpolation":
        target = build_model(p.toward, pbc=pbc)
        if target.n_modes != h.n_modes:
            raise ValidationError("interpolation endpoints need identical mode counts")
        x = p.strength
        K = (1 - x) * K + x * target.K
        D = (1 - x) * D + x * target.delta
    return QuadraticHamiltonian(K, D, h.labels, h.cells)


# ---------------------------------------------------------------- model specs

_REQUIRED = {
    "PhotoMagnonic": ("omega_a", "omega_m", "t", "g"),
    "PhotoMagnonicRWA": ("omega_a", "omega_m", "t", "g"),
    "BKC": ("t", "delta"),
    "BosonicSSH": ("t1", "t2"),
}


@dataclass(frozen=True)
class ModelSpec:
    """Serializable description of a model instance.

    ``parameters`` holds the named scalars of the model. For the
    photo-magnonic models an optional boolean ``spt_gauge`` replaces
    ``(t, g)`` by ``(i|t|, i|g|)``, the gauge-equivalent form in which the
    hopping matrix is purely imaginary.
    """

    name: str
    N: int
    parameters: Dict[str, complex] = field(default_factory=dict)
    n_offset: int = 0
    perturbations: Tuple[PerturbationSpec, ...] = ()

    def __post_init__(self) -> None:
        if self.name not in MODEL_NAMES:
            raise ValidationError(f"unknown model {self.name!r}; expected one of {MODEL_NAMES}")
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError("N must be a positive integer")
        missing = [k for k in _REQUIRED[self.name] if k not in self.parameters]
        if missing:
            raise ValidationError(f"model {self.name} is missing parameters {missing}")
        object.__setattr__(self, "perturbations", tuple(self.perturbations))
        object.__setattr__(self, "parameters", dict(self.parameters))
        for key, value in self.parameters.items():
            if isinstance(value, (bool, np.bool_)):
                continue
            if not np.isfinite(complex(value)):
                raise ValidationError(f"parameter {key} must be finite")

    def with_N(self, N: int) -> "ModelSpec":
        return replace(self, N=N)

    def param(self, key: str, default=0.0):
        return self.parameters.get(key, default)


def _photo_magnonic_tg(spec: ModelSpec) -> Tuple[complex, complex]:
    t, g = complex(spec.param("t")), complex(spec.param("g"))
    if spec.param("spt_gauge", False):
        t, g = 1j * abs(t), 1j * abs(g)
    return t, g


def build_model(spec: ModelSpec, N: Optional[int] = None, pbc: bool = False) -> QuadraticHamiltonian:
    """Real-space Hamiltonian of ``spec`` (open boundaries unless ``pbc``)."""
    N = spec.N if N is None else N
    name = spec.name
    if name in ("PhotoMagnonic", "PhotoMagnonicRWA"):
        t, g = _photo_magnonic_tg(spec)
        h = photo_magnonic_chain(N, spec.n_offset, float(np.real(spec.param("omega_a"))),
                                 float(np.real(spec.param("omega_m"))), t, g,
                                 rwa=(name == "PhotoMagnonicRWA"), pbc=pbc)
    elif name == "BKC":
        h = bkc(N, float(np.real(spec.param("t"))), float(np.real(spec.param("delta"))), pbc=pbc)
    else:
        h = bosonic_ssh(N, float(np.real(spec.param("t1"))), float(np.real(spec.param("t2"))), pbc=pbc)
    for p in spec.perturbations:
        if p.kind == "LinearInterpolation":
            p = replace(p, toward=p.toward.with_N(N))
        h = apply_perturbation(h, p, pbc=pbc)
    return h


# ---------------------------------------------------------------- Bloch symbols

@dataclass
class BlochSymbol:
    """Translation-invariant blocks ``{r: (K_r, delta_r)}`` of a chain."""

    blocks: Dict[int, Tuple[np.ndarray, np.ndarray]]
    species: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.blocks:
            raise ValidationError("a Bloch symbol needs at least one block")
        blocks = {}
        for r, (Kr, Dr) in self.blocks.items():
            blocks[int(r)] = (np.array(Kr, dtype=complex), np.array(Dr, dtype=complex))
        shapes = {b.shape for pair in blocks.values() for b in pair}
        if len(shapes) != 1:
            raise ValidationError("all symbol blocks must share one square shape")
        n = next(iter(shapes))[0]
        zero = np.zeros((n, n), dtype=complex)
        for r in list(blocks):
            blocks.setdefault(-r, (zero, zero))
        scale = max(1.0, max(float(np.max(np.abs(b))) for pair in blocks.values() for b in pair))
        for r, (Kr, Dr) in blocks.items():
            Km, Dm = blocks[-r]
            if np.max(np.abs(Km - Kr.conj().T)) > STRUCTURE_RTOL * scale:
                raise ValidationError(f"hopping blocks at ranges {r} and {-r} are not adjoint")
            if np.max(np.abs(Dm - Dr.T)) > STRUCTURE_RTOL * scale:
                raise ValidationError(f"pairing blocks at ranges {r} and {-r} are not transposes")
        self.blocks = dict(sorted(blocks.items()))
        if not self.species:
            self.species = tuple(f"s{i}" for i in range(n))

    @property
    def n_cell(self) -> int:
        return next(iter(self.blocks.values()))[0].shape[0]

    @property
    def number_conserving(self) -> bool:
        return all(np.max(np.abs(D)) == 0 for _, D in self.blocks.values())

    def _sum(self, k, which: int, conj_mirror: bool = False) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=float))
        out = np.zeros((k.size, self.n_cell, self.n_cell), dtype=complex)
        for r, pair in self.blocks.items():
            out += np.exp(1j * k * r)[:, None, None] * pair[which][None]
        return out

    def K(self, k) -> np.ndarray:
        """``K(k)``; a scalar ``k`` gives one matrix, an array gives a stack."""
        out = self._sum(k, 0)
        return out[0] if np.ndim(k) == 0 else out

    def delta(self, k) -> np.ndarray:
        out = self._sum(k, 1)
        return out[0] if np.ndim(k) == 0 else out

    def K_im(self, k) -> np.ndarray:
        """Symbol of the real antisymmetric matrix ``Im K`` of the chain."""
        k_arr = np.atleast_1d(np.asarray(k, dtype=float))
        out = np.zeros((k_arr.size, self.n_cell, self.n_cell), dtype=complex)
        for r, (Kr, _) in self.blocks.items():
            out += np.exp(1j * k_arr * r)[:, None, None] * Kr.imag[None]
        return out[0] if np.ndim(k) == 0 else out

    def G(self, k) -> np.ndarray:
        """Symbol of the dynamical matrix, ``sum_r exp(ikr) G_r``."""
        k_arr = np.atleast_1d(np.asarray(k, dtype=float))
        m = self.n_cell
        out = np.zeros((k_arr.size, 2 * m, 2 * m), dtype=complex)
        for r, (Kr, Dr) in self.blocks.items():
            out += np.exp(1j * k_arr * r)[:, None, None] * dynamical_matrix(Kr, Dr)[None]
        return out[0] if np.ndim(k) == 0 else out

    def real_space(self, N: int, pbc: bool = False) -> QuadraticHamiltonian:
        """Finite chain assembled directly from the blocks."""
        m = self.n_cell
        K = np.zeros((m * N, m * N), dtype=complex)
        D = np.zeros_like(K)
        for r, (Kr, Dr) in self.blocks.items():
            if not pbc and abs(r) > N:
                continue
            S = shift_matrix(N, abs(r), pbc)
            if r < 0:
                S = S.T
            K += np.kron(Kr, S)
            D += np.kron(Dr, S)
        labels, cells = _layout(self.species, N)
        return QuadraticHamiltonian(K, D, labels, cells)


def bloch_symbol(spec: ModelSpec) -> BlochSymbol:
    """Bloch blocks of ``spec``, built from the model parameters (not from a finite chain)."""
    name = spec.name
    blocks: Dict[int, List[np.ndarray]] = {}

    def add(r: int, K: np.ndarray, D: Optional[np.ndarray] = None) -> None:
        m = K.shape[0]
        cur = blocks.setdefault(r, [np.zeros((m, m), complex), np.zeros((m, m), complex)])
        cur[0] = cur[0] + K
        if D is not None:
            cur[1] = cur[1] + D

    def unit(m: int, i: int, j: int, value: complex) -> np.ndarray:
        M = np.zeros((m, m), dtype=complex)
        M[i, j] = value
        return M

    if name in ("PhotoMagnonic", "PhotoMagnonicRWA"):
        t, g = _photo_magnonic_tg(spec)
        n = spec.n_offset
        wa, wm = float(np.real(spec.param("omega_a"))), float(np.real(spec.param("omega_m")))
        add(0, np.diag([wa, wm]).astype(complex))
        add(1, unit(2, 0, 0, -t))
        add(-1, unit(2, 0, 0, -np.conj(t)))
        add(n, unit(2, 1, 0, g))
        add(-n, unit(2, 0, 1, np.conj(g)))
        if name == "PhotoMagnonic":
            add(-n, np.zeros((2, 2)), unit(2, 0, 1, np.conj(g)))
            add(n, np.zeros((2, 2)), unit(2, 1, 0, np.conj(g)))
        species = ("a", "m")
    elif name == "BKC":
        t, d = float(np.real(spec.param("t"))), float(np.real(spec.param("delta")))
        one = np.ones((1, 1))
        add(1, 0.5j * t * one, 0.5j * d * one)
        add(-1, -0.5j * t * one, 0.5j * d * one)
        species = ("a",)
    else:
        t1, t2 = float(np.real(spec.param("t1"))), float(np.real(spec.param("t2")))
        add(0, np.array([[0, t1], [t1, 0]], dtype=complex))
        add(1, unit(2, 1, 0, t2))
        add(-1, unit(2, 0, 1, t2))
        species = ("a", "b")

    for p in spec.perturbations:
        if p.kind == "MagnonHopping":
            if species != ("a", "m"):
                raise ValidationError("magnon hopping needs the photo-magnonic layout")
            add(1, unit(2, 1, 1, -1j * p.strength))
            add(-1, unit(2, 1, 1, 1j * p.strength))
        elif p.kind == "SshChiralBreaking":
            if species != ("a", "b"):
                raise ValidationError("chiral-breaking term needs the SSH layout")
            add(1, -0.5j * p.strength * np.eye(2))
            add(-1, 0.5j * p.strength * np.eye(2))
        else:
            target = bloch_symbol(p.toward)
            if target.n_cell != len(species):
                raise ValidationError("interpolation endpoints need identical cells")
            x = p.strength
            for r in blocks:
                blocks[r] = [(1 - x) * b for b in blocks[r]]
            for r, (Kr, Dr) in target.blocks.items():
                add(r, x * Kr, x * Dr)
    return BlochSymbol({r: (K, D) for r, (K, D) in blocks.items()}, species)
