"""Dense spectra, band structures and zero-mode diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .errors import NumericalError, ValidationError
from .models import BlochSymbol, ModelSpec, build_model
from .qbh import QuadraticHamiltonian, dynamical_matrix, split_dynamical_matrix

RESIDUAL_RTOL = 1e-8
DEFECT_RTOL = 1e-6
ZERO_RTOL = 1e-8


def _spectral_radius(w: np.ndarray) -> float:
    return float(np.max(np.abs(w))) if w.size else 0.0


def _mode_weights(V: np.ndarray, n_modes: int) -> np.ndarray:
    """Per-mode probability of each column, summing particle and hole parts."""
    p = np.abs(V) ** 2
    if p.shape[0] == 2 * n_modes:
        p = p[:n_modes] + p[n_modes:]
    total = p.sum(axis=0)
    total[total == 0] = 1.0
    return p / total


def _cell_weights(V: np.ndarray, cells: Sequence[int]) -> np.ndarray:
    cells = np.asarray(cells)
    p = _mode_weights(V, len(cells))
    out = np.zeros((cells.max() + 1, V.shape[1]))
    np.add.at(out, cells, p)
    return out


@dataclass
class SpectrumResult:
    """Eigen-decomposition of a dynamical matrix with per-pair diagnostics."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    ipr: np.ndarray
    tau3_norms: np.ndarray
    flags: List[str]

    @property
    def spectral_radius(self) -> float:
        return _spectral_radius(self.eigenvalues)


def diagonalize(G: np.ndarray) -> SpectrumResult:
    """Eigenpairs of ``G`` with residuals, IPR and symplectic norms.

    Flags name eigenpairs whose residual exceeds ``1e-8`` of the spectral
    radius (``nonconverged:i``) and clusters whose eigenvectors are nearly
    parallel (``defective:i,j``).
    """
    G = np.asarray(G, dtype=complex)
    if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] % 2:
        raise ValidationError("G must be a square matrix of even order")
    if not np.all(np.isfinite(G)):
        raise NumericalError("G contains NaN or Inf")
    n = G.shape[0] // 2
    w, V = np.linalg.eig(G)
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(V))):
        raise NumericalError("eigensolver returned non-finite values")
    V = V / np.linalg.norm(V, axis=0)
    rho = max(_spectral_radius(w), np.finfo(float).tiny)
    res = np.linalg.norm(G @ V - V * w, axis=0) / rho
    t3 = np.r_[np.ones(n), -np.ones(n)]
    t3n = np.real(np.einsum("ij,i,ij->j", V.conj(), t3, V))
    p = _mode_weights(V, n)
    ipr = np.sum(p ** 2, axis=0)

    flags = [f"nonconverged:{i}" for i in np.flatnonzero(res > RESIDUAL_RTOL)]
    order = np.argsort(w.real)
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            i, j = order[a], order[b]
            if abs(w[i].real - w[j].real) > DEFECT_RTOL * rho:
                break
            if abs(w[i] - w[j]) <= DEFECT_RTOL * rho and abs(np.vdot(V[:, i], V[:, j])) > 1 - 1e-6:
                flags.append(f"defective:{min(i, j)},{max(i, j)}")
    return SpectrumResult(w, V, res, ipr, t3n, flags)


def sort_spectrum(w: np.ndarray) -> np.ndarray:
    """Sort eigenvalues by real part, then imaginary part (along the last axis)."""
    w = np.asarray(w)
    idx = np.lexsort((w.imag, w.real), axis=-1)
    return np.take_along_axis(w, idx, axis=-1)


def band_structure(sym: BlochSymbol, k_grid: Sequence[float]) -> np.ndarray:
    """Eigenvalues of ``G(k)`` for every ``k``, shape ``(len(k_grid), 2 n_cell)``."""
    k = np.asarray(k_grid, dtype=float)
    if k.ndim != 1 or k.size == 0:
        raise ValidationError("k_grid must be a non-empty 1-d sequence")
    if np.any(k < -np.pi - 1e-12) or np.any(k >= np.pi + 1e-12):
        raise ValidationError("k values must lie in [-pi, pi)")
    return sort_spectrum(np.linalg.eigvals(sym.G(k)))


def hopping_bands(sym: BlochSymbol, k_grid: Sequence[float]) -> np.ndarray:
    """Real bands of the Hermitian ``K(k)`` (number-conserving symbols)."""
    return np.linalg.eigvalsh(sym.K(np.asarray(k_grid, dtype=float)))


@dataclass
class ZeroMode:
    """One zero mode after localization within the zero-energy subspace."""

    eigenvalue: complex
    vector: np.ndarray
    cell_weights: np.ndarray
    edge_weight_left: float
    edge_weight_right: float
    left_fraction: float
    localization_length: float
    delocalized: bool
    ipr: float
    disconnected: bool

    @property
    def side(self) -> str:
        return "left" if self.left_fraction > 0.5 else "right"


@dataclass
class ZeroModeReport:
    """Zero modes of a Hamiltonian.

    For number-conserving Hamiltonians each zero mode of ``K`` counts once
    (its hole partner in ``G`` is implied); otherwise every null vector of
    ``G`` counts.
    """

    count: int
    tol: float
    modes: List[ZeroMode]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([m.eigenvalue for m in self.modes])

    def count_on(self, side: str) -> int:
        return sum(1 for m in self.modes if m.side == side)


def _localization_fit(mass: np.ndarray) -> tuple:
    """Exponential fit of per-cell mass; returns ``(length, slope)``.

    The length refers to the amplitude, so ``mass ~ exp(-2x/length)``.
    """
    n = mass.size
    peak = float(mass.max())
    floor = 1e-20 * peak
    x = np.arange(n)
    keep = mass > floor
    inner = keep.copy()
    if n > 4:
        inner[[0, -1]] = False
    if inner.sum() >= 2:
        keep = inner
    if keep.sum() < 2:
        slope = np.log(floor / peak)
        return 2.0 / abs(slope), slope
    slope = np.polyfit(x[keep], np.log(mass[keep]), 1)[0]
    if slope == 0:
        return np.inf, 0.0
    return 2.0 / abs(slope), float(slope)


def _disconnected_modes(K: np.ndarray, D: np.ndarray) -> np.ndarray:
    off = np.abs(K - np.diag(np.diag(K)))
    return (off.sum(axis=0) + off.sum(axis=1) + np.abs(D).sum(axis=0) + np.abs(np.diag(K))) == 0


def zero_modes(h: Union[QuadraticHamiltonian, np.ndarray], tol: Optional[float] = None,
               cells: Optional[Sequence[int]] = None) -> ZeroModeReport:
    """Find and localize the zero modes of ``h`` (or of a raw dynamical matrix).

    The zero-energy subspace (all eigenvalues with ``|w| < tol``, default
    ``1e-8`` of the spectral radius) is rotated to diagonalize the cell
    position operator, which separates modes living on opposite ends even
    when finite-size hybridization has mixed them.
    """
    if isinstance(h, QuadraticHamiltonian):
        K, D, cells = h.K, h.delta, h.cells
    else:
        K, D = split_dynamical_matrix(h)
        cells = tuple(range(K.shape[0])) if cells is None else tuple(cells)
    n = K.shape[0]
    scale = max(np.max(np.abs(K), initial=0.0), np.max(np.abs(D), initial=0.0))
    number_conserving = np.max(np.abs(D), initial=0.0) <= 1e-12 * max(1.0, scale)
    if number_conserving:
        w, V = np.linalg.eigh(K)
        V = np.vstack([V, np.zeros_like(V)])
    else:
        G = dynamical_matrix(K, D)
        if not np.all(np.isfinite(G)):
            raise NumericalError("G contains NaN or Inf")
        w, V = np.linalg.eig(G)
        V = V / np.linalg.norm(V, axis=0)
    rho = _spectral_radius(w)
    if tol is None:
        tol = ZERO_RTOL * rho
    sel = np.flatnonzero(np.abs(w) <= tol)
    if sel.size == 0:
        return ZeroModeReport(0, float(tol), [])

    Q, _ = np.linalg.qr(V[:, sel])
    position = np.r_[np.asarray(cells, float), np.asarray(cells, float)]
    X = Q.conj().T @ (position[:, None] * Q)
    _, U = np.linalg.eigh((X + X.conj().T) / 2)
    Q = Q @ U

    if number_conserving:
        Kq = Q[:n].conj().T @ K @ Q[:n]
        lam = np.real(np.diag(Kq))
    else:
        Gq = Q.conj().T @ dynamical_matrix(K, D) @ Q
        lam = np.diag(Gq)

    n_cells = max(cells) + 1
    cell_arr = np.asarray(cells)
    left_w = np.where(cell_arr < (n_cells - 1) / 2, 1.0, np.where(cell_arr == (n_cells - 1) / 2, 0.5, 0.0))
    mass = _cell_weights(Q, cells)
    p = _mode_weights(Q, n)
    lonely = _disconnected_modes(K, D)
    modes = []
    for c in range(Q.shape[1]):
        length, slope = _localization_fit(mass[:, c])
        modes.append(ZeroMode(
            eigenvalue=complex(lam[c]),
            vector=Q[:, c],
            cell_weights=mass[:, c],
            edge_weight_left=float(mass[0, c]),
            edge_weight_right=float(mass[-1, c]),
            left_fraction=float(np.sum(left_w * p[:, c])),
            localization_length=float(length),
            delocalized=bool(abs(slope) < 1.0 / n_cells),
            ipr=float(np.sum(p[:, c] ** 2)),
            disconnected=bool(np.any(lonely & (p[:, c] > 1 - 1e-10))),
        ))
    return ZeroModeReport(len(modes), float(tol), modes)


OBSERVABLES = ("min_abs_eigenvalue", "gap", "zero_mode_count")


@dataclass
class ScanResult:
    sizes: List[int]
    values: List[float]
    observable: str
    decay_rate: float
    r_squared: float
    rows: List[Dict[str, float]] = field(default_factory=list)


def _spectrum_of(h: QuadraticHamiltonian) -> np.ndarray:
    if h.number_conserving:
        return np.linalg.eigvalsh(h.K).astype(complex)
    return np.linalg.eigvals(h.dynamical_matrix())


def finite_size_scan(spec: ModelSpec, sizes: Sequence[int], observable: str, pbc: bool = False,
                     tol: Optional[float] = None) -> ScanResult:
    """Evaluate an observable over chain lengths and fit ``value ~ exp(-rate N)``.

    ``gap`` is the smallest ``|w|`` among eigenvalues that are not zero modes
    (``|w| > tol``).
    """
    if observable not in OBSERVABLES:
        raise ValidationError(f"observable must be one of {OBSERVABLES}")
    values = []
    for N in sizes:
        h = build_model(spec, N=N, pbc=pbc)
        if observable == "zero_mode_count":
            values.append(float(zero_modes(h, tol).count))
            continue
        a = np.abs(_spectrum_of(h))
        if observable == "min_abs_eigenvalue":
            values.append(float(a.min()))
        else:
            cut = ZERO_RTOL * a.max() if tol is None else tol
            rest = a[a > cut]
            values.append(float(rest.min()) if rest.size else 0.0)
    x = np.asarray(sizes, float)
    y = np.asarray(values, float)
    ok = y > 0
    rate, r2 = float("nan"), float("nan")
    if ok.sum() >= 2:
        slope, icpt = np.polyfit(x[ok], np.log(y[ok]), 1)
        fit = slope * x[ok] + icpt
        ly = np.log(y[ok])
        ss_tot = np.sum((ly - ly.mean()) ** 2)
        rate = float(-slope)
        r2 = float(1 - np.sum((ly - fit) ** 2) / ss_tot) if ss_tot > 0 else 1.0
    rows = [{"N": int(N), observable: v} for N, v in zip(sizes, values)]
    return ScanResult(list(sizes), values, observable, rate, r2, rows)
