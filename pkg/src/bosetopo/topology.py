"""Symmetry classification and topological invariants of quadratic bosonic chains.

Orientation of winding numbers: the auxiliary matrix of a chain is
``B = sum_r kron(B_r, T^r)`` and its loop symbol is taken as
``B(k) = sum_r exp(-i k r) B_r``. With this orientation the winding of
``det B(k)`` equals ``dim ker B - dim ker B^dag`` for the chain terminated
on the left, i.e. a positive winding predicts zero modes on the left end.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import NumericalError, ValidationError
from .models import BlochSymbol, ModelSpec, bloch_symbol, build_model
from .qbh import QuadraticHamiltonian, beta, dynamical_matrix
from .spectral import ZeroModeReport, zero_modes

DEFAULT_TOL = 1e-8
MAX_WINDING_POINTS = 2 ** 20
MIN_WINDING_STEP = 1e-12
GAP_RTOL = 1e-10


# ---------------------------------------------------------------- Pfaffian

def _pf_cofactor(A: np.ndarray) -> float:
    n = A.shape[0]
    if n == 0:
        return 1.0
    if n == 2:
        return A[0, 1]
    total = 0.0
    rest = np.arange(1, n)
    for pos, j in enumerate(rest):
        if A[0, j] == 0:
            continue
        keep = np.delete(rest, pos)
        total += (-1) ** pos * A[0, j] * _pf_cofactor(A[np.ix_(keep, keep)])
    return total


def _pf_tridiagonal(A: np.ndarray) -> float:
    """Skew LTL^T elimination with partial pivoting (Parlett-Reid)."""
    A = A.copy()
    n = A.shape[0]
    result = 1.0
    for k in range(0, n - 1, 2):
        piv = k + 1 + int(np.argmax(np.abs(A[k + 1:, k])))
        if piv != k + 1:
            A[[k + 1, piv], :] = A[[piv, k + 1], :]
            A[:, [k + 1, piv]] = A[:, [piv, k + 1]]
            result = -result
        head = A[k, k + 1]
        if head == 0:
            return 0.0 * result
        result *= head
        if k + 2 < n:
            w = A[k, k + 2:] / head
            col = A[k + 2:, k + 1].copy()
            A[k + 2:, k + 2:] += np.outer(w, col) - np.outer(col, w)
    return result


def pfaffian(A: np.ndarray, method: str = "auto"):
    """Pfaffian of an antisymmetric matrix of even order.

    Orders up to 8 use exact cofactor expansion; larger ones use skew
    tridiagonal elimination. ``method`` may force ``"cofactor"`` or
    ``"tridiagonal"``.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError("Pfaffian needs a square matrix")
    n = A.shape[0]
    if n % 2:
        raise ValidationError("Pfaffian needs an even order")
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    if np.max(np.abs(A + A.T), initial=0.0) > 1e-9 * scale:
        raise ValidationError("matrix is not antisymmetric")
    A = (A - A.T) / 2
    if method == "auto":
        method = "cofactor" if n <= 8 else "tridiagonal"
    if method == "cofactor":
        return _pf_cofactor(A)
    if method == "tridiagonal":
        return _pf_tridiagonal(A)
    raise ValidationError(f"unknown Pfaffian method {method!r}")


# ---------------------------------------------------------------- results

@dataclass(frozen=True)
class InvariantResult:
    """Outcome of an invariant computation.

    ``kind`` is one of ``Winding``, ``Pfaffian``, ``Trivial`` or
    ``GapClosed``; ``value`` carries the integer for the first two.
    """

    kind: str
    value: Optional[int]
    gap_margin: float
    grid_size: int

    @property
    def gap_closed(self) -> bool:
        return self.kind == "GapClosed"

    def __str__(self) -> str:
        if self.kind == "Winding":
            return f"winding: {self.value}"
        if self.kind == "Pfaffian":
            return f"pfaffian: {self.value}"
        return self.kind


CLASS_LABELS = ("{}", "{T}", "{N}", "{S}", "{T,N}", "{T,S}", "{N,S}", "{T,N,S}")


@dataclass
class SymmetryClassReport:
    """Symmetries found on ``G`` (after ``local_dressing`` when one is given)."""

    time_reversal: bool
    number: bool
    squeezing: Optional[Tuple[float, float]]
    class_label: str
    local_dressing: Optional[np.ndarray] = None
    residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def symmetries(self) -> Tuple[str, ...]:
        out = []
        if self.time_reversal:
            out.append("T")
        if self.number:
            out.append("N")
        if self.squeezing is not None:
            out.append("S")
        return tuple(out)


def _label(T: bool, N: bool, S: bool) -> str:
    names = [n for n, on in (("T", T), ("N", N), ("S", S)) if on]
    return "{" + ",".join(names) + "}"


# ---------------------------------------------------------------- symmetry detection

def _scale(G: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(G), initial=0.0)))


def squeezing_axis(G: np.ndarray, tol: float = DEFAULT_TOL) -> Tuple[Optional[Tuple[float, float]], float]:
    """Unit ``(n1, n2)`` minimizing ``|[G, n1 b1 + n2 b2]|``; ``None`` if the residual exceeds ``tol``."""
    n = G.shape[0] // 2
    C1 = (G @ beta(1, n) - beta(1, n) @ G).ravel()
    C2 = (G @ beta(2, n) - beta(2, n) @ G).ravel()
    gram = np.array([[np.vdot(C1, C1), np.vdot(C1, C2)], [np.vdot(C2, C1), np.vdot(C2, C2)]]).real
    w, v = np.linalg.eigh(gram)
    n1, n2 = v[:, 0]
    if n1 < 0 or (n1 == 0 and n2 < 0):
        n1, n2 = -n1, -n2
    if abs(n2) < 1e-12:
        n1, n2 = 1.0, 0.0
    elif abs(n1) < 1e-12:
        n1, n2 = 0.0, 1.0
    C = n1 * C1 + n2 * C2
    res = float(np.max(np.abs(C), initial=0.0)) / _scale(G)
    return ((float(n1), float(n2)) if res <= tol else None), res


def _check_classes(G: np.ndarray, tol: float) -> Tuple[bool, bool, Optional[Tuple[float, float]], Dict[str, float]]:
    n = G.shape[0] // 2
    s = _scale(G)
    r_T = float(np.max(np.abs(G.imag), initial=0.0)) / s
    b3 = beta(3, n)
    r_N = float(np.max(np.abs(G @ b3 - b3 @ G), initial=0.0)) / s
    axis, r_S = squeezing_axis(G, tol)
    return r_T <= tol, r_N <= tol, axis, {"T": r_T, "N": r_N, "S": r_S}


def _phase_parity(z: complex, tol: float) -> Optional[int]:
    """Parity ``a`` with ``z`` real times ``i**a``; ``None`` if ``arg z`` is no multiple of pi/2."""
    q = 2 * np.angle(z) / np.pi
    a = int(np.round(q))
    if abs(q - a) > tol:
        return None
    return a % 2


def _solve_parities(n: int, constraints: List[Tuple[int, int, int]]) -> Optional[np.ndarray]:
    """Solve ``x_i + x_j = c (mod 2)`` by breadth-first propagation."""
    adj: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
    for i, j, c in constraints:
        if i == j:
            if c % 2:
                return None
            continue
        adj[i].append((j, c))
        adj[j].append((i, c))
    x = -np.ones(n, dtype=int)
    for start in range(n):
        if x[start] >= 0:
            continue
        x[start] = 0
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j, c in adj[i]:
                want = (c - x[i]) % 2
                if x[j] < 0:
                    x[j] = want
                    queue.append(j)
                elif x[j] != want:
                    return None
    return x


def _dressing_constraints(K: np.ndarray, D: np.ndarray, want_K: str, want_D: str,
                          tol: float) -> Optional[List[Tuple[int, int, int]]]:
    """Parity constraints making K (resp. D) entries real or imaginary after dressing.

    ``want_*`` is ``"real"``, ``"imag"``, ``"zero"`` or ``"any"``.
    """
    scale = max(1.0, float(np.max(np.abs(K), initial=0.0)), float(np.max(np.abs(D), initial=0.0)))
    cons: List[Tuple[int, int, int]] = []
    for M, want in ((K, want_K), (D, want_D)):
        if want == "any":
            continue
        rows, cols = np.nonzero(np.abs(M) > tol * scale)
        for i, j in zip(rows, cols):
            if j < i:
                continue
            if want == "zero":
                return None
            a = _phase_parity(M[i, j], tol * scale / abs(M[i, j]) + 1e-9)
            if a is None:
                return None
            cons.append((int(i), int(j), (a + (1 if want == "imag" else 0)) % 2))
    return cons


_TARGETS = (
    # (T, N, S axis) -> requirements on (K, delta) in the dressed frame
    ((False, True, (1.0, 0.0)), ("imag", "zero")),
    ((True, False, (0.0, 1.0)), ("zero", "real")),
    ((True, True, None), ("real", "zero")),
    ((False, False, (1.0, 0.0)), ("imag", "imag")),
    ((False, False, (0.0, 1.0)), ("imag", "real")),
    ((True, False, None), ("real", "real")),
)


def _class_score(T: bool, N: bool, S: bool) -> Tuple[int, bool]:
    # more symmetries first; on a tie prefer the classes with a computable
    # invariant ({S}, {N,S}) over the ones with time reversal
    return int(T) + int(N) + int(S), S and not T


def detect_symmetry_class(h: QuadraticHamiltonian, tol: float = DEFAULT_TOL,
                          search_dressing: bool = False) -> SymmetryClassReport:
    """Detect time reversal, number and squeezing symmetries of ``h``.

    With ``search_dressing`` the per-mode phases ``{1, i}`` (equivalently
    ``{1, i, -1, -i}``, since only the phase modulo pi matters) are searched
    for a frame with a larger symmetry set, or an equally large set that
    carries a computable invariant (so the real SSH chain, class {T,N},
    is reported in its dressed class {N,S}). The phases are found by
    solving parity constraints exactly rather than by enumeration.
    """
    G = h.dynamical_matrix()
    T, N, S, res = _check_classes(G, tol)
    best = SymmetryClassReport(T, N, S, _label(T, N, S is not None), None, res)
    if not search_dressing:
        return best
    score = _class_score(T, N, S is not None)
    for (tT, tN, tS), (want_K, want_D) in _TARGETS:
        if _class_score(tT, tN, tS is not None) <= score:
            continue
        cons = _dressing_constraints(h.K, h.delta, want_K, want_D, tol)
        if cons is None:
            continue
        x = _solve_parities(h.n_modes, cons)
        if x is None:
            continue
        phases = 1j ** x
        Gd = dressed(h, phases).dynamical_matrix()
        dT, dN, dS, dres = _check_classes(Gd, tol)
        got = _class_score(dT, dN, dS is not None)
        if got > score:
            best = SymmetryClassReport(dT, dN, dS, _label(dT, dN, dS is not None), phases, dres)
            score = got
    return best


def dressed(h: QuadraticHamiltonian, phases: Sequence[complex]) -> QuadraticHamiltonian:
    """Hamiltonian in the frame ``a_j -> phases[j] a_j``."""
    d = np.asarray(phases, dtype=complex)
    K = d.conj()[:, None] * h.K * d[None, :]
    D = d.conj()[:, None] * h.delta * d.conj()[None, :]
    return QuadraticHamiltonian(K, D, h.labels, h.cells)


# ---------------------------------------------------------------- symbol-level dressing

def dress_symbol(sym: BlochSymbol, species_phases: Sequence[complex], momentum_quarter: int = 0) -> BlochSymbol:
    """Apply ``a_{s,j} -> species_phases[s] * i**(q j) a_{s,j}`` to a symbol.

    The site-dependent factor shifts momentum by ``q pi/2``; it is how a real
    photon hopping is turned into an imaginary one.
    """
    d = np.asarray(species_phases, dtype=complex)
    q = int(momentum_quarter)
    if q % 2 and not sym.number_conserving:
        raise ValidationError("an odd momentum shift breaks translation invariance of pairing terms")
    blocks = {}
    for r, (Kr, Dr) in sym.blocks.items():
        K = (1j) ** (-q * r) * d.conj()[:, None] * Kr * d[None, :]
        D = (-1) ** (q * r // 2) * d.conj()[:, None] * Dr * d.conj()[None, :] if q % 2 == 0 else Dr
        blocks[r] = (K, D)
    return BlochSymbol(blocks, sym.species)


def _symbol_pfaffian_frame(sym: BlochSymbol, tol: float) -> Optional[BlochSymbol]:
    """A dressed copy of ``sym`` whose hopping blocks are purely imaginary, if one exists."""
    m = sym.n_cell
    scale = max(1.0, max(float(np.max(np.abs(Kr))) for Kr, _ in sym.blocks.values()))
    for q in (0, 1):
        cons = []
        ok = True
        for r, (Kr, _) in sym.blocks.items():
            rows, cols = np.nonzero(np.abs(Kr) > tol * scale)
            for s, t in zip(rows, cols):
                a = _phase_parity(Kr[s, t], tol * scale / abs(Kr[s, t]) + 1e-9)
                if a is None:
                    ok = False
                    break
                cons.append((int(s), int(t), (a + 1 + q * r) % 2))
            if not ok:
                break
        if not ok:
            continue
        x = _solve_parities(m, cons)
        if x is None:
            continue
        return dress_symbol(sym, 1j ** x, q)
    return None


def _symbol_squeezing(sym: BlochSymbol, tol: float) -> Optional[Tuple[float, float]]:
    """Squeezing axis shared by all blocks of a symbol, if any."""
    scale = max(1.0, max(float(max(np.max(np.abs(K)), np.max(np.abs(D)))) for K, D in sym.blocks.values()))
    if any(np.max(np.abs(K.real)) > tol * scale for K, _ in sym.blocks.values()):
        return None
    re = np.concatenate([D.real.ravel() for _, D in sym.blocks.values()])
    im = np.concatenate([D.imag.ravel() for _, D in sym.blocks.values()])
    M = np.stack([re, -im], axis=1)
    _, sv, vt = np.linalg.svd(M, full_matrices=False) if M.size else (None, np.zeros(2), np.eye(2))
    n1, n2 = vt[-1]
    if n1 < 0 or (n1 == 0 and n2 < 0):
        n1, n2 = -n1, -n2
    if abs(n2) < 1e-12:
        n1, n2 = 1.0, 0.0
    elif abs(n1) < 1e-12:
        n1, n2 = 0.0, 1.0
    if np.max(np.abs(n1 * re - n2 * im), initial=0.0) > tol * scale:
        return None
    return float(n1), float(n2)


# ---------------------------------------------------------------- auxiliary matrix

class LoopSymbol:
    """Matrix-valued loop ``k -> sum_r exp(-i k r) B_r`` (index orientation)."""

    def __init__(self, blocks: Dict[int, np.ndarray]):
        self.blocks = {int(r): np.atleast_2d(np.asarray(B, dtype=complex)) for r, B in blocks.items()}

    def __call__(self, k):
        k_arr = np.atleast_1d(np.asarray(k, dtype=float))
        m = next(iter(self.blocks.values())).shape[0]
        out = np.zeros((k_arr.size, m, m), dtype=complex)
        for r, B in self.blocks.items():
            out += np.exp(-1j * k_arr * r)[:, None, None] * B[None]
        return out[0] if np.ndim(k) == 0 else out


def _reduced_pairing(delta_re: np.ndarray, delta_im: np.ndarray, axis: Tuple[float, float]) -> np.ndarray:
    n1, n2 = axis
    return n1 * delta_im + n2 * delta_re


def auxiliary_B(x: Union[QuadraticHamiltonian, BlochSymbol],
                squeeze: Optional[Tuple[float, float]] = None,
                tol: float = DEFAULT_TOL) -> Union[np.ndarray, LoopSymbol]:
    """Auxiliary matrix ``B = i(K_im - D)`` of a squeezing-symmetric Hamiltonian.

    ``D = n1 Im(delta) + n2 Re(delta)``; on the class this equals
    ``Im(delta)/n1 = Re(delta)/n2``, so the formula is regular on and off
    the axes. For a Hamiltonian the real-space matrix is returned, for a
    symbol a :class:`LoopSymbol`.
    """
    if squeeze is not None:
        n1, n2 = squeeze
        if n1 == 0 and n2 == 0:
            raise ValidationError("squeezing axis (0, 0) is not a generator")
        if abs(n1 * n1 + n2 * n2 - 1) > 1e-10:
            raise ValidationError("squeezing axis must be a unit vector")
    if isinstance(x, QuadraticHamiltonian):
        G = x.dynamical_matrix()
        axis = squeeze
        if axis is None:
            axis, _ = squeezing_axis(G, tol)
            if axis is None:
                raise ValidationError("Hamiltonian has no squeezing symmetry")
        else:
            n = x.n_modes
            gen = axis[0] * beta(1, n) + axis[1] * beta(2, n)
            if np.max(np.abs(G @ gen - gen @ G)) > tol * _scale(G):
                raise ValidationError(f"Hamiltonian does not commute with squeezing axis {axis}")
        return 1j * (x.K.imag - _reduced_pairing(x.delta.real, x.delta.imag, axis))
    if squeeze is None:
        axis = _symbol_squeezing(x, tol)
        if axis is None:
            raise ValidationError("symbol has no squeezing symmetry")
    else:
        axis = squeeze
        scale = max(1.0, max(float(max(np.max(np.abs(K)), np.max(np.abs(D)))) for K, D in x.blocks.values()))
        worst = max(max(np.max(np.abs(K.real)), np.max(np.abs(axis[0] * D.real - axis[1] * D.imag)))
                    for K, D in x.blocks.values())
        if worst > tol * scale:
            raise ValidationError(f"symbol does not commute with squeezing axis {squeeze}")
    return LoopSymbol({r: 1j * (K.imag - _reduced_pairing(D.real, D.imag, axis))
                       for r, (K, D) in x.blocks.items()})


# ---------------------------------------------------------------- winding

def _det_on(B: Callable, k: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(B(k), dtype=complex)
        if vals.shape[:1] != k.shape:
            raise ValueError
    except (ValueError, TypeError):
        vals = np.array([np.asarray(B(float(kk)), dtype=complex) for kk in k])
    if vals.ndim == 1:
        return vals
    return np.linalg.det(vals)


def phase_steps(z: np.ndarray) -> np.ndarray:
    """Wrapped phase increments between consecutive samples of a closed loop."""
    return np.angle(z[1:] * np.conj(z[:-1]))


def winding_number(B: Callable, grid: int = 256) -> InvariantResult:
    """Winding of ``det B(k)`` around the origin as ``k`` runs over ``[-pi, pi]``.

    Intervals whose phase step reaches pi/2 are bisected until every step is
    smaller; the search stops with ``GapClosed`` once ``|det B|`` falls below
    ``1e-10`` of its maximum.
    """
    if grid < 64:
        raise ValidationError("grid must be at least 64")
    k = np.linspace(-np.pi, np.pi, grid + 1)
    z = _det_on(B, k[:-1])
    z = np.append(z, z[0])
    while True:
        a = np.abs(z)
        peak = float(a.max())
        margin = float(a.min())
        if peak == 0 or margin < GAP_RTOL * peak:
            return InvariantResult("GapClosed", None, margin, k.size - 1)
        steps = phase_steps(z)
        bad = np.flatnonzero(np.abs(steps) >= np.pi / 2)
        if bad.size == 0:
            break
        if k.size + bad.size > MAX_WINDING_POINTS:
            raise NumericalError("winding refinement exceeded 2**20 points; gap too close to closing")
        if np.min(k[bad + 1] - k[bad]) < MIN_WINDING_STEP:
            raise NumericalError("phase of det B jumps at a point; B(k) is not continuous")
        mid = (k[bad] + k[bad + 1]) / 2
        zm = _det_on(B, mid)
        k = np.insert(k, bad + 1, mid)
        z = np.insert(z, bad + 1, zm)
    total = float(np.sum(steps)) / (2 * np.pi)
    value = int(np.round(total))
    if abs(total - value) > 1e-3:
        raise NumericalError(f"accumulated phase {total} is not an integer winding")
    return InvariantResult("Winding", value, margin, k.size - 1)


# ---------------------------------------------------------------- Pfaffian invariant

def _uniform_grid(grid: int) -> np.ndarray:
    return -np.pi + 2 * np.pi * np.arange(grid) / grid


def pfaffian_frame(sym: BlochSymbol, tol: float = DEFAULT_TOL) -> BlochSymbol:
    """Return ``sym`` in a frame where it is in class {N,S} with imaginary hopping."""
    if not sym.number_conserving:
        raise ValidationError("Pfaffian invariant needs number symmetry: the symbol has pairing terms")
    if sym.n_cell % 2:
        raise ValidationError("Pfaffian invariant needs an even number of modes per cell")
    frame = _symbol_pfaffian_frame(sym, tol)
    if frame is None:
        raise ValidationError("no diagonal dressing makes the hopping matrix imaginary; "
                              "the symbol is not in class {N,S}")
    return frame


def pfaffian_invariant(sym: BlochSymbol, grid: int = 1024, tol: float = DEFAULT_TOL) -> InvariantResult:
    """Z2 invariant ``sign(Pf(-i K(0)) / Pf(-i K(-pi)))`` of a class {N,S} symbol.

    ``gap_margin`` is the smallest ``|eigenvalue|`` of ``K(k)`` over a
    uniform grid. The gap is also declared closed when ``det K(k)`` changes
    sign between grid points, which catches bands crossing zero off-grid.
    """
    frame = pfaffian_frame(sym, tol)
    ks = _uniform_grid(grid)
    Kk = frame.K(ks)
    bands = np.linalg.eigvalsh(Kk)
    margin = float(np.min(np.abs(bands)))
    peak = float(np.max(np.abs(bands)))
    signs = np.sign(np.prod(bands, axis=1))
    if peak == 0 or margin < GAP_RTOL * peak or np.any(signs != signs[0]):
        return InvariantResult("GapClosed", None, 0.0 if np.any(signs != signs[0]) else margin, grid)
    ends = []
    for k0 in (0.0, -np.pi):
        A = -1j * frame.K(k0)
        if np.max(np.abs(A.imag)) > tol * max(1.0, peak):
            raise ValidationError(f"-iK({k0:g}) is not real")
        ends.append(pfaffian(A.real))
    return InvariantResult("Pfaffian", int(np.sign(ends[0] / ends[1])), margin, grid)


# ---------------------------------------------------------------- Berry winding

def berry_winding_from_vectors(U: np.ndarray, reference: int = -1) -> float:
    """Unrounded Berry winding of a closed loop of eigenvectors ``U[i]`` (rows).

    Each vector is first rotated so component ``reference`` is real and
    positive, which removes any phase freedom and yields a smooth periodic
    gauge; the Berry phase is then summed step by step without wrapping.
    """
    U = np.asarray(U, dtype=complex)
    ref = U[:, reference]
    if np.min(np.abs(ref)) < 1e-8 * np.max(np.abs(U)):
        raise NumericalError("reference component vanishes on the loop; pick another reference")
    V = U * (np.abs(ref) / ref)[:, None]
    V = np.vstack([V, V[:1]])
    overlaps = np.einsum("ij,ij->i", V[:-1].conj(), V[1:])
    return float(-np.sum(np.angle(overlaps)) / np.pi)


def wilson_loop_phase(U: np.ndarray) -> float:
    """``-(1/pi) Im log prod <u_i|u_{i+1}>``; determined only modulo 2."""
    U = np.asarray(U, dtype=complex)
    V = np.vstack([U, U[:1]])
    overlaps = np.einsum("ij,ij->i", V[:-1].conj(), V[1:])
    return float(-np.angle(np.prod(overlaps / np.abs(overlaps))) / np.pi)


def band_vectors(sym: BlochSymbol, band: Union[str, int], k: np.ndarray) -> np.ndarray:
    Kk = sym.K(k)
    if np.max(np.abs(Kk - np.conj(np.swapaxes(Kk, 1, 2)))) > 1e-12 * max(1.0, np.max(np.abs(Kk))):
        raise ValidationError("K(k) is not Hermitian")
    w, V = np.linalg.eigh(Kk)
    idx = {"plus": w.shape[1] - 1, "minus": 0}.get(band, band) if isinstance(band, str) else int(band)
    if not isinstance(idx, int) or not (0 <= idx < w.shape[1]):
        raise ValidationError(f"unknown band {band!r}")
    spread = max(1.0, float(np.max(np.abs(w))))
    gaps = []
    if idx > 0:
        gaps.append(np.min(w[:, idx] - w[:, idx - 1]))
    if idx < w.shape[1] - 1:
        gaps.append(np.min(w[:, idx + 1] - w[:, idx]))
    if gaps and min(gaps) < 1e-10 * spread:
        raise NumericalError("band is degenerate somewhere on the grid")
    return V[:, :, idx]


def berry_winding(sym: BlochSymbol, band: Union[str, int] = "plus", grid: int = 256,
                  reference: int = -1, max_grid: int = 4096) -> int:
    """Integer Berry winding ``(1/i pi) \\oint <u|du>`` of one band.

    The integer is defined in the gauge where component ``reference`` of
    the band eigenvector (default: the last species of the cell) is real
    and positive. The grid doubles until the value is within 1e-3 of an
    integer.
    """
    g = int(grid)
    while True:
        k = _uniform_grid(g)
        value = berry_winding_from_vectors(band_vectors(sym, band, k), reference)
        if abs(value - np.round(value)) <= 1e-3:
            return int(np.round(value))
        if g >= max_grid:
            raise NumericalError(f"Berry winding {value:.6f} is not quantized at grid {g}")
        g *= 2


# ---------------------------------------------------------------- classification of models

def symbol_invariant(sym: BlochSymbol, grid: int = 1024, tol: float = DEFAULT_TOL) -> InvariantResult:
    """Pick the invariant that applies to ``sym``: Pfaffian for {N,S}, winding for {S}."""
    if sym.number_conserving and sym.n_cell % 2 == 0 and _symbol_pfaffian_frame(sym, tol) is not None:
        return pfaffian_invariant(sym, grid=grid, tol=tol)
    if _symbol_squeezing(sym, tol) is not None and not sym.number_conserving:
        return winding_number(auxiliary_B(sym, tol=tol), grid=max(64, grid))
    return InvariantResult("Trivial", None, float("nan"), grid)


def classify(h: QuadraticHamiltonian, tol: float = DEFAULT_TOL, search_dressing: bool = True) -> str:
    return detect_symmetry_class(h, tol, search_dressing).class_label


@dataclass
class BulkBoundaryReport:
    invariant: InvariantResult
    left_count: int
    right_count: int
    zero_modes: ZeroModeReport
    tol: float
    decoupled: bool
    holds: bool


def bulk_gap(sym: BlochSymbol, grid: int = 1024) -> float:
    """Smallest ``|eigenvalue|`` of ``G(k)`` over a uniform grid."""
    return float(np.min(np.abs(np.linalg.eigvals(sym.G(_uniform_grid(grid))))))


def bulk_boundary_check(spec: ModelSpec, N: Optional[int] = None, tol: Optional[float] = None,
                        grid: int = 1024) -> BulkBoundaryReport:
    """Compare the bulk invariant with zero modes on the left end of an open chain.

    Zero modes are eigenvalues below ``tol`` (default ``1e-2`` of the bulk
    gap of the symbol), localized within the zero subspace. For the Pfaffian
    class the left count must have the parity of the invariant; for the
    winding class it must be at least ``|winding|``.
    """
    N = spec.N if N is None else N
    if N < 8:
        raise ValidationError("bulk-boundary check needs N >= 8")
    sym = bloch_symbol(spec)
    inv = symbol_invariant(sym, grid=grid)
    if inv.kind == "Trivial":
        raise ValidationError("model is in no class with a computable invariant")
    if tol is None:
        tol = 1e-2 * bulk_gap(sym, grid)
    report = zero_modes(build_model(spec, N=N), tol)
    left = [m for m in report.modes if m.side == "left"]
    right_count = report.count - len(left)
    cross = max([1 - m.left_fraction for m in left], default=0.0)
    if inv.kind == "Pfaffian":
        holds = (-1) ** len(left) == inv.value
    elif inv.kind == "Winding":
        holds = len(left) >= abs(inv.value)
    else:
        holds = False
    return BulkBoundaryReport(inv, len(left), right_count, report, float(tol), cross < 1e-4, holds)
