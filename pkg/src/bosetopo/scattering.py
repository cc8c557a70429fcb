"""Input-output theory: S-parameters and driven mean-field profiles.

Every mode ``j`` may leak into a bath at rate ``kappa_j``; some of those
channels are ports that are driven and read out. In the positive-frequency
sector the mean fields ``v = [<a(w)>, <a^dag(-w)>]`` solve
``R(w) v = i [sqrt(kappa) b_in, 0]`` with the response matrix

    R(w) = w I - tau3 H + (i/2) diag(damping, 0),   H = G tau3,

and ``b_out = b_in - conj(sqrt(kappa)) <a>`` on every port.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import NumericalError, ValidationError
from .qbh import QuadraticHamiltonian, tau

SINGULAR_COND = 1e13


@dataclass(frozen=True)
class Port:
    """A drive/readout channel attached to ``mode`` with coupling rate ``kappa`` (Hz)."""

    mode: int
    kappa: complex


@dataclass
class ScatteringSetup:
    """Hamiltonian plus losses.

    Parameters
    ----------
    h : QuadraticHamiltonian
    kappa : sequence of complex
        Per-mode loss rates. A port given as a bare mode index uses this
        rate as its coupling, so the loss is not counted twice.
    ports : sequence of int or Port
        Drive/readout channels in port order. ``Port`` entries add a
        separate channel on top of ``kappa``, which allows two antennas on
        the same cavity.
    """

    h: QuadraticHamiltonian
    kappa: np.ndarray
    ports: Tuple[Union[int, Port], ...]

    def __post_init__(self) -> None:
        n = self.h.n_modes
        self.kappa = np.asarray(self.kappa, dtype=complex)
        if self.kappa.shape != (n,):
            raise ValidationError(f"kappa needs one rate per mode ({n})")
        if not np.all(np.isfinite(self.kappa)):
            raise ValidationError("loss rates must be finite")
        if not self.ports:
            raise ValidationError("at least one port is needed")
        channels = []
        damping = np.abs(self.kappa).astype(float)
        for p in self.ports:
            if isinstance(p, Port):
                mode, rate = p.mode, complex(p.kappa)
                if 0 <= mode < n:
                    damping[mode] += abs(rate)
            else:
                mode = int(p)
                rate = self.kappa[mode] if 0 <= mode < n else 0
            if not (0 <= mode < n):
                raise ValidationError(f"port mode {mode} out of range")
            channels.append((mode, np.sqrt(complex(rate))))
        self.ports = tuple(self.ports)
        self._channels = channels
        self._damping = damping

    @property
    def n_ports(self) -> int:
        return len(self._channels)

    @property
    def port_modes(self) -> List[int]:
        return [m for m, _ in self._channels]

    @property
    def damping(self) -> np.ndarray:
        return self._damping.copy()


def chain_setup(h: QuadraticHamiltonian, kappa_c: float = 0.5e6, kappa_m: float = 10e6,
                port_species: str = "a") -> ScatteringSetup:
    """Default losses of a cavity chain: ports on the two boundary photons.

    Boundary photons couple to the ports at ``kappa_c``, bulk photons are
    lossless and every other species decays at ``kappa_m``. A single cell
    gets two antennas on its one photon.
    """
    kappa = np.zeros(h.n_modes, dtype=complex)
    photons = [i for i, lab in enumerate(h.labels) if lab.split("_")[0] == port_species]
    if not photons:
        raise ValidationError(f"no modes of species {port_species!r}")
    for i, lab in enumerate(h.labels):
        if lab.split("_")[0] != port_species:
            kappa[i] = kappa_m
    first = min(photons, key=lambda i: h.cells[i])
    last = max(photons, key=lambda i: h.cells[i])
    if first == last:
        return ScatteringSetup(h, kappa, (Port(first, kappa_c), Port(first, kappa_c)))
    kappa[first] = kappa_c
    kappa[last] = kappa_c
    return ScatteringSetup(h, kappa, (first, last))


def response_matrix(setup: ScatteringSetup, omega: float) -> np.ndarray:
    """``R(w) = w I - tau3 G tau3 + (i/2) diag(damping, 0)`` for ``w > 0``."""
    if not omega > 0:
        raise ValidationError("response matrix is defined for positive frequencies only")
    return _response_stack(setup, np.array([float(omega)]))[0]


def _response_stack(setup: ScatteringSetup, omegas: np.ndarray) -> np.ndarray:
    n = setup.h.n_modes
    G = setup.h.dynamical_matrix()
    t3 = tau(3, n)
    base = -(t3 @ G @ t3)
    base[np.arange(n), np.arange(n)] += 0.5j * setup._damping
    eye = np.eye(2 * n)
    return omegas[:, None, None] * eye[None] + base[None]


@dataclass
class ScatteringResponse:
    """S-matrices and mean-field profiles on a frequency grid.

    ``singular[f]`` marks points where the response matrix could not be
    inverted; their entries are NaN.
    """

    frequencies: np.ndarray
    s_matrix: np.ndarray
    mode_profiles: np.ndarray
    singular: np.ndarray
    port_modes: List[int] = field(default_factory=list)

    def S(self, i: int, j: int) -> np.ndarray:
        """``S_ij`` with 1-based port indices, as in ``S21``."""
        return self.s_matrix[:, i - 1, j - 1]


def s_parameters(setup: ScatteringSetup, frequencies: Sequence[float],
                 amplitude: complex = 1.0) -> ScatteringResponse:
    """S-matrix over all ports at every frequency (batched linear solves)."""
    w = np.asarray(frequencies, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError("frequency grid must be a non-empty 1-d sequence")
    if np.any(w <= 0):
        raise ValidationError("all frequencies must be positive")
    n = setup.h.n_modes
    P = setup.n_ports
    R = _response_stack(setup, w)
    rhs = np.zeros((2 * n, P), dtype=complex)
    for j, (mode, sk) in enumerate(setup._channels):
        rhs[mode, j] = 1j * sk * amplitude
    cond = np.linalg.cond(R)
    singular = ~np.isfinite(cond) | (cond > SINGULAR_COND)
    V = np.full((w.size, 2 * n, P), np.nan, dtype=complex)
    ok = ~singular
    if np.any(ok):
        V[ok] = np.linalg.solve(R[ok], np.broadcast_to(rhs, (int(ok.sum()), 2 * n, P)))
    S = np.full((w.size, P, P), np.nan, dtype=complex)
    for i, (mode, sk) in enumerate(setup._channels):
        S[:, i, :] = -np.conj(sk) * V[:, mode, :] / amplitude
        S[:, i, i] += 1.0
    profiles = np.transpose(V, (0, 2, 1))
    return ScatteringResponse(w, S, profiles, singular, setup.port_modes)


@dataclass
class DrivenProfile:
    vector: np.ndarray
    magnitudes: np.ndarray
    detection_amplitude: complex
    labels: Tuple[str, ...]


def driven_mode_profile(setup: ScatteringSetup, drive_port: int, omega: float,
                        detect_port: Optional[int] = None) -> DrivenProfile:
    """Mean-field mode amplitudes for a unit drive on ``drive_port`` (0-based).

    ``magnitudes`` covers the annihilation sector and is normalized to a
    maximum of 1. The detection amplitude is the field of the mode behind
    ``detect_port`` (default: the last port other than the drive).
    """
    if not (0 <= drive_port < setup.n_ports):
        raise ValidationError(f"drive port {drive_port} does not exist")
    resp = s_parameters(setup, [omega])
    if resp.singular[0]:
        raise NumericalError(f"response matrix is singular at {omega} Hz")
    v = resp.mode_profiles[0, drive_port]
    n = setup.h.n_modes
    mags = np.abs(v[:n])
    peak = mags.max()
    mags = mags / peak if peak > 0 else mags
    if detect_port is None:
        others = [p for p in range(setup.n_ports) if p != drive_port]
        detect_port = others[-1] if others else drive_port
    return DrivenProfile(v, mags, complex(v[setup.port_modes[detect_port]]), setup.h.labels)
