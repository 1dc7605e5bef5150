"""Single-qubit algebra, channels, and the effective probe-measurement instrument.

Conventions used throughout the package:

* Rx(phi) = cos(phi/2) I - i sin(phi/2) X, so rx(pi)|0> = -i|1>.
* Two-qubit matrices are ordered target (x) probe, with the target qubit as
  the most significant tensor factor: basis |00>, |01>, |10>, |11>.
* Sub-normalized density matrices carry their branch probability as the
  trace; nothing is renormalized between steps.
* Tolerances: 1e-12 for one-shot algebraic identities, 1e-10 for identities
  accumulated over multiple steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InputError

ATOL_ALGEBRAIC = 1e-12
ATOL_ACCUMULATED = 1e-10

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


class GateLabel(Enum):
    """The three-letter commuting gate alphabet, ordered G1 < G2 < G3."""

    G1 = 0
    G2 = 1
    G3 = 2

    @property
    def angle(self) -> float:
        return _GATE_ANGLES[self.value]

    @property
    def matrix(self) -> np.ndarray:
        return rx(self.angle)


_GATE_ANGLES = (math.pi / 8, math.pi / 2, math.pi)


def rx(angle: float) -> np.ndarray:
    """X-axis rotation by `angle` (half-angle convention)."""
    if not math.isfinite(angle):
        raise InputError(f"rotation angle must be finite, got {angle}")
    return math.cos(angle / 2) * I2 - 1j * math.sin(angle / 2) * PAULI_X


def crx(theta: float) -> np.ndarray:
    """Controlled Rx(theta): control on the target qubit, rotation on the probe."""
    if not math.isfinite(theta):
        raise InputError(f"coupling angle must be finite, got {theta}")
    V = np.zeros((4, 4), dtype=complex)
    V[:2, :2] = I2
    V[2:, 2:] = rx(theta)
    return V


def eigvals_hermitian_2x2(m: np.ndarray) -> tuple[float, float]:
    """Closed-form eigenvalues (ascending) of a Hermitian 2x2 matrix."""
    a = m[0, 0].real
    d = m[1, 1].real
    mean = 0.5 * (a + d)
    # discriminant is exact for Hermitian input; no iterative solver needed
    disc = math.sqrt(max(0.25 * (a - d) ** 2 + abs(m[0, 1]) ** 2, 0.0))
    return mean - disc, mean + disc


@dataclass(frozen=True)
class QubitState:
    """A (possibly sub-normalized) 2x2 density matrix on the target qubit.

    The trace carries the branch probability, so values in [0, 1] are legal.
    """

    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.shape != (2, 2) or not np.isfinite(m).all():
            raise InputError("state must be a finite 2x2 complex matrix")
        object.__setattr__(self, "mat", m)
        if np.abs(m - m.conj().T).max() >= ATOL_ACCUMULATED:
            raise InputError("state matrix is not Hermitian")
        lo, _ = eigvals_hermitian_2x2(m)
        if lo <= -ATOL_ACCUMULATED:
            raise InputError(f"state matrix is not PSD (min eigenvalue {lo:g})")
        tr = m.trace()
        if abs(tr.imag) >= ATOL_ACCUMULATED or not -ATOL_ACCUMULATED <= tr.real <= 1 + ATOL_ACCUMULATED:
            raise InputError(f"state trace {tr} outside [0, 1]")

    @property
    def trace(self) -> float:
        return self.mat.trace().real

    @staticmethod
    def ket0() -> "QubitState":
        return QubitState(np.outer(KET0, KET0.conj()))

    @staticmethod
    def from_ket(ket: np.ndarray) -> "QubitState":
        ket = np.asarray(ket, dtype=complex)
        return QubitState(np.outer(ket, ket.conj()))


@dataclass(frozen=True)
class KrausPair:
    """Effective instrument on the target for probe outcomes y=0 and y=1."""

    k0: np.ndarray
    k1: np.ndarray

    def __post_init__(self):
        comp = self.k0.conj().T @ self.k0 + self.k1.conj().T @ self.k1
        if np.abs(comp - I2).max() >= ATOL_ALGEBRAIC:
            raise InputError("Kraus pair violates completeness")


def instrument_kraus(theta: float) -> KrausPair:
    """Contract the coupling with a fresh |0> probe and projective readout.

    K_y = <y|_probe crx(theta) |0>_probe, giving
    K0 = diag(1, cos(theta/2)) and K1 = diag(0, -i sin(theta/2)).
    """
    if not math.isfinite(theta):
        raise InputError(f"coupling angle must be finite, got {theta}")
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    k0 = np.array([[1, 0], [0, c]], dtype=complex)
    k1 = np.array([[0, 0], [0, -1j * s]], dtype=complex)
    return KrausPair(k0, k1)


def depolarize(rho: QubitState, lam: float) -> QubitState:
    """Depolarizing channel (1-lam) rho + lam tr(rho) I/2.

    The mixing term is scaled by tr(rho) so sub-normalized branch states keep
    their branch probability.
    """
    if not 0.0 <= lam <= 1.0:
        raise InputError(f"depolarizing rate must be in [0, 1], got {lam}")
    m = rho.mat
    out = (1.0 - lam) * m + lam * m.trace().real * 0.5 * I2
    return QubitState(out)


def is_unitary(m: np.ndarray, atol: float = ATOL_ACCUMULATED) -> bool:
    m = np.asarray(m, dtype=complex)
    if m.shape[0] != m.shape[1]:
        return False
    return bool(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max() < atol)


def conjugate_probe(
    V: np.ndarray,
    projectors: tuple[np.ndarray, np.ndarray],
    W: np.ndarray,
) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray]]:
    """Re-express the coupling and readout projectors in a rotated probe basis.

    Returns ((I x W) V (I x W+), (W M0 W+, W M1 W+)). The fresh-probe state
    must be rotated by the caller as well (W|0>) for the induced statistics
    to be unchanged.
    """
    if not is_unitary(W):
        raise InputError("probe basis change must be unitary")
    lift = np.kron(I2, W)
    Vc = lift @ V @ lift.conj().T
    Ms = tuple(W @ M @ W.conj().T for M in projectors)
    return Vc, Ms


def _partial_trace_probe(rho4: np.ndarray) -> np.ndarray:
    return rho4.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3)


def _depolarize_target_joint(rho4: np.ndarray, lam: float) -> np.ndarray:
    """Depolarize the target factor of a joint 4x4 state."""
    probe_reduced = rho4.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2)
    return (1.0 - lam) * rho4 + lam * np.kron(0.5 * I2, probe_reduced)


def joint_step_oracle(
    rhoA: QubitState,
    gate: GateLabel,
    theta: float,
    lam: float,
    V: np.ndarray | None = None,
    projectors: tuple[np.ndarray, np.ndarray] | None = None,
    probe_state: np.ndarray | None = None,
) -> tuple[tuple[float, QubitState], tuple[float, QubitState]]:
    """One protocol step evaluated on the explicit 4x4 joint space.

    Attaches a fresh probe, applies gate (x) I, depolarizes the target,
    applies the coupling, projects the probe onto each outcome, and traces
    the probe out. Returns ((p0, state0), (p1, state1)) with sub-normalized
    post-states; p0 + p1 equals tr(rhoA) up to roundoff.

    Serves as the independent cross-check for the Kraus-pair fast path; the
    coupling, projectors, and fresh-probe state can be overridden to probe
    basis-change invariance.
    """
    if not 0.0 <= lam <= 1.0:
        raise InputError(f"depolarizing rate must be in [0, 1], got {lam}")
    if V is None:
        V = crx(theta)
    if projectors is None:
        projectors = (np.outer(KET0, KET0.conj()), np.outer(KET1, KET1.conj()))
    if probe_state is None:
        probe_state = np.outer(KET0, KET0.conj())

    U = gate.matrix
    rho4 = np.kron(U @ rhoA.mat @ U.conj().T, probe_state)
    rho4 = _depolarize_target_joint(rho4, lam)
    rho4 = V @ rho4 @ V.conj().T

    out = []
    for M in projectors:
        proj = np.kron(I2, M)
        sub = _partial_trace_probe(proj @ rho4 @ proj.conj().T)
        sub = 0.5 * (sub + sub.conj().T)  # scrub roundoff asymmetry
        out.append((sub.trace().real, QubitState(sub)))
    return out[0], out[1]
