"""Dense 4x4 complex linear algebra and two-spin primitives.

Conventions shared by the whole package:

* Hamiltonian entries are frequencies in Hz (energy divided by the Planck
  constant), times are in seconds, and propagators are
  ``U = exp(-i 2 pi H t)``.
* Two-qubit basis ordering is ``{|uu>, |ud>, |du>, |dd>}``; the first arrow
  is the left dot, the second the right dot.
* ``|u>`` is the +1 eigenstate of the Pauli Z used for expectation values,
  i.e. ``Z|u> = +|u>`` and ``Z|d> = -|d>``.

Matrix exponentials of Hermitian generators go through an eigendecomposition
(exact for 4x4), which keeps every propagator unitary to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

ALGEBRA_TOL = 1e-10
EIG_TOL = 1e-9

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

BASIS_LABELS = ("uu", "ud", "du", "dd")

#: diagonal of S_zL + S_zR in units of 1 (total spin projection per basis state)
TOTAL_SZ_DIAG = np.array([1.0, 0.0, 0.0, -1.0])


class SpinOperators(NamedTuple):
    """Single-spin matrices (eigenvalues +-1/2) and their two-spin embeddings."""

    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    sx_left: np.ndarray
    sy_left: np.ndarray
    sz_left: np.ndarray
    sx_right: np.ndarray
    sy_right: np.ndarray
    sz_right: np.ndarray
    exchange: np.ndarray  # S_L . S_R


def spin_operators() -> SpinOperators:
    """Build spin-1/2 operators and the Heisenberg coupling S_L . S_R."""
    sx, sy, sz = (0.5 * PAULI[k] for k in "XYZ")
    eye = np.eye(2, dtype=complex)
    left = [np.kron(s, eye) for s in (sx, sy, sz)]
    right = [np.kron(eye, s) for s in (sx, sy, sz)]
    exchange = sum(l @ r for l, r in zip(left, right))
    return SpinOperators(sx, sy, sz, *left, *right, exchange)


OPS = spin_operators()


def _check_hermitian(h: np.ndarray, tol: float) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {h.shape}")
    scale = max(1.0, float(np.abs(h).max()))
    defect = float(np.abs(h - h.conj().T).max())
    if defect > tol * scale:
        raise ValueError(
            f"matrix is not Hermitian within tolerance: defect {defect:.3e} "
            f"(scale {scale:.3e})"
        )
    return 0.5 * (h + h.conj().T)


def expm_skew_hermitian(h: np.ndarray, dt: float) -> np.ndarray:
    """Propagator U = exp(-i 2 pi H dt) for a Hermitian H given in Hz.

    The Hermiticity defect is checked relative to the largest entry; inputs
    beyond ``1e-9`` relative are rejected.
    """
    h = _check_hermitian(h, EIG_TOL)
    w, v = np.linalg.eigh(h)
    phases = np.exp(-2j * np.pi * w * dt)
    return (v * phases) @ v.conj().T


def eig_hermitian(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian 4x4."""
    h = _check_hermitian(h, EIG_TOL)
    return np.linalg.eigh(h)


@dataclass(frozen=True)
class PauliLabel:
    """A two-qubit Pauli operator label such as ZZ or XY (left, right)."""

    left: str
    right: str

    def __post_init__(self) -> None:
        for c in (self.left, self.right):
            if c not in "IXYZ":
                raise ValueError(f"invalid Pauli letter {c!r}")

    def matrix(self) -> np.ndarray:
        return np.kron(PAULI[self.left], PAULI[self.right])

    def __str__(self) -> str:
        return self.left + self.right


def all_pauli_labels() -> list[PauliLabel]:
    """The 16 two-qubit Pauli labels, II first."""
    return [PauliLabel(l, r) for l in "IXYZ" for r in "IXYZ"]


@dataclass(frozen=True)
class TwoQubitState:
    """Pure two-qubit state; 4 complex amplitudes in the {uu, ud, du, dd} basis."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(4)
        object.__setattr__(self, "amplitudes", amps)
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > ALGEBRA_TOL:
            raise ValueError(f"state norm {norm} deviates from 1 beyond 1e-10")

    @classmethod
    def basis(cls, label: str) -> "TwoQubitState":
        """Basis state by label, e.g. ``TwoQubitState.basis('dd')``."""
        if label not in BASIS_LABELS:
            raise ValueError(f"unknown basis label {label!r}")
        amps = np.zeros(4, dtype=complex)
        amps[BASIS_LABELS.index(label)] = 1.0
        return cls(amps)

    @classmethod
    def product(cls, left: tuple[complex, complex], right: tuple[complex, complex]) -> "TwoQubitState":
        """Product state from per-qubit (up, down) amplitude pairs."""
        l = np.asarray(left, dtype=complex)
        r = np.asarray(right, dtype=complex)
        l = l / np.linalg.norm(l)
        r = r / np.linalg.norm(r)
        return cls(np.kron(l, r))

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def p_up(self) -> tuple[float, float]:
        """Spin-up probability of the (left, right) qubit."""
        pop = self.populations()
        return float(pop[0] + pop[1]), float(pop[0] + pop[2])

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "TwoQubitState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """4x4 Hermitian, unit-trace operator."""

    rho: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=complex).reshape(4, 4)
        object.__setattr__(self, "rho", rho)
        if np.abs(rho - rho.conj().T).max() > ALGEBRA_TOL * max(1.0, np.abs(rho).max()):
            raise ValueError("density matrix is not Hermitian within 1e-10")
        if abs(np.trace(rho).real - 1.0) > ALGEBRA_TOL:
            raise ValueError("density matrix trace deviates from 1 beyond 1e-10")

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.rho)

    def is_physical(self, tol: float = ALGEBRA_TOL) -> bool:
        return bool(self.eigenvalues().min() >= -tol)

    def project_physical(self) -> "DensityMatrix":
        """Clip negative eigenvalues to zero and renormalize the trace.

        Idempotent and trace preserving; used after linear-inversion
        tomography which can produce slightly unphysical operators.
        """
        w, v = np.linalg.eigh(self.rho)
        w = np.clip(w, 0.0, None)
        w = w / w.sum()
        return DensityMatrix((v * w) @ v.conj().T)

    def expectation(self, operator: np.ndarray) -> float:
        val = complex(np.trace(self.rho @ operator))
        return val.real


def pauli_expectation(state: DensityMatrix, label: PauliLabel) -> float:
    """tr(rho P) for a two-qubit Pauli operator; real for Hermitian inputs."""
    return state.expectation(label.matrix())


def density_from_pauli_vector(expectations: dict[str, float]) -> np.ndarray:
    """Assemble (1/4) sum <P> P from a {label: value} map (II defaults to 1)."""
    rho = np.zeros((4, 4), dtype=complex)
    values = dict(expectations)
    values.setdefault("II", 1.0)
    for label in all_pauli_labels():
        rho += values.get(str(label), 0.0) * label.matrix()
    return rho / 4.0
