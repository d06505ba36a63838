"""
Dense state vectors of an l-qubit register.

Basis index convention: ``a = a_0 + a_1*2 + ... + a_{l-1}*2**(l-1)``, so qubit
``j`` is bit ``j`` of the index.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MAX_QUBITS",
    "GateKind",
    "OneQubitGate",
    "HADAMARD",
    "NOT",
    "phase_shift",
    "unitary_gate",
    "StateVector",
    "new_register",
    "basis_state",
    "apply_gate",
    "evolve_diagonal",
    "fidelity",
    "global_phase_aligned_distance",
    "bit_reverse_permutation",
]

MAX_QUBITS = 24

NORM_TOL = 1e-10
UNITARY_TOL = 1e-12


class GateKind(enum.Enum):
    HADAMARD = "H"
    NOT = "X"
    PHASE = "P"
    UNITARY = "U"


@dataclass(frozen=True)
class OneQubitGate:
    """Instantaneous one-qubit gate.

    ``PHASE`` is ``diag(1, exp(i*theta))``; ``UNITARY`` carries an explicit
    2x2 matrix, checked for unitarity on construction.
    """

    kind: GateKind
    theta: float = 0.0
    unitary: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind is GateKind.UNITARY:
            u = np.asarray(self.unitary, dtype=complex)
            if u.shape != (2, 2):
                raise ValueError(f"unitary gate needs a 2x2 matrix, got shape {u.shape}")
            if np.max(np.abs(u @ u.conj().T - np.eye(2))) > UNITARY_TOL:
                raise ValueError("matrix is not unitary")
            u.setflags(write=False)
            object.__setattr__(self, "unitary", u)

    @property
    def matrix(self) -> np.ndarray:
        if self.kind is GateKind.HADAMARD:
            return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        if self.kind is GateKind.NOT:
            return np.array([[0, 1], [1, 0]], dtype=complex)
        if self.kind is GateKind.PHASE:
            return np.array([[1, 0], [0, np.exp(1j * self.theta)]])
        return self.unitary

    @property
    def is_diagonal(self) -> bool:
        if self.kind is GateKind.PHASE:
            return True
        if self.kind is GateKind.UNITARY:
            return self.unitary[0, 1] == 0 and self.unitary[1, 0] == 0
        return False

    def label(self) -> str:
        return self.kind.value


HADAMARD = OneQubitGate(GateKind.HADAMARD)
NOT = OneQubitGate(GateKind.NOT)


def phase_shift(theta: float) -> OneQubitGate:
    return OneQubitGate(GateKind.PHASE, theta=float(theta))


def unitary_gate(matrix) -> OneQubitGate:
    return OneQubitGate(GateKind.UNITARY, unitary=matrix)


@dataclass(frozen=True)
class StateVector:
    """Read-only array of ``2**num_qubits`` complex amplitudes."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes for {self.num_qubits} qubits, "
                f"got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def from_array(cls, amplitudes, normalize: bool = False) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex)
        n = amps.shape[0]
        l = n.bit_length() - 1
        if n < 2 or 2**l != n:
            raise ValueError(f"amplitude count {n} is not a power of two >= 2")
        if normalize:
            amps = amps / np.linalg.norm(amps)
        elif abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError("state is not normalized")
        return cls(l, amps)


def _check_size(l: int):
    if not isinstance(l, (int, np.integer)) or not 1 <= l <= MAX_QUBITS:
        raise ValueError(f"register size must be an integer in [1, {MAX_QUBITS}], got {l!r}")


def new_register(l: int) -> StateVector:
    """Return ``|0...0>`` on ``l`` qubits."""
    _check_size(l)
    amps = np.zeros(2**l, dtype=complex)
    amps[0] = 1.0
    return StateVector(l, amps)


def basis_state(l: int, index: int) -> StateVector:
    _check_size(l)
    if not 0 <= index < 2**l:
        raise ValueError(f"basis index {index} out of range for {l} qubits")
    amps = np.zeros(2**l, dtype=complex)
    amps[index] = 1.0
    return StateVector(l, amps)


def apply_matrix(amps: np.ndarray, qubit: int, u: np.ndarray, l: int) -> np.ndarray:
    """Apply a 2x2 matrix on ``qubit`` to ``amps`` of shape ``(2**l,)`` or ``(2**l, k)``."""
    lo = 2**qubit
    hi = 2 ** (l - 1 - qubit)
    view = amps.reshape(hi, 2, lo, -1)
    out = np.einsum("ij,ajbk->aibk", u, view)
    return out.reshape(amps.shape)


def apply_gate(state: StateVector, qubit: int, gate: OneQubitGate) -> StateVector:
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit {qubit} out of range for {state.num_qubits} qubits")
    return StateVector(state.num_qubits, apply_matrix(state.amplitudes, qubit, gate.matrix, state.num_qubits))


def evolve_diagonal(state: StateVector, phase_fn, duration: float) -> StateVector:
    """Multiply each amplitude ``amp_a`` by ``exp(-i * duration * phase_fn(a))``.

    ``phase_fn`` is anything with a ``table()`` method returning its value on
    every basis index (a :class:`~fixint.interaction.PhasePolynomial`), or a
    precomputed array of that length.
    """
    if duration < 0:
        raise ValueError(f"duration must be nonnegative, got {duration}")
    values = phase_fn.table() if hasattr(phase_fn, "table") else np.asarray(phase_fn, dtype=float)
    if values.shape != (state.dim,):
        raise ValueError("phase function size does not match the register")
    if duration == 0:
        return state
    return StateVector(state.num_qubits, state.amplitudes * np.exp(-1j * duration * values))


def _same_size(a: StateVector, b: StateVector):
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"qubit counts differ: {a.num_qubits} vs {b.num_qubits}")


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|**2``."""
    _same_size(a, b)
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def global_phase_aligned_distance(a: StateVector, b: StateVector) -> float:
    """``min_phi ||a - exp(i phi) b||``, i.e. ``sqrt(2 - 2|<a|b>|)``."""
    _same_size(a, b)
    overlap = abs(np.vdot(a.amplitudes, b.amplitudes))
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * overlap)))


def bit_reverse_permutation(l: int) -> np.ndarray:
    """Index array ``rev`` with ``rev[a]`` equal to ``a`` with its ``l`` bits reversed."""
    idx = np.arange(2**l)
    rev = np.zeros_like(idx)
    for j in range(l):
        rev |= ((idx >> j) & 1) << (l - 1 - j)
    return rev
