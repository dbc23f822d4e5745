"""Dense statevector simulation for few-qubit registers.

Two independent application paths are provided: :func:`apply_gate` works on
the amplitude tensor directly, :func:`dense_oracle_apply` builds the full
``2^n x 2^n`` operator from Kronecker products and multiplies.  The second is
slow and exists only to cross-check the first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractViolation, InvalidParameter, InvalidState
from .gates import I2, X_MAT, Z_MAT, Gate

NORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Statevector:
    """Normalized amplitude vector of length ``2**num_qubits``.

    The array is copied and frozen on construction, so instances can be
    shared freely.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dim = amps.size
        if dim < 2 or dim & (dim - 1):
            raise InvalidState(f"amplitude count {dim} is not a power of two >= 2")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidState(f"state is not normalized (|psi|^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def zero(cls, num_qubits: int) -> Statevector:
        return cls.basis("0" * num_qubits)

    @classmethod
    def basis(cls, bits: str) -> Statevector:
        """Computational basis state; ``bits[0]`` is qubit 0."""
        if not bits or set(bits) - {"0", "1"}:
            raise ContractViolation(f"not a bitstring: {bits!r}")
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    @classmethod
    def random(cls, num_qubits: int, rng: np.random.Generator) -> Statevector:
        """Haar-random pure state."""
        v = rng.normal(size=2**num_qubits) + 1j * rng.normal(size=2**num_qubits)
        return cls(v / np.linalg.norm(v))

    @classmethod
    def normalized(cls, amplitudes) -> Statevector:
        v = np.asarray(amplitudes, dtype=complex)
        n = np.linalg.norm(v)
        if n < 1e-12:
            raise InvalidState("cannot normalize a zero vector")
        return cls(v / n)

    def tensor(self, other: Statevector) -> Statevector:
        """``self (x) other``: ``other``'s qubits come after ``self``'s."""
        return Statevector(np.kron(self.amplitudes, other.amplitudes))

    def scaled(self, phase: complex) -> Statevector:
        return Statevector(self.amplitudes * phase)

    def allclose(self, other: Statevector, atol: float = 1e-10) -> bool:
        return self.dim == other.dim and np.allclose(self.amplitudes, other.amplitudes, rtol=0, atol=atol)

    def __repr__(self) -> str:
        return f"Statevector(num_qubits={self.num_qubits}, amplitudes={np.round(self.amplitudes, 6)!r})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidState(f"density matrix must be square, got shape {m.shape}")
        d = m.shape[0]
        if d < 1 or d & (d - 1):
            raise InvalidState(f"dimension {d} is not a power of two")
        if not np.allclose(m, m.conj().T, rtol=0, atol=NORM_TOL):
            raise InvalidState("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > NORM_TOL:
            raise InvalidState(f"trace is {np.trace(m).real!r}, expected 1")
        if np.linalg.eigvalsh(m).min() < -NORM_TOL:
            raise InvalidState("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> DensityMatrix:
        d = 2**num_qubits
        return cls(np.eye(d) / d)


def _check_indices(state: Statevector, gate: Gate) -> None:
    n = state.num_qubits
    for q in gate.qubits:
        if not 0 <= q < n:
            raise ContractViolation(f"qubit {q} out of range for {n}-qubit register in {gate.name}")


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Return ``U|state>`` for the gate's unitary ``U``."""
    _check_indices(state, gate)
    n = state.num_qubits
    k = len(gate.qubits)
    psi = state.amplitudes.reshape((2,) * n)
    psi = np.moveaxis(psi, gate.qubits, range(k)).reshape(2**k, -1)
    psi = (gate.matrix @ psi).reshape((2,) * n)
    psi = np.moveaxis(psi, range(k), gate.qubits)
    return Statevector(psi.reshape(-1))


def apply_circuit(state: Statevector, gates: Sequence[Gate]) -> Statevector:
    for g in gates:
        state = apply_gate(state, g)
    return state


def _embed(n: int, placed: dict[int, np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for q in range(n):
        out = np.kron(out, placed.get(q, I2))
    return out


_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)
# |i><j| for i, j in {0, 1}
_UNIT = {(i, j): np.outer(np.eye(2)[i], np.eye(2)[j]).astype(complex) for i in (0, 1) for j in (0, 1)}


def full_operator(gate: Gate, num_qubits: int) -> np.ndarray:
    """The gate as a dense ``2^n x 2^n`` matrix built from Kronecker products."""
    n = num_qubits
    for q in gate.qubits:
        if not 0 <= q < n:
            raise ContractViolation(f"qubit {q} out of range for {n}-qubit register in {gate.name}")
    if len(gate.qubits) == 1:
        return _embed(n, {gate.qubits[0]: gate.matrix})
    a, b = gate.qubits
    if gate.name == "cx":
        return _embed(n, {a: _P0}) + _embed(n, {a: _P1, b: X_MAT})
    if gate.name == "cz":
        return _embed(n, {a: _P0}) + _embed(n, {a: _P1, b: Z_MAT})
    # swap = sum_ij |i><j| (x) |j><i|
    return sum(_embed(n, {a: _UNIT[i, j], b: _UNIT[j, i]}) for i in (0, 1) for j in (0, 1))


def circuit_operator(gates: Sequence[Gate], num_qubits: int) -> np.ndarray:
    u = np.eye(2**num_qubits, dtype=complex)
    for g in gates:
        u = full_operator(g, num_qubits) @ u
    return u


def dense_oracle_apply(state: Statevector, gate: Gate) -> Statevector:
    _check_indices(state, gate)
    return Statevector(full_operator(gate, state.num_qubits) @ state.amplitudes)


def measure(state: Statevector, qubit: int, rng: np.random.Generator) -> tuple[int, Statevector]:
    """Projective Z measurement of one qubit.

    Returns the sampled bit and the renormalized post-measurement state.
    """
    n = state.num_qubits
    if not 0 <= qubit < n:
        raise ContractViolation(f"qubit {qubit} out of range for {n}-qubit register")
    psi = state.amplitudes.reshape((2,) * n)
    branches = np.moveaxis(psi, qubit, 0).reshape(2, -1)
    probs = np.sum(np.abs(branches) ** 2, axis=1)
    total = probs.sum()
    if total < 1e-12:
        raise InvalidState("cannot measure a zero-norm state")
    bit = int(rng.random() * total < probs[1])
    collapsed = np.zeros_like(branches)
    collapsed[bit] = branches[bit] / math.sqrt(probs[bit])
    out = np.moveaxis(collapsed.reshape((2,) * n), 0, qubit)
    return bit, Statevector(out.reshape(-1))


def fidelity_up_to_phase(a: Statevector, b: Statevector) -> float:
    """``|<a|b>|``, insensitive to global phase."""
    if a.dim != b.dim:
        raise ContractViolation(f"dimension mismatch: {a.dim} vs {b.dim}")
    return min(1.0, float(abs(np.vdot(a.amplitudes, b.amplitudes))))


def density_average(states: Sequence[Statevector], weights: Sequence[float] | None = None) -> DensityMatrix:
    """Mixture ``sum_i w_i |psi_i><psi_i|``; equal weights when omitted."""
    if not states:
        raise ContractViolation("need at least one state")
    if weights is None:
        weights = [1.0 / len(states)] * len(states)
    if len(weights) != len(states):
        raise ContractViolation("one weight per state required")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise InvalidParameter("weights must be nonnegative")
    if abs(w.sum() - 1.0) > NORM_TOL:
        raise InvalidParameter(f"weights sum to {w.sum()!r}, expected 1")
    dim = states[0].dim
    if any(s.dim != dim for s in states):
        raise ContractViolation("all states must have the same dimension")
    amps = np.stack([s.amplitudes for s in states])
    rho = (amps.T * w) @ amps.conj()
    return DensityMatrix(rho)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    if rho.dim != sigma.dim:
        raise ContractViolation(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    return 0.5 * float(np.abs(np.linalg.eigvalsh(rho.matrix - sigma.matrix)).sum())


def reduced_density(state: Statevector, keep: Sequence[int]) -> DensityMatrix:
    """Partial trace over every qubit not listed in ``keep``."""
    n = state.num_qubits
    keep = list(keep)
    if any(not 0 <= q < n for q in keep) or len(set(keep)) != len(keep):
        raise ContractViolation(f"bad qubit list {keep} for {n} qubits")
    rest = [q for q in range(n) if q not in keep]
    psi = np.transpose(state.amplitudes.reshape((2,) * n), keep + rest)
    psi = psi.reshape(2 ** len(keep), -1)
    return DensityMatrix(psi @ psi.conj().T)
