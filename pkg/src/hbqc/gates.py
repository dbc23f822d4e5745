"""Gate descriptors and their standard unitaries.

Qubit 0 is the most significant bit of a basis label, so ``|10>`` has qubit 0
in state 1.  ``Rz(theta) = diag(exp(-i theta/2), exp(+i theta/2))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, InvalidParameter

ONE_QUBIT = frozenset({"h", "x", "z", "s", "t", "rz"})
TWO_QUBIT = frozenset({"cx", "cz", "swap"})
GATE_NAMES = ONE_QUBIT | TWO_QUBIT

_SQRT2_INV = 1 / math.sqrt(2)

I2 = np.eye(2, dtype=complex)
X_MAT = np.array([[0, 1], [1, 0]], dtype=complex)
Z_MAT = np.array([[1, 0], [0, -1]], dtype=complex)
H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV
S_MAT = np.array([[1, 0], [0, 1j]], dtype=complex)
T_MAT = np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex)
CX_MAT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ_MAT = np.diag([1, 1, 1, -1]).astype(complex)
SWAP_MAT = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


_FIXED = {"h": H_MAT, "x": X_MAT, "z": Z_MAT, "s": S_MAT, "t": T_MAT,
          "cx": CX_MAT, "cz": CZ_MAT, "swap": SWAP_MAT}


@dataclass(frozen=True)
class Gate:
    """A named gate on an ordered tuple of qubits.

    ``theta`` is only meaningful for ``rz``.  For ``cx`` the first qubit is
    the control.
    """

    name: str
    qubits: tuple[int, ...]
    theta: float | None = None

    def __post_init__(self):
        if self.name not in GATE_NAMES:
            raise ContractViolation(f"unknown gate {self.name!r}")
        arity = 1 if self.name in ONE_QUBIT else 2
        if len(self.qubits) != arity:
            raise ContractViolation(f"{self.name} takes {arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != arity:
            raise ContractViolation(f"repeated qubit in {self.name}{self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ContractViolation(f"negative qubit index in {self.name}{self.qubits}")
        if self.name == "rz":
            if self.theta is None or not math.isfinite(self.theta):
                raise InvalidParameter(f"rz angle must be finite, got {self.theta!r}")
        elif self.theta is not None:
            raise ContractViolation(f"{self.name} takes no angle")

    @property
    def matrix(self) -> np.ndarray:
        if self.name == "rz":
            return rz_matrix(self.theta)
        return _FIXED[self.name]

    def __str__(self) -> str:
        args = " ".join(str(q) for q in self.qubits)
        if self.theta is not None:
            return f"{self.name} {args} {self.theta!r}"
        return f"{self.name} {args}"


def H(q: int) -> Gate:
    return Gate("h", (q,))


def X(q: int) -> Gate:
    return Gate("x", (q,))


def Z(q: int) -> Gate:
    return Gate("z", (q,))


def S(q: int) -> Gate:
    return Gate("s", (q,))


def T(q: int) -> Gate:
    return Gate("t", (q,))


def Rz(q: int, theta: float) -> Gate:
    return Gate("rz", (q,), float(theta))


def CX(control: int, target: int) -> Gate:
    return Gate("cx", (control, target))


def CZ(q1: int, q2: int) -> Gate:
    return Gate("cz", (q1, q2))


def Swap(q1: int, q2: int) -> Gate:
    return Gate("swap", (q1, q2))
