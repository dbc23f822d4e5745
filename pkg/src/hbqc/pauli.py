"""Quantum one-time pad: keys, encryption layers and key-update rules.

A key ``(a, b)`` on qubit ``q`` encrypts as ``Z_q^b X_q^a`` (X acts first).
For a gate ``U`` each update rule gives new keys ``k'`` and a scalar ``s``
such that

    U . E(k) = s . E(k') . U

so decrypting the server's output with ``k'`` leaves ``s . U|psi>``.  The
scalars are returned by the ``*_phase`` helpers and accumulated by the
protocol engine; they are physically irrelevant but keep every identity
exact at the matrix level.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractViolation, InvalidParameter, ResourceBound
from .statevector import DensityMatrix, Statevector, density_average, trace_distance

MAX_BLINDNESS_QUBITS = 4


@dataclass(frozen=True)
class QubitKey:
    a: int = 0  # X exponent
    b: int = 0  # Z exponent

    def __post_init__(self):
        if self.a not in (0, 1) or self.b not in (0, 1):
            raise InvalidParameter(f"key bits must be 0 or 1, got ({self.a}, {self.b})")


@dataclass(frozen=True)
class PauliKeySet:
    keys: tuple[QubitKey, ...]
    round_index: int = 0

    @property
    def width(self) -> int:
        return len(self.keys)

    def __getitem__(self, q: int) -> QubitKey:
        return self.keys[q]

    def bits(self) -> list[int]:
        """Flat key list ``[a_0, b_0, a_1, b_1, ...]``."""
        return [bit for k in self.keys for bit in (k.a, k.b)]

    @classmethod
    def from_bits(cls, bits: Sequence[int], round_index: int = 0) -> PauliKeySet:
        if len(bits) % 2:
            raise ContractViolation("key bits come in (a, b) pairs")
        return cls(tuple(QubitKey(int(bits[i]), int(bits[i + 1])) for i in range(0, len(bits), 2)), round_index)

    @classmethod
    def zeros(cls, width: int, round_index: int = 0) -> PauliKeySet:
        return cls((QubitKey(),) * width, round_index)

    def replace(self, updates: dict[int, QubitKey]) -> PauliKeySet:
        keys = list(self.keys)
        for q, k in updates.items():
            keys[q] = k
        return PauliKeySet(tuple(keys), self.round_index)


@dataclass(frozen=True)
class KeyUpdate:
    """Result of pushing a key through ``Rz(theta)``.

    ``pending_correction`` is the angle of the ``Rz`` the client still owes
    the qubit after Pauli decryption, or ``None`` when nothing is owed.
    """

    new_key: QubitKey
    pending_correction: float | None = None


def gen_keys(width: int, rng: np.random.Generator, round_index: int = 0) -> PauliKeySet:
    if width < 1:
        raise InvalidParameter(f"key width must be positive, got {width}")
    return PauliKeySet.from_bits(rng.integers(0, 2, size=2 * width).tolist(), round_index)


def _masks(keys: PauliKeySet, n: int) -> tuple[int, int]:
    if keys.width != n:
        raise ContractViolation(f"key width {keys.width} does not match {n}-qubit state")
    xmask = zmask = 0
    for q, k in enumerate(keys.keys):
        bit = 1 << (n - 1 - q)
        xmask |= bit * k.a
        zmask |= bit * k.b
    return xmask, zmask


def _z_signs(n: int, zmask: int) -> np.ndarray:
    idx = np.arange(2**n)
    parity = np.zeros(2**n, dtype=np.int64)
    m = idx & zmask
    while np.any(m):
        parity ^= m & 1
        m >>= 1
    return 1 - 2 * parity


def encrypt(state: Statevector, keys: PauliKeySet) -> Statevector:
    """Apply ``X^a`` then ``Z^b`` on every qubit."""
    n = state.num_qubits
    xmask, zmask = _masks(keys, n)
    idx = np.arange(2**n)
    flipped = state.amplitudes[idx ^ xmask]
    return Statevector(flipped * _z_signs(n, zmask))


def decrypt_pauli(state: Statevector, keys: PauliKeySet) -> Statevector:
    """Exact inverse of :func:`encrypt`: ``Z^b`` first, then ``X^a``."""
    n = state.num_qubits
    xmask, zmask = _masks(keys, n)
    idx = np.arange(2**n)
    signed = state.amplitudes * _z_signs(n, zmask)
    return Statevector(signed[idx ^ xmask])


def update_h(k: QubitKey) -> QubitKey:
    return QubitKey(k.b, k.a)


def h_phase(k: QubitKey) -> complex:
    return (-1) ** (k.a * k.b)


def update_s(k: QubitKey) -> QubitKey:
    return QubitKey(k.a, k.a ^ k.b)


def s_phase(k: QubitKey) -> complex:
    return (-1j) ** k.a


def update_cx(control: QubitKey, target: QubitKey) -> tuple[QubitKey, QubitKey]:
    a, b, c, d = control.a, control.b, target.a, target.b
    return QubitKey(a, b ^ d), QubitKey(a ^ c, d)


def cx_phase(control: QubitKey, target: QubitKey) -> complex:
    return 1


def update_cz(k1: QubitKey, k2: QubitKey) -> tuple[QubitKey, QubitKey]:
    a, b, c, d = k1.a, k1.b, k2.a, k2.b
    return QubitKey(a, b ^ c), QubitKey(c, d ^ a)


def cz_phase(k1: QubitKey, k2: QubitKey) -> complex:
    return (-1) ** (k1.a * k2.a)


def update_rz(k: QubitKey, theta: float) -> KeyUpdate:
    if not math.isfinite(theta):
        raise InvalidParameter(f"rz angle must be finite, got {theta!r}")
    return KeyUpdate(k, 2 * theta if k.a else None)


def all_key_sets(width: int) -> list[PauliKeySet]:
    """Every one of the ``4**width`` key sets."""
    return [PauliKeySet.from_bits(bits) for bits in itertools.product((0, 1), repeat=2 * width)]


def blindness_check(plain_state: Statevector) -> float:
    """Trace distance between the key-averaged ciphertext and ``I/2^n``."""
    n = plain_state.num_qubits
    if n > MAX_BLINDNESS_QUBITS:
        raise ResourceBound(f"exhaustive key enumeration limited to {MAX_BLINDNESS_QUBITS} qubits, got {n}")
    encrypted = [encrypt(plain_state, ks) for ks in all_key_sets(n)]
    rho = density_average(encrypted)
    return trace_distance(rho, DensityMatrix.maximally_mixed(n))
