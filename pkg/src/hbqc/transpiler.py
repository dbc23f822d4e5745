"""Circuit IR, its text format, and rewriting onto the server gate set.

Text format, one statement per line::

    # comment
    qubits 2
    h 0
    rz 0 0.39269908169872414
    cx 0 1
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .computation import ComputationSet, schedule, server_capability_guard
from .errors import ContractViolation, InvalidCircuit, InvalidParameter, ParseError, UnsupportedGate
from .gates import CZ, Gate, H, Rz, rx_matrix, rz_matrix
from .statevector import circuit_operator

PARSEABLE = ("h", "x", "z", "s", "t", "rz", "cx", "cz")
_ARITY = {"h": 1, "x": 1, "z": 1, "s": 1, "t": 1, "rz": 1, "cx": 2, "cz": 2}


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list.  ``global_phase`` (radians) multiplies the unitary."""

    num_qubits: int
    gates: tuple[Gate, ...] = ()
    global_phase: float = 0.0

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ContractViolation(f"circuit needs at least one qubit, got {self.num_qubits}")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(q >= self.num_qubits for q in g.qubits):
                raise ContractViolation(f"{g.name}{g.qubits} out of range for {self.num_qubits} qubits")

    def unitary(self) -> np.ndarray:
        return np.exp(1j * self.global_phase) * circuit_operator(self.gates, self.num_qubits)


def parse_circuit(text: str) -> Circuit:
    num_qubits = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head, args = tokens[0].lower(), tokens[1:]
        if num_qubits is None:
            if head != "qubits" or len(args) != 1:
                raise ParseError("expected 'qubits <n>' header", lineno)
            num_qubits = _parse_int(args[0], lineno)
            if num_qubits < 1:
                raise ParseError(f"qubit count must be positive, got {num_qubits}", lineno)
            continue
        if head not in _ARITY:
            raise ParseError(f"unknown gate {tokens[0]!r}", lineno)
        n_args = _ARITY[head] + (head == "rz")
        if len(args) != n_args:
            raise ParseError(f"{head} expects {n_args} argument(s), got {len(args)}", lineno)
        qubits = tuple(_parse_int(a, lineno) for a in args[: _ARITY[head]])
        for q in qubits:
            if not 0 <= q < num_qubits:
                raise ParseError(f"qubit {q} out of range for {num_qubits} qubits", lineno)
        theta = None
        if head == "rz":
            try:
                theta = float(args[-1])
            except ValueError:
                raise ParseError(f"malformed angle {args[-1]!r}", lineno) from None
            if not math.isfinite(theta):
                raise ParseError(f"angle must be finite, got {args[-1]!r}", lineno)
        try:
            gates.append(Gate(head, qubits, theta))
        except ContractViolation as exc:
            raise ParseError(str(exc), lineno) from None
    if num_qubits is None:
        raise ParseError("missing 'qubits <n>' header", max(1, len(text.splitlines())))
    return Circuit(num_qubits, tuple(gates))


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected an integer, got {token!r}", lineno) from None


def serialize_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.num_qubits}"]
    for g in c.gates:
        if g.name not in PARSEABLE:
            raise UnsupportedGate(f"{g.name} has no text form")
        parts = [g.name, *map(str, g.qubits)]
        if g.theta is not None:
            parts.append(format(g.theta, ".17g"))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def _rewrite(g: Gate) -> tuple[list[Gate], float]:
    """Server-set replacement for ``g`` and the phase it drops."""
    q = g.qubits[0]
    if g.name in ("h", "cz", "rz"):
        return [g], 0.0
    if g.name == "z":  # Z = i Rz(pi)
        return [Rz(q, math.pi)], math.pi / 2
    if g.name == "x":  # X = H Z H
        return [H(q), Rz(q, math.pi), H(q)], math.pi / 2
    if g.name == "s":  # S = e^{i pi/4} Rz(pi/2)
        return [Rz(q, math.pi / 2)], math.pi / 4
    if g.name == "t":
        return [Rz(q, math.pi / 4)], math.pi / 8
    if g.name == "cx":
        c, t = g.qubits
        return [H(t), CZ(c, t), H(t)], 0.0
    raise UnsupportedGate(f"cannot rewrite {g.name} onto {{H, CZ, Rz}}")


def _asap_order(gates: list[Gate], num_qubits: int) -> list[Gate]:
    """Stable sort by earliest layer; only gates on disjoint qubits change order."""
    free = [0] * num_qubits
    layered = []
    for i, g in enumerate(gates):
        d = max(free[q] for q in g.qubits)
        for q in g.qubits:
            free[q] = d + 1
        layered.append((d, i, g))
    return [g for _, _, g in sorted(layered)]


def to_server_set(c: Circuit) -> Circuit:
    """Rewrite onto {H, CZ, Rz}, keeping the unitary exactly (phase included).

    The result is listed layer by layer, so e.g. the leading ``H`` of a CX
    rewrite moves ahead of earlier gates on other qubits.
    """
    gates: list[Gate] = []
    phase = c.global_phase
    for g in c.gates:
        out, dropped = _rewrite(g)
        gates.extend(out)
        phase += dropped
    return Circuit(c.num_qubits, tuple(_asap_order(gates, c.num_qubits)), math.remainder(phase, 2 * math.pi))


@dataclass(frozen=True)
class EulerAngles:
    """``U = e^{i phi} Rz(alpha) Rx(beta) Rz(gamma)``."""

    phi: float
    alpha: float
    beta: float
    gamma: float

    def matrix(self) -> np.ndarray:
        return np.exp(1j * self.phi) * rz_matrix(self.alpha) @ rx_matrix(self.beta) @ rz_matrix(self.gamma)


def _wrap(x: float) -> tuple[float, int]:
    """Map ``x`` into ``(-pi, pi]``; also return how many 2*pi turns were removed."""
    turns = 0
    while x > math.pi:
        x -= 2 * math.pi
        turns += 1
    while x <= -math.pi:
        x += 2 * math.pi
        turns -= 1
    return x, turns


def euler_zxz(u, tol: float = 1e-9) -> EulerAngles:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, np.eye(2), rtol=0, atol=tol):
        raise InvalidParameter("euler_zxz needs a 2x2 unitary")
    phi = float(np.angle(np.linalg.det(u))) / 2
    v = u * np.exp(-1j * phi)  # now in SU(2)
    # v = [[c e^{-i s}, -i sn e^{-i d}], [-i sn e^{i d}, c e^{i s}]] with s=(a+g)/2, d=(a-g)/2
    beta = 2 * math.atan2(abs(v[1, 0]), abs(v[1, 1]))
    if abs(v[1, 0]) < tol:
        beta, alpha, gamma = 0.0, 2 * float(np.angle(v[1, 1])), 0.0
    elif abs(v[1, 1]) < tol:
        beta, alpha, gamma = math.pi, 2 * float(np.angle(1j * v[1, 0])), 0.0
    else:
        s = float(np.angle(v[1, 1]))
        d = float(np.angle(1j * v[1, 0]))
        alpha, gamma = s + d, s - d
    # Rz(x + 2 pi) = -Rz(x): every removed turn flips the overall sign
    alpha, ta = _wrap(alpha)
    gamma, tg = _wrap(gamma)
    phi, _ = _wrap(phi + math.pi * ((ta + tg) % 2))
    angles = EulerAngles(phi, alpha, beta, gamma)
    if not np.allclose(angles.matrix(), u, rtol=0, atol=tol):
        raise InvalidParameter("Euler reconstruction failed; input is too far from unitary")
    return angles


def euler_to_server_gates(q: int, angles: EulerAngles) -> list[Gate]:
    """``Rz(gamma)``, then ``Rx(beta) = H Rz(beta) H``, then ``Rz(alpha)``.

    Zero angles are dropped; the global phase is left to the caller.
    """
    out = []
    if angles.gamma:
        out.append(Rz(q, angles.gamma))
    if angles.beta:
        out.extend([H(q), Rz(q, angles.beta), H(q)])
    if angles.alpha:
        out.append(Rz(q, angles.alpha))
    return out


def build_computation_set(c: Circuit | Iterable[Gate], num_qubits: int | None = None) -> ComputationSet:
    """Schedule a server-set circuit and add one ancilla qubit."""
    if isinstance(c, Circuit):
        gates, n = c.gates, c.num_qubits
    else:
        gates, n = tuple(c), num_qubits
        if n is None:
            raise ContractViolation("num_qubits is required for a bare gate list")
    for g in gates:
        if not server_capability_guard(g):
            raise InvalidCircuit(f"{g.name} is not in the server gate set {{H, CZ, Rz}}; run to_server_set first")
    return schedule(gates, n)
