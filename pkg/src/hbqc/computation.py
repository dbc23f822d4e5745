"""Server-side gate schedule: what the client asks the server to run, by depth."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import groupby
from typing import Sequence

from .errors import ContractViolation, InvalidCircuit
from .gates import Gate

SERVER_GATES = frozenset({"h", "cz", "rz"})


def server_capability_guard(gate: Gate | ServerGate) -> bool:
    """True iff the server can execute ``gate`` (only H, CZ and Rz)."""
    return gate.name in SERVER_GATES


@dataclass(frozen=True)
class ServerGate:
    """One gate of the computation set.

    ``origin`` indexes the server-set circuit gate this entry came from; the
    recursion rounds of one ``Rz`` share an origin.
    """

    name: str
    qubits: tuple[int, ...]
    theta: float | None = None
    depth: int = 0
    origin: int = 0

    def __post_init__(self):
        if self.name not in SERVER_GATES:
            raise InvalidCircuit(f"{self.name!r} is not a server gate")
        if self.depth < 0:
            raise ContractViolation(f"negative depth {self.depth}")
        Gate(self.name, self.qubits, self.theta)  # validates arity and angle

    def as_gate(self) -> Gate:
        return Gate(self.name, self.qubits, self.theta)

    def describe(self) -> str:
        angle = "-" if self.theta is None else format(self.theta, ".17g")
        return f"{self.name} {','.join(map(str, self.qubits))} {angle}"


@dataclass(frozen=True)
class ComputationSet:
    """Depth-ordered server schedule over ``n_prime`` qubits.

    The highest qubit (``n_prime - 1``) is the client's ancilla and is never
    named by an entry.
    """

    entries: tuple[ServerGate, ...]
    n_prime: int
    d_prime: int

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(sorted(self.entries, key=lambda g: g.depth)))
        if self.n_prime < 2:
            raise ContractViolation("a computation set needs at least one data qubit and one ancilla")
        depths = sorted({g.depth for g in self.entries})
        if depths != list(range(self.d_prime)):
            raise ContractViolation(f"depths must be contiguous from 0 to {self.d_prime - 1}, got {depths}")
        for g in self.entries:
            if any(not 0 <= q < self.ancilla_index for q in g.qubits):
                raise ContractViolation(f"{g.name}{g.qubits} touches the ancilla or lies outside the register")
        for depth, layer in self.layers():
            used = [q for g in layer for q in g.qubits]
            if len(used) != len(set(used)):
                raise InvalidCircuit(f"depth {depth} uses a qubit twice")
            if any(g.name == "rz" for g in layer) and len(layer) > 1:
                raise InvalidCircuit(f"depth {depth}: an Rz round must be alone in its layer")

    @property
    def ancilla_index(self) -> int:
        return self.n_prime - 1

    @property
    def key_budget(self) -> int:
        return 2 * self.n_prime * self.d_prime

    def layers(self) -> list[tuple[int, tuple[ServerGate, ...]]]:
        return [(d, tuple(grp)) for d, grp in groupby(self.entries, key=lambda g: g.depth)]

    def blocks(self) -> list[tuple[ServerGate, ...]]:
        """Layers grouped into protocol steps.

        A Clifford layer is one step; consecutive Rz layers sharing an origin
        form one recursive delegation.
        """
        out: list[tuple[ServerGate, ...]] = []
        for _, layer in self.layers():
            g = layer[0]
            if g.name == "rz" and out and out[-1][0].name == "rz" and out[-1][0].origin == g.origin:
                out[-1] = out[-1] + layer
            else:
                out.append(layer)
        return out


def rz_schedule(theta: float) -> list[float]:
    """Angles the server is asked for when delegating ``Rz(theta)``.

    ``+-pi/2**m`` expands to its ``m`` recursion angles; any other angle is a
    single entry (``k*pi`` needs one round, the rest are synthesized at run
    time).
    """
    from .angles import dyadic_exponent

    dy = dyadic_exponent(theta)
    if dy is None:
        return [theta]
    sign, m = dy
    return [sign * math.pi / 2 ** (m - k) for k in range(m)]


def schedule(gates: Sequence[Gate], num_qubits: int) -> ComputationSet:
    """Assign depths to server-set gates.

    H and CZ are packed into the earliest layer after their qubits were last
    used.  Each Rz occupies fresh layers of its own (one per recursion round)
    and acts as a barrier for everything after it.
    """
    free = [0] * num_qubits
    barrier = 0
    top = 0  # first unused depth
    entries: list[ServerGate] = []
    for origin, g in enumerate(gates):
        if not server_capability_guard(g):
            raise InvalidCircuit(f"{g.name} is not in the server gate set {{H, CZ, Rz}}")
        if g.name == "rz":
            (q,) = g.qubits
            start = top
            for k, angle in enumerate(rz_schedule(g.theta)):
                entries.append(ServerGate("rz", (q,), angle, start + k, origin))
            top = start + len(rz_schedule(g.theta))
            barrier = top
            for i in range(num_qubits):
                free[i] = top
        else:
            d = max([barrier] + [free[q] for q in g.qubits])
            entries.append(ServerGate(g.name, g.qubits, None, d, origin))
            for q in g.qubits:
                free[q] = d + 1
            top = max(top, d + 1)
    return ComputationSet(tuple(entries), num_qubits + 1, top)
