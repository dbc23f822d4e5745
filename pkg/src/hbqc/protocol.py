"""Client, server and channel for half-blind delegated computation.

Every round the client one-time-pads the whole register with fresh keys,
ships it to the server together with the gate layer it wants applied, and
decrypts the reply.  H and CZ are decrypted with the Clifford key-update
rules.  ``Rz(theta)`` on a key with ``a = 1`` leaves the qubit owing
``Rz(2 theta)``, which is delegated in the next round; for
``theta = +-pi/2**m`` this stops after ``m`` rounds because the last debt,
``Rz(+-pi)``, is a client-side ``Z``.

The server must not learn when the debt chain ends.  Once a round finishes
with ``a = 0`` the client swaps the working qubit into the ancilla slot, so
the remaining (decoy) rounds rotate the ancilla's ``|0>`` instead, and swaps
back at the end.  Every delegation of ``Rz(+-pi/2**m)`` therefore asks for
the same ``m`` angles whatever the keys were.
"""
from __future__ import annotations

import cmath
import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .angles import dyadic_exponent, expand
from .computation import ComputationSet, ServerGate, server_capability_guard
from .errors import ContractViolation, InvalidCircuit, InvalidParameter, ResourceBound
from .gates import Swap, Z
from .pauli import (
    PauliKeySet,
    cz_phase,
    decrypt_pauli,
    encrypt,
    gen_keys,
    h_phase,
    update_cz,
    update_h,
    update_rz,
)
from .statevector import DensityMatrix, Statevector, apply_gate, trace_distance

ANCILLA_TOL = 1e-9
MAX_AUDIT_QUBITS = 3
MAX_AUDIT_KEY_BITS = 16

Layer = tuple[ServerGate, ...]


class RunOfOne(enum.Enum):
    INACTIVE = "inactive"
    ACTIVE = "active"
    EXHAUSTED = "exhausted"


def _advance(state: RunOfOne, a: int) -> RunOfOne:
    """Inactive -> Active/Exhausted, Active -> Active/Exhausted; Exhausted is final."""
    if state is RunOfOne.EXHAUSTED:
        return state
    return RunOfOne.ACTIVE if a else RunOfOne.EXHAUSTED


@dataclass(frozen=True)
class Message:
    round_index: int
    direction: str  # "c2s" or "s2c"
    requested: Layer | None
    qubit_count: int

    def export(self) -> str:
        if self.requested is None:
            return f"round={self.round_index} dir={self.direction} gate=- qubits=- angle=-"
        names = ";".join(g.name for g in self.requested)
        qubits = ";".join(",".join(map(str, g.qubits)) for g in self.requested)
        angles = ";".join("-" if g.theta is None else format(g.theta, ".17g") for g in self.requested)
        return f"round={self.round_index} dir={self.direction} gate={names} qubits={qubits} angle={angles}"


@dataclass
class Transcript:
    """Everything that crossed the channel, in order."""

    rounds: list[Message] = field(default_factory=list)
    key_bits: int = 0

    @property
    def total_rounds(self) -> int:
        return sum(1 for m in self.rounds if m.direction == "c2s")

    def requests(self) -> list[Layer]:
        return [m.requested for m in self.rounds if m.direction == "c2s"]

    def send(self, layer: Layer, qubit_count: int) -> None:
        self.rounds.append(Message(self.total_rounds, "c2s", layer, qubit_count))

    def receive(self, qubit_count: int) -> None:
        self.rounds.append(Message(self.total_rounds - 1, "s2c", None, qubit_count))

    def export(self) -> str:
        return "".join(m.export() + "\n" for m in self.rounds)


class HonestServer:
    """Applies whatever server-set layer it is asked for.

    With ``record=True`` it keeps every (layer, received state) pair, which
    is exactly what an honest-but-curious server gets to see.
    """

    def __init__(self, record: bool = False):
        self.record = record
        self.view: list[tuple[Layer, Statevector]] = []

    def compute(self, state: Statevector, layer: Layer) -> Statevector:
        if self.record:
            self.view.append((layer, state))
        for g in layer:
            if not server_capability_guard(g):
                raise InvalidCircuit(f"server cannot apply {g.name}")
            state = apply_gate(state, g.as_gate())
        return state


@dataclass
class ClientState:
    """The client's private side of one session.

    ``phase_accumulator`` is the known global phase separating the register
    from the ideal result.  ``events`` logs client-local gates together with
    the register right after them.
    """

    register: Statevector
    rng: np.random.Generator
    ancilla_index: int | None = None
    server: HonestServer = field(default_factory=HonestServer)
    forced_keys: Iterator[PauliKeySet] | None = None
    decoys: bool = True
    phase_accumulator: complex = 1.0
    key_history: list[PauliKeySet] = field(default_factory=list)
    events: list[tuple[str, tuple[int, ...], Statevector]] = field(default_factory=list)

    def __post_init__(self):
        if self.ancilla_index is None:
            self.ancilla_index = self.register.num_qubits - 1
        if not 0 <= self.ancilla_index < self.register.num_qubits:
            raise ContractViolation(f"ancilla {self.ancilla_index} outside {self.register.num_qubits}-qubit register")
        if self.forced_keys is not None:
            self.forced_keys = iter(self.forced_keys)

    @property
    def width(self) -> int:
        return self.register.num_qubits

    def next_keys(self) -> PauliKeySet:
        index = len(self.key_history)
        if self.forced_keys is None:
            keys = gen_keys(self.width, self.rng, index)
        else:
            try:
                keys = next(self.forced_keys)
            except StopIteration:
                raise ContractViolation("forced key stream exhausted") from None
            if keys.width != self.width:
                raise ContractViolation(f"forced keys have width {keys.width}, register has {self.width}")
            keys = PauliKeySet(keys.keys, index)
        self.key_history.append(keys)
        return keys

    def exchange(self, layer: Layer, transcript: Transcript) -> PauliKeySet:
        """One encrypt-send-compute-return cycle; the register comes back encrypted."""
        keys = self.next_keys()
        transcript.key_bits += 2 * self.width
        transcript.send(layer, self.width)
        reply = self.server.compute(encrypt(self.register, keys), layer)
        transcript.receive(self.width)
        self.register = reply
        return keys

    def local(self, name: str, qubits: tuple[int, ...]) -> None:
        gate = Swap(*qubits) if name == "swap" else Z(qubits[0])
        self.register = apply_gate(self.register, gate)
        self.events.append((name, qubits, self.register))

    def ancilla_is_clean(self) -> bool:
        n = self.width
        psi = np.moveaxis(self.register.amplitudes.reshape((2,) * n), self.ancilla_index, 0)
        return float(np.sum(np.abs(psi[1]) ** 2)) < ANCILLA_TOL


def _check_working_qubit(client: ClientState, qubit: int) -> None:
    if qubit == client.ancilla_index:
        raise ContractViolation("the ancilla cannot be the working qubit")
    if not 0 <= qubit < client.width:
        raise ContractViolation(f"qubit {qubit} out of range for {client.width}-qubit register")


def _rz_exact(client: ClientState, sign: int, m: int, qubit: int, transcript: Transcript) -> None:
    _check_working_qubit(client, qubit)
    if client.decoys and not client.ancilla_is_clean():
        raise ContractViolation("ancilla must be |0> before an Rz delegation")
    run = RunOfOne.INACTIVE
    swapped = False
    angle = sign * math.pi / 2**m
    for k in range(m):
        angle = sign * math.pi / 2 ** (m - k)
        if run is RunOfOne.EXHAUSTED:
            if not client.decoys:
                break
            if not swapped:
                client.local("swap", (qubit, client.ancilla_index))
                swapped = True
        keys = client.exchange((ServerGate("rz", (qubit,), angle, k),), transcript)
        update = update_rz(keys[qubit], angle)
        client.register = decrypt_pauli(client.register, keys)
        if run is RunOfOne.EXHAUSTED:
            # decoy: the slot holds the ancilla's |0>, Rz(+-angle)|0> is a pure phase
            client.phase_accumulator *= cmath.exp(-0.5j * angle * (-1) ** update.new_key.a)
            continue
        run = _advance(run, update.new_key.a)
    if run is RunOfOne.ACTIVE:
        # every round owed a correction; the last one is Rz(+-pi) = e^{-+i pi/2} Z,
        # so applying a bare Z leaves the register off by e^{+-i pi/2}
        client.local("z", (qubit,))
        client.phase_accumulator *= cmath.exp(0.5j * math.pi * sign)
    if swapped:
        client.local("swap", (qubit, client.ancilla_index))


def _rz_multiple_of_pi(client: ClientState, k: int, theta: float, qubit: int, transcript: Transcript) -> None:
    # Rz(k pi) X^a = X^a Rz(k pi) (-1)^{k a}: one round, phase-only correction
    _check_working_qubit(client, qubit)
    keys = client.exchange((ServerGate("rz", (qubit,), theta, 0),), transcript)
    client.register = decrypt_pauli(client.register, keys)
    client.phase_accumulator *= (-1) ** ((k * keys[qubit].a) % 2)


def _rz_arbitrary(client: ClientState, theta: float, epsilon: float, qubit: int, transcript: Transcript) -> None:
    _check_working_qubit(client, qubit)
    e = expand(theta, epsilon)
    # Rz(p pi) = e^{-i p pi/2} Z^p
    if e.p % 2:
        client.local("z", (qubit,))
    client.phase_accumulator *= cmath.exp(0.5j * math.pi * e.p)
    for sign, m in e.nonzero_terms():
        _rz_exact(client, sign, m, qubit, transcript)


def _clifford_round(client: ClientState, layer: Layer, transcript: Transcript) -> None:
    keys = client.exchange(layer, transcript)
    updates = {}
    phase = 1
    for g in layer:
        if g.name == "h":
            (q,) = g.qubits
            updates[q] = update_h(keys[q])
            phase *= h_phase(keys[q])
        elif g.name == "cz":
            q1, q2 = g.qubits
            updates[q1], updates[q2] = update_cz(keys[q1], keys[q2])
            phase *= cz_phase(keys[q1], keys[q2])
        else:
            raise InvalidCircuit(f"{g.name} cannot share a layer with other gates")
    client.register = decrypt_pauli(client.register, keys.replace(updates))
    client.phase_accumulator *= phase


def delegate_rz_exact(client: ClientState, sign: int, m: int, qubit: int,
                      transcript: Transcript | None = None) -> tuple[Statevector, Transcript]:
    """Delegate ``Rz(sign * pi / 2**m)`` on ``qubit`` in exactly ``m`` rounds.

    Round ``k`` asks for ``Rz(sign * pi / 2**(m - k))``.  The returned state
    equals ``client.phase_accumulator`` times the ideal result.
    """
    if sign not in (1, -1):
        raise InvalidParameter(f"sign must be +1 or -1, got {sign!r}")
    if m < 1:
        raise InvalidParameter(f"m must be a positive integer, got {m!r}")
    transcript = Transcript() if transcript is None else transcript
    _rz_exact(client, sign, m, qubit, transcript)
    return client.register, transcript


def delegate_rz_arbitrary(client: ClientState, theta: float, epsilon: float, qubit: int,
                          transcript: Transcript | None = None) -> tuple[Statevector, Transcript]:
    """Delegate ``Rz(theta)`` to within ``epsilon`` via its signed-dyadic expansion.

    An odd multiple of ``pi`` is applied locally as ``Z``; each nonzero digit
    ``a_m`` costs one exact delegation of ``m`` rounds.
    """
    transcript = Transcript() if transcript is None else transcript
    _rz_arbitrary(client, theta, epsilon, qubit, transcript)
    return client.register, transcript


def _multiple_of_pi(theta: float) -> int | None:
    k = round(theta / math.pi)
    if abs(theta - k * math.pi) <= 1e-12 * max(1.0, abs(theta)):
        return k
    return None


def run_protocol(circuit: ComputationSet, input: Statevector, epsilon: float, rng: np.random.Generator, *,
                 forced_keys: Iterable[PauliKeySet] | None = None, decoys: bool = True,
                 server: HonestServer | None = None) -> tuple[Statevector, Transcript]:
    """Run the whole computation set on ``input`` (which includes the ancilla).

    Returns the decrypted register with the tracked global phase divided out,
    so it can be compared amplitude-by-amplitude with direct execution of
    the server-set circuit.
    """
    if input.num_qubits != circuit.n_prime:
        raise ContractViolation(f"input has {input.num_qubits} qubits, computation set needs {circuit.n_prime}")
    if not (math.isfinite(epsilon) and 0 < epsilon <= math.pi / 2):
        raise InvalidParameter(f"epsilon must lie in (0, pi/2], got {epsilon!r}")
    client = ClientState(input, rng, circuit.ancilla_index, server or HonestServer(),
                         forced_keys=iter(forced_keys) if forced_keys is not None else None, decoys=decoys)
    if not client.ancilla_is_clean():
        raise ContractViolation(f"ancilla qubit {circuit.ancilla_index} must start in |0>")
    transcript = Transcript()
    for block in circuit.blocks():
        for g in block:
            if not server_capability_guard(g):
                raise InvalidCircuit(f"{g.name} is not a server gate")
        head = block[0]
        if head.name != "rz":
            _clifford_round(client, block, transcript)
            continue
        (q,) = head.qubits
        dy = dyadic_exponent(head.theta)
        k = _multiple_of_pi(head.theta)
        if dy is not None:
            sign, m = dy
            expected = [sign * math.pi / 2 ** (m - i) for i in range(m)]
            if [g.theta for g in block] != expected or any(g.qubits != (q,) for g in block):
                raise InvalidCircuit(f"depth {head.depth}: Rz recursion block does not match its angle")
            _rz_exact(client, sign, m, q, transcript)
        elif len(block) != 1:
            raise InvalidCircuit(f"depth {head.depth}: only dyadic Rz angles span several layers")
        elif k is not None:
            _rz_multiple_of_pi(client, k, head.theta, q, transcript)
        else:
            _rz_arbitrary(client, head.theta, epsilon, q, transcript)
    return client.register.scaled(np.conj(client.phase_accumulator)), transcript


@dataclass(frozen=True)
class AuditReport:
    """Outcome of an exhaustive key-space audit of the server's view."""

    draws: int
    round_distances: tuple[float, ...]
    distinct_request_sequences: int
    tolerance: float = 1e-9

    @property
    def quantum_view_ok(self) -> bool:
        return all(d < self.tolerance for d in self.round_distances)

    @property
    def classical_view_ok(self) -> bool:
        return self.distinct_request_sequences == 1

    @property
    def passed(self) -> bool:
        return self.quantum_view_ok and self.classical_view_ok


def transcript_blindness_audit(circuit: ComputationSet, input: Statevector, epsilon: float, *,
                               decoys: bool = True, max_key_bits: int = MAX_AUDIT_KEY_BITS) -> AuditReport:
    """Enumerate every key draw and inspect what the server receives.

    For each round the received states are averaged over all draws that
    reach that round and compared with the maximally mixed state; the gate
    requests of all draws are compared for equality.
    """
    n = circuit.n_prime
    if n > MAX_AUDIT_QUBITS:
        raise ResourceBound(f"audit enumerates keys exhaustively; at most {MAX_AUDIT_QUBITS} qubits, got {n}")
    ones = PauliKeySet.from_bits([1] * (2 * n))
    zeros = PauliKeySet.zeros(n)
    # an all-ones draw never ends a run of ones, so it reaches the most rounds
    _, longest = run_protocol(circuit, input, epsilon, np.random.default_rng(0),
                              forced_keys=itertools.repeat(ones), decoys=decoys)
    rounds = longest.total_rounds
    bits = 2 * n * rounds
    if bits > max_key_bits:
        raise ResourceBound(f"audit would enumerate 2^{bits} key draws (limit 2^{max_key_bits})")
    dim = 2**n
    sums = [np.zeros((dim, dim), dtype=complex) for _ in range(rounds)]
    counts = [0] * rounds
    views = set()
    for draw in range(2**bits):
        flat = [(draw >> (bits - 1 - i)) & 1 for i in range(bits)]
        keysets = [PauliKeySet.from_bits(flat[r * 2 * n:(r + 1) * 2 * n], r) for r in range(rounds)]
        server = HonestServer(record=True)
        _, transcript = run_protocol(circuit, input, epsilon, np.random.default_rng(0),
                                     forced_keys=itertools.chain(keysets, itertools.repeat(zeros)),
                                     decoys=decoys, server=server)
        views.add(tuple(m.export() for m in transcript.rounds if m.direction == "c2s"))
        for r, (_, state) in enumerate(server.view):
            sums[r] += np.outer(state.amplitudes, state.amplitudes.conj())
            counts[r] += 1
    mixed = DensityMatrix.maximally_mixed(n)
    distances = tuple(trace_distance(DensityMatrix(s / c), mixed) for s, c in zip(sums, counts) if c)
    return AuditReport(2**bits, distances, len(views))
