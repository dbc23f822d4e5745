import itertools
import math

import numpy as np
import pytest

from hbqc.computation import ComputationSet, ServerGate
from hbqc.errors import ContractViolation, InvalidCircuit, InvalidParameter, ResourceBound
from hbqc.gates import CZ, Gate, H, Rz, Swap
from hbqc.pauli import PauliKeySet
from hbqc.protocol import (
    ClientState,
    HonestServer,
    RunOfOne,
    Transcript,
    _advance,
    delegate_rz_arbitrary,
    delegate_rz_exact,
    run_protocol,
    transcript_blindness_audit,
)
from hbqc.statevector import Statevector, apply_circuit, apply_gate, fidelity_up_to_phase, reduced_density
from hbqc.transpiler import Circuit, build_computation_set, to_server_set

WORKED = Circuit(2, (H(0), Rz(0, math.pi / 8), Gate("cx", (0, 1))))


def keys_with_a(pattern, width=2, qubit=0):
    """One key set per round with the working qubit's X bit taken from ``pattern``."""
    out = []
    for a in pattern:
        bits = [0] * (2 * width)
        bits[2 * qubit] = a
        out.append(PauliKeySet.from_bits(bits))
    return out


def fresh_client(rng, n=1, **kw):
    return ClientState(Statevector.random(n, rng).tensor(Statevector.zero(1)), rng, **kw)


def direct(psi, gates):
    return apply_circuit(psi, gates)


# ---------------------------------------------------------------------------
# run-of-one state machine
# ---------------------------------------------------------------------------

def test_run_of_one_transitions():
    assert _advance(RunOfOne.INACTIVE, 1) is RunOfOne.ACTIVE
    assert _advance(RunOfOne.INACTIVE, 0) is RunOfOne.EXHAUSTED
    assert _advance(RunOfOne.ACTIVE, 1) is RunOfOne.ACTIVE
    assert _advance(RunOfOne.ACTIVE, 0) is RunOfOne.EXHAUSTED
    assert _advance(RunOfOne.EXHAUSTED, 1) is RunOfOne.EXHAUSTED


# ---------------------------------------------------------------------------
# exact delegation
# ---------------------------------------------------------------------------

def test_exact_m1(rng):
    client = fresh_client(rng)
    psi = client.register
    out, tr = delegate_rz_exact(client, 1, 1, 0)
    assert tr.total_rounds == 1
    ideal = apply_gate(psi, Rz(0, math.pi / 2))
    assert fidelity_up_to_phase(out, ideal) >= 1 - 1e-9
    assert out.allclose(ideal.scaled(client.phase_accumulator), atol=1e-9)


def test_exact_m7_rounds(rng):
    _, tr = delegate_rz_exact(fresh_client(rng), -1, 7, 0)
    assert tr.total_rounds == 7
    assert [r[0].theta for r in tr.requests()] == pytest.approx([-math.pi / 2 ** (7 - k) for k in range(7)])


def test_all_ones_no_swap(rng):
    client = fresh_client(rng, forced_keys=keys_with_a([1, 1, 1]))
    psi = client.register
    out, tr = delegate_rz_exact(client, 1, 3, 0)
    assert [name for name, _, _ in client.events] == ["z"]
    # every request lands on the working qubit: pi/8, then the pi/4 and pi/2 corrections
    assert [(r[0].qubits, r[0].theta) for r in tr.requests()] == [((0,), math.pi / 2 ** (3 - k)) for k in range(3)]
    ideal = direct(psi, [Rz(0, math.pi / 8), Rz(0, math.pi / 4), Rz(0, math.pi / 2), Rz(0, -math.pi / 4), Rz(0, -math.pi / 2)])
    assert out.allclose(ideal.scaled(client.phase_accumulator), atol=1e-12)


def test_first_zero_swaps_immediately(rng):
    client = fresh_client(rng, forced_keys=keys_with_a([0, 1, 1]))
    psi = client.register
    out, tr = delegate_rz_exact(client, 1, 3, 0)
    assert [(n, q) for n, q, _ in client.events] == [("swap", (0, 1)), ("swap", (0, 1))]
    assert tr.total_rounds == 3
    assert client.ancilla_is_clean()
    assert out.allclose(apply_gate(psi, Rz(0, math.pi / 8)).scaled(client.phase_accumulator), atol=1e-12)


def test_late_zero_swaps_then(rng):
    client = fresh_client(rng, forced_keys=keys_with_a([1, 0, 1, 0]))
    psi = client.register
    out, tr = delegate_rz_exact(client, -1, 4, 0)
    assert [n for n, _, _ in client.events] == ["swap", "swap"]
    assert tr.total_rounds == 4
    assert out.allclose(apply_gate(psi, Rz(0, -math.pi / 16)).scaled(client.phase_accumulator), atol=1e-12)


def test_worked_example_swap_point(rng):
    # Rz(pi/8) with a0=1 then a1=0: the pi/4 correction is real, the pi/2 round is a decoy
    server = HonestServer(record=True)
    client = fresh_client(rng, forced_keys=keys_with_a([1, 0, 0]), server=server)
    _, tr = delegate_rz_exact(client, 1, 3, 0)
    assert [n for n, _, _ in client.events] == ["swap", "swap"]
    assert tr.requests()[2][0].theta == pytest.approx(math.pi / 2)
    # b = 0 everywhere, so the third ciphertext is plain: qubit 0 now holds the ancilla's |0>
    third = server.view[2][1]
    assert np.max(np.abs(reduced_density(third, [0]).matrix - np.diag([1, 0]))) <= 1e-12
    early = fresh_client(rng, forced_keys=keys_with_a([1, 0, 0]), decoys=False)
    assert delegate_rz_exact(early, 1, 3, 0)[1].total_rounds == 2


def test_decoy_integrity(rng):
    for pattern in ([0, 1, 1, 0, 1], [1, 1, 0, 0, 0], [0, 0, 0, 0, 0]):
        client = fresh_client(rng, n=2, forced_keys=keys_with_a(pattern, width=3, qubit=1))
        delegate_rz_exact(client, 1, 5, 1)
        (_, _, after_swap), (_, _, after_back) = client.events
        before_back = apply_gate(after_back, Swap(1, 2))
        # decoys only rotate the ancilla's |0>, so the whole register changes by a phase at most
        assert fidelity_up_to_phase(after_swap, before_back) == pytest.approx(1, abs=1e-10)
        rho_a = reduced_density(after_swap, [2]).matrix
        rho_b = reduced_density(before_back, [2]).matrix
        assert np.max(np.abs(rho_a - rho_b)) <= 1e-10


@pytest.mark.parametrize("m", range(1, 7))
def test_every_pattern_exact(m, rng):
    psi = Statevector.random(1, rng).tensor(Statevector.zero(1))
    ideal = apply_gate(psi, Rz(0, math.pi / 2**m))
    for pattern in itertools.product((0, 1), repeat=m):
        client = ClientState(psi, rng, forced_keys=keys_with_a(pattern))
        out, tr = delegate_rz_exact(client, 1, m, 0)
        assert tr.total_rounds == m
        assert out.allclose(ideal.scaled(client.phase_accumulator), atol=1e-10)
        assert abs(abs(client.phase_accumulator) - 1) <= 1e-12


def test_no_decoys_stops_early(rng):
    client = fresh_client(rng, forced_keys=keys_with_a([0, 1, 1]), decoys=False)
    psi = client.register
    out, tr = delegate_rz_exact(client, 1, 3, 0)
    assert tr.total_rounds == 1
    assert out.allclose(apply_gate(psi, Rz(0, math.pi / 8)).scaled(client.phase_accumulator), atol=1e-12)


def test_exact_errors(rng):
    with pytest.raises(InvalidParameter):
        delegate_rz_exact(fresh_client(rng), 1, 0, 0)
    with pytest.raises(InvalidParameter):
        delegate_rz_exact(fresh_client(rng), 2, 1, 0)
    with pytest.raises(ContractViolation):
        delegate_rz_exact(fresh_client(rng), 1, 2, 1)
    dirty = ClientState(Statevector.random(2, rng), rng)
    with pytest.raises(ContractViolation):
        delegate_rz_exact(dirty, 1, 2, 0)


def test_forced_key_stream_exhausted(rng):
    with pytest.raises(ContractViolation):
        delegate_rz_exact(fresh_client(rng, forced_keys=keys_with_a([1])), 1, 2, 0)


# ---------------------------------------------------------------------------
# arbitrary angles
# ---------------------------------------------------------------------------

def test_arbitrary_dyadic(rng):
    client = fresh_client(rng)
    psi = client.register
    out, tr = delegate_rz_arbitrary(client, math.pi / 4, 1e-6, 0)
    assert tr.total_rounds == 2
    assert out.allclose(apply_gate(psi, Rz(0, math.pi / 4)).scaled(client.phase_accumulator), atol=1e-9)


def test_arbitrary_pi_is_local(rng):
    client = fresh_client(rng)
    psi = client.register
    out, tr = delegate_rz_arbitrary(client, math.pi, 1e-3, 0)
    assert tr.total_rounds == 0
    assert [n for n, _, _ in client.events] == ["z"]
    assert out.allclose(apply_gate(psi, Rz(0, math.pi)).scaled(client.phase_accumulator), atol=1e-12)


def test_arbitrary_two(rng):
    client = fresh_client(rng)
    psi = client.register
    out, tr = delegate_rz_arbitrary(client, 2.0, 1e-3, 0)
    assert tr.total_rounds <= 144
    assert 1 - fidelity_up_to_phase(out, apply_gate(psi, Rz(0, 2.0))) <= 1e-3


def test_arbitrary_bound(rng):
    for _ in range(100):
        theta = rng.uniform(-2 * math.pi, 2 * math.pi)
        eps = 10 ** rng.uniform(-9, -2)
        client = fresh_client(rng)
        psi = client.register
        out, tr = delegate_rz_arbitrary(client, theta, eps, 0)
        assert tr.total_rounds <= math.ceil(math.log2(math.pi / eps)) ** 2
        assert 1 - fidelity_up_to_phase(out, apply_gate(psi, Rz(0, theta))) <= eps
        assert client.ancilla_is_clean()


def test_arbitrary_bad_epsilon(rng):
    with pytest.raises(InvalidParameter):
        delegate_rz_arbitrary(fresh_client(rng), 1.0, 2.0, 0)


# ---------------------------------------------------------------------------
# full protocol
# ---------------------------------------------------------------------------

def test_single_h(rng):
    cs = build_computation_set(Circuit(1, (H(0),)))
    out, tr = run_protocol(cs, Statevector.zero(2), 1e-6, rng)
    plus = Statevector([1 / math.sqrt(2), 1 / math.sqrt(2)])
    assert out.allclose(plus.tensor(Statevector.zero(1)), atol=1e-12)
    assert tr.total_rounds == 1 and tr.key_bits == 4


def test_worked_example_protocol(rng):
    server_circuit = to_server_set(WORKED)
    cs = build_computation_set(server_circuit)
    inputs = [Statevector.basis(b + "0") for b in ("00", "01", "10", "11")]
    inputs += [Statevector.random(2, rng).tensor(Statevector.zero(1)) for _ in range(20)]
    for psi in inputs:
        out, tr = run_protocol(cs, psi, 1e-6, rng)
        expected = apply_circuit(psi, server_circuit.gates)
        assert fidelity_up_to_phase(out, expected) >= 1 - 1e-8
        assert out.allclose(expected, atol=1e-9)
        # the original circuit differs only by the tracked rewrite phase
        original = apply_circuit(psi, WORKED.gates)
        assert out.scaled(np.exp(1j * server_circuit.global_phase)).allclose(original, atol=1e-9)
        assert tr.total_rounds == cs.d_prime
        assert tr.key_bits == cs.key_budget


def random_server_circuit(rng, n, depth, dyadic_only):
    gates = []
    for _ in range(depth):
        kind = rng.integers(3)
        if kind == 0:
            gates.append(H(int(rng.integers(n))))
        elif kind == 1 and n > 1:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(CZ(int(a), int(b)))
        elif dyadic_only:
            gates.append(Rz(int(rng.integers(n)), float(rng.choice([-1, 1]) * math.pi / 2 ** rng.integers(1, 6))))
        else:
            gates.append(Rz(int(rng.integers(n)), float(rng.uniform(-4, 4))))
    return Circuit(n, tuple(gates))


def test_random_dyadic_circuits(rng):
    for _ in range(20):
        c = random_server_circuit(rng, 3, 8, dyadic_only=True)
        cs = build_computation_set(c)
        psi = Statevector.random(3, rng).tensor(Statevector.zero(1))
        out, _ = run_protocol(cs, psi, 1e-6, rng)
        assert fidelity_up_to_phase(out, apply_circuit(psi, c.gates)) >= 1 - 1e-8


def test_random_arbitrary_circuits(rng):
    eps = 1e-4
    for _ in range(20):
        n = int(rng.integers(1, 4))
        c = random_server_circuit(rng, n, int(rng.integers(1, 9)), dyadic_only=False)
        cs = build_computation_set(c)
        psi = Statevector.random(n, rng).tensor(Statevector.zero(1))
        out, tr = run_protocol(cs, psi, eps, rng)
        assert fidelity_up_to_phase(out, apply_circuit(psi, c.gates)) >= 1 - cs.d_prime * eps
        assert tr.key_bits >= cs.key_budget


def test_multiple_of_pi_entry(rng):
    cs = build_computation_set([Rz(0, 3 * math.pi), Rz(0, -2 * math.pi)], num_qubits=1)
    psi = Statevector.random(1, rng).tensor(Statevector.zero(1))
    out, tr = run_protocol(cs, psi, 1e-3, rng)
    assert tr.total_rounds == 2
    assert out.allclose(apply_circuit(psi, [Rz(0, 3 * math.pi), Rz(0, -2 * math.pi)]), atol=1e-12)


def test_run_protocol_errors(rng):
    cs = build_computation_set(Circuit(1, (H(0),)))
    with pytest.raises(ContractViolation):
        run_protocol(cs, Statevector.zero(3), 1e-3, rng)
    with pytest.raises(ContractViolation):
        run_protocol(cs, Statevector.basis("01"), 1e-3, rng)
    with pytest.raises(InvalidParameter):
        run_protocol(cs, Statevector.zero(2), 0.0, rng)
    bad = ComputationSet((ServerGate("rz", (0,), math.pi / 4, 0, 0), ServerGate("rz", (0,), math.pi / 4, 1, 0)), 2, 2)
    with pytest.raises(InvalidCircuit):
        run_protocol(bad, Statevector.zero(2), 1e-3, rng)


def test_server_rejects_foreign_gate():
    rogue = ServerGate("h", (0,))
    object.__setattr__(rogue, "name", "x")
    with pytest.raises(InvalidCircuit):
        HonestServer().compute(Statevector.zero(1), (rogue,))


# ---------------------------------------------------------------------------
# transcripts
# ---------------------------------------------------------------------------

def test_transcript_structure(rng):
    cs = build_computation_set(to_server_set(WORKED))
    _, tr = run_protocol(cs, Statevector.zero(3), 1e-6, rng)
    dirs = [m.direction for m in tr.rounds]
    assert dirs == ["c2s", "s2c"] * tr.total_rounds
    assert [m.round_index for m in tr.rounds] == [i // 2 for i in range(len(tr.rounds))]
    lines = tr.export().splitlines()
    assert lines[0] == "round=0 dir=c2s gate=h;h qubits=0;1 angle=-;-"
    assert lines[1] == "round=0 dir=s2c gate=- qubits=- angle=-"
    assert lines[2] == "round=1 dir=c2s gate=rz qubits=0 angle=0.39269908169872414"
    assert all(m.qubit_count == 3 for m in tr.rounds)


def test_transcript_deterministic():
    cs = build_computation_set(to_server_set(WORKED))
    psi = Statevector.random(2, np.random.default_rng(5)).tensor(Statevector.zero(1))
    a = run_protocol(cs, psi, 1e-6, np.random.default_rng(9))
    b = run_protocol(cs, psi, 1e-6, np.random.default_rng(9))
    assert a[1].export() == b[1].export()
    assert np.array_equal(a[0].amplitudes, b[0].amplitudes)


def test_empty_transcript():
    assert Transcript().total_rounds == 0 and Transcript().export() == ""


# ---------------------------------------------------------------------------
# audits
# ---------------------------------------------------------------------------

def test_audit_h():
    cs = build_computation_set(Circuit(1, (H(0),)))
    report = transcript_blindness_audit(cs, Statevector.zero(2), 1e-3)
    assert report.draws == 16 and report.passed


def test_audit_rz_quarter():
    cs = build_computation_set([Rz(0, math.pi / 4)], num_qubits=1)
    psi = Statevector([0.6, 0.8j]).tensor(Statevector.zero(1))
    report = transcript_blindness_audit(cs, psi, 1e-3)
    assert report.draws == 256 and report.passed
    assert len(report.round_distances) == 2


def test_audit_negative_control():
    cs = build_computation_set([Rz(0, math.pi / 4)], num_qubits=1)
    report = transcript_blindness_audit(cs, Statevector.zero(2), 1e-3, decoys=False)
    assert report.quantum_view_ok
    assert not report.classical_view_ok and not report.passed


def test_audit_limits():
    cs = build_computation_set(Circuit(3, (H(0),)))
    with pytest.raises(ResourceBound):
        transcript_blindness_audit(cs, Statevector.zero(4), 1e-3)
    cs = build_computation_set([Rz(0, math.pi / 32)], num_qubits=1)
    with pytest.raises(ResourceBound):
        transcript_blindness_audit(cs, Statevector.zero(2), 1e-3)
