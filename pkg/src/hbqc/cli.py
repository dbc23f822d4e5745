"""Command-line entry point: ``hbqc {run,blindness,expand,bench}``."""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import bench
from .angles import expand, reconstruct
from .errors import ContractViolation, HBQCError, ResourceBound
from .protocol import run_protocol, transcript_blindness_audit
from .statevector import Statevector, apply_circuit, fidelity_up_to_phase
from .transpiler import build_computation_set, parse_circuit, to_server_set


def _load(path: str):
    circuit = to_server_set(parse_circuit(Path(path).read_text(encoding="utf-8")))
    return circuit, build_computation_set(circuit)


def _input_state(bits: str, n: int, n_prime: int) -> Statevector:
    if len(bits) == n:
        bits += "0"
    elif len(bits) != n_prime:
        raise ContractViolation(f"--input needs {n} bits (or {n_prime} with a trailing ancilla bit), got {len(bits)}")
    return Statevector.basis(bits)


def cmd_run(args) -> int:
    circuit, cs = _load(args.circuit)
    psi = _input_state(args.input, circuit.num_qubits, cs.n_prime)
    out, transcript = run_protocol(cs, psi, args.epsilon, np.random.default_rng(args.seed))
    direct = apply_circuit(psi, circuit.gates)
    print(f"n'={cs.n_prime} D'={cs.d_prime} key_budget={cs.key_budget}")
    print(f"rounds={transcript.total_rounds} key_bits={transcript.key_bits}")
    print(f"fidelity={fidelity_up_to_phase(out, direct):.15f}")
    for i, amp in enumerate(out.amplitudes):
        if abs(amp) > 1e-12:
            print(f"|{i:0{cs.n_prime}b}> {amp.real:+.12f}{amp.imag:+.12f}j")
    if args.transcript:
        Path(args.transcript).write_text(transcript.export(), encoding="utf-8")
    return 0


def cmd_blindness(args) -> int:
    circuit, cs = _load(args.circuit)
    psi = _input_state(args.input, circuit.num_qubits, cs.n_prime)
    report = transcript_blindness_audit(cs, psi, args.epsilon, decoys=not args.no_decoys)
    print(f"draws={report.draws}")
    for r, d in enumerate(report.round_distances):
        print(f"round={r} trace_distance={d:.3e}")
    print(f"quantum_view={'PASS' if report.quantum_view_ok else 'FAIL'}")
    print(f"classical_view={'PASS' if report.classical_view_ok else 'FAIL'} "
          f"(distinct request sequences: {report.distinct_request_sequences})")
    return 0 if report.passed else 1


def cmd_expand(args) -> int:
    e = expand(args.theta, args.epsilon)
    approx = reconstruct(e)
    print(f"p={e.p} M={e.num_digits}")
    print("digits=" + ",".join(str(a) for a in e.digits))
    print(f"reconstruct={approx!r} error={abs(approx - args.theta):.3e}")
    print(f"rounds={e.round_cost()} bound={math.ceil(math.log2(math.pi / args.epsilon)) ** 2}")
    return 0


def cmd_bench(args) -> int:
    eps = [float(x) for x in args.eps.split(",") if x.strip()]
    points = bench.sweep(eps, args.samples, np.random.default_rng(args.seed))
    text = bench.to_csv(points)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(f"# {bench.GRIDSYNTH_NOTE}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hbqc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the blind protocol on a circuit file")
    p.add_argument("--circuit", required=True)
    p.add_argument("--input", required=True, help="basis input, qubit 0 first")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transcript", help="write the channel transcript here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("blindness", help="exhaustively audit what the server sees")
    p.add_argument("--circuit", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--no-decoys", action="store_true", help="negative control: stop delegations early")
    p.set_defaults(func=cmd_blindness)

    p = sub.add_parser("expand", help="signed-dyadic expansion of an angle")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("bench", help="cost-model sweep as CSV")
    p.add_argument("--eps", required=True, help="comma-separated epsilons")
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceBound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (HBQCError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
