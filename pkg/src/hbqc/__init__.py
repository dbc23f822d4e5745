"""Half-blind delegated quantum computation with recursively decrypted Rz gates."""
from .angles import SignedDyadicExpansion, dyadic_exponent, expand, reconstruct
from .computation import ComputationSet, ServerGate, server_capability_guard
from .errors import (
    ContractViolation,
    HBQCError,
    InvalidCircuit,
    InvalidParameter,
    InvalidState,
    ParseError,
    ResourceBound,
    UnsupportedGate,
)
from .gates import CX, CZ, Gate, H, Rz, S, Swap, T, X, Z
from .pauli import (
    KeyUpdate,
    PauliKeySet,
    QubitKey,
    blindness_check,
    decrypt_pauli,
    encrypt,
    gen_keys,
    update_cx,
    update_cz,
    update_h,
    update_rz,
    update_s,
)
from .protocol import (
    ClientState,
    HonestServer,
    RunOfOne,
    Transcript,
    delegate_rz_arbitrary,
    delegate_rz_exact,
    run_protocol,
    transcript_blindness_audit,
)
from .statevector import (
    DensityMatrix,
    Statevector,
    apply_gate,
    dense_oracle_apply,
    density_average,
    fidelity_up_to_phase,
    measure,
    trace_distance,
)
from .transpiler import (
    Circuit,
    EulerAngles,
    build_computation_set,
    euler_zxz,
    parse_circuit,
    serialize_circuit,
    to_server_set,
)

__version__ = "0.1.0"
