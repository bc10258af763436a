"""Teleportation-based quantum homomorphic encryption lab.

Simulates the GT and VGT delegated-computation schemes end to end on a dense
statevector backend, derives their GF(2) key-update plans symbolically, and
audits correctness, perfect security, non-interaction and quasi-compactness.
"""

from .circuits import (
    Circuit,
    CircuitParseError,
    CircuitProfile,
    apply_circuit,
    parse_circuit,
    profile,
    random_circuit,
    serialize_circuit,
)
from .keyalg import (
    GT,
    VGT,
    AffineBoolExpr,
    KeyExprState,
    KeyUpdatePlan,
    Var,
    derive_plan,
    derive_plan_gt,
    derive_plan_vgt,
    eval_expr,
    plan_to_json,
    plan_to_text,
    update_key,
    update_key_bits,
)
from .protocol import (
    JointRegister,
    Message,
    PauliKey,
    RunResult,
    Transcript,
    decrypt,
    eg_u,
    encrypt,
    evaluate,
    keygen,
    load_ciphertext,
    run_end_to_end,
    setup,
)
from .qsim import (
    DEFAULT_QUBIT_CAP,
    DensityMatrix,
    GateId,
    MeasurementOutcome,
    PostSelectionError,
    ResourceLimitError,
    StateVector,
    apply_gate,
    basis_state,
    bell_state,
    fidelity_up_to_phase,
    gate,
    new_state,
    partial_trace,
    random_state,
    rotated_bell_measure,
    trace_distance,
)

__version__ = "0.1.0"
