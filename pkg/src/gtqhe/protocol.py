"""Executable GT and VGT schemes plus the standalone encrypted-gate primitive.

A protocol run lives in one :class:`JointRegister` that simulates both
parties' qubits: data wires ``w1..wn`` followed by Bell-pair wires
``c1 s1 c2 s2 ...``.  Physical transport is modeled by label bookkeeping and
by the two transcript messages every completed run must contain: the
ciphertext going out and the evaluated result (with the ancilla qubits and
the serialized key-update plan) coming back.  Decryption sends nothing.

Measurement convention: a pair is always measured with the rotated slot on
the qubit that currently holds data, so after the evaluation-side SWAP the
pair ``(s_i, c_i)`` is measured as ``(q1=s_i, q2=c_i)`` and the teleported
state appears on the original data wire.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import keyalg, qsim
from .circuits import Circuit, T_KINDS, profile
from .keyalg import GT, KeyUpdatePlan, rx_var, rz_var, x_var, z_var
from .qsim import (
    DEFAULT_QUBIT_CAP,
    GateId,
    MeasurementOutcome,
    ResourceLimitError,
    StateVector,
)

CLIENT_TO_SERVER = "client_to_server"
SERVER_TO_CLIENT = "server_to_client"


@dataclass(frozen=True)
class PauliKey:
    """A QOTP key: one (x, z) bit pair per wire."""

    x: tuple[int, ...]
    z: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(int(b) for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) for b in self.z))
        if len(self.x) != len(self.z) or not self.x:
            raise ValueError("x and z must be equal-length, non-empty bit strings")
        if any(b not in (0, 1) for b in self.x + self.z):
            raise ValueError("key entries must be bits")

    @property
    def n(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class Message:
    """One protocol transmission."""

    direction: str
    payload_kind: str  # "ciphertext" or "result_and_plan"
    qubit_labels: tuple[str, ...]
    classical_bytes: int


@dataclass
class Transcript:
    """Ordered log of transmissions; two entries witness non-interaction."""

    messages: list[Message] = field(default_factory=list)

    def append(self, message: Message) -> None:
        self.messages.append(message)

    def __len__(self) -> int:
        return len(self.messages)

    def to_json(self) -> list[dict]:
        return [
            {
                "index": i,
                "direction": m.direction,
                "payload_kind": m.payload_kind,
                "qubit_labels": list(m.qubit_labels),
                "classical_bytes": m.classical_bytes,
            }
            for i, m in enumerate(self.messages)
        ]

    def to_text(self) -> str:
        lines = [
            f"{i} {m.direction} {m.payload_kind} "
            f"labels={','.join(m.qubit_labels) or '-'} bytes={m.classical_bytes}"
            for i, m in enumerate(self.messages)
        ]
        return "\n".join(lines) + ("\n" if lines else "")


class JointRegister:
    """The joint quantum state of both parties with a label->wire map.

    Labels of measured qubits are removed and the remaining physical wires
    close ranks, so the register shrinks by two per rotated Bell measurement.
    """

    def __init__(
        self,
        state: StateVector,
        labels: dict[str, int],
        num_data_wires: int = 0,
        num_pairs: int = 0,
    ):
        if sorted(labels.values()) != list(range(1, state.num_qubits + 1)):
            raise ValueError("labels must cover physical wires 1..k exactly once")
        self.state = state
        self.labels = dict(labels)
        self.num_data_wires = num_data_wires
        self.num_pairs = num_pairs
        self.transcript = Transcript()

    def wire_of(self, label: str) -> int:
        try:
            return self.labels[label]
        except KeyError:
            raise KeyError(f"label {label!r} is not live in the register") from None

    def apply_gate(self, kind: str, *labels: str) -> None:
        wires = tuple(self.wire_of(lb) for lb in labels)
        self.state = qsim.apply_gate(self.state, GateId(kind, wires))

    def measure_pair(
        self,
        label1: str,
        label2: str,
        u: Optional[np.ndarray],
        *,
        rng: Optional[np.random.Generator] = None,
        forced: Optional[tuple[int, int]] = None,
    ) -> tuple[MeasurementOutcome, float]:
        """Rotated Bell measurement of ``(label1, label2)``; consumes both.

        ``label1`` takes the rotated slot (it gets ``u^dag``).  Returns the
        outcome and its branch probability.
        """
        q1 = self.wire_of(label1)
        q2 = self.wire_of(label2)
        outcome, post, prob = qsim.rotated_bell_measure(
            self.state, q1, q2, u, rng=rng, forced=forced
        )
        self.state = post
        del self.labels[label1], self.labels[label2]
        for lb, w in self.labels.items():
            self.labels[lb] = w - (w > q1) - (w > q2)
        return outcome, prob


@dataclass(frozen=True)
class RunResult:
    """Everything a completed protocol run produces."""

    output_state: StateVector
    outcomes: tuple[MeasurementOutcome, ...]
    final_key: PauliKey
    transcript: Transcript
    branch_probabilities: tuple[float, ...]


def keygen(n: int, rng: np.random.Generator) -> PauliKey:
    """Draw 2n fresh uniform key bits (all x bits, then all z bits)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    bits = rng.integers(0, 2, size=2 * n)
    return PauliKey(tuple(bits[:n]), tuple(bits[n:]))


def _apply_qotp(state: StateVector, key: PauliKey, *, inverse: bool) -> StateVector:
    """Apply ``X^x Z^z`` wire-wise (or ``Z^z X^x`` when decrypting)."""
    if state.num_qubits != key.n:
        raise ValueError(f"key covers {key.n} wires, state has {state.num_qubits}")
    for w in range(1, key.n + 1):
        first, second = ("X", "Z") if inverse else ("Z", "X")
        for kind in (first, second):
            bit = key.x[w - 1] if kind == "X" else key.z[w - 1]
            if bit:
                state = qsim.apply_gate(state, GateId(kind, (w,)))
    return state


def encrypt(sk: PauliKey, state: StateVector) -> StateVector:
    """QOTP-encrypt: apply ``X^{x0} Z^{z0}`` wire-wise."""
    return _apply_qotp(state, sk, inverse=False)


def decrypt_qotp(key: PauliKey, state: StateVector) -> StateVector:
    """QOTP-decrypt: apply ``Z^z X^x`` wire-wise (the inverse mask)."""
    return _apply_qotp(state, key, inverse=True)


def setup(n: int, m: int, cap: int = DEFAULT_QUBIT_CAP) -> JointRegister:
    """Fresh register: n data wires in ``|0..0>`` and m Bell pairs.

    Data wires hold a placeholder until :func:`load_ciphertext` replaces
    them.  Pair ``i`` occupies wires ``(c_i, s_i) = (n+2i-1, n+2i)``.
    """
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 data wires and m >= 0 pairs")
    k = n + 2 * m
    if k > cap:
        raise ResourceLimitError(
            f"{n} data wires plus {m} Bell pairs need {k} qubits, cap is {cap}"
        )
    state = qsim.new_state(k, cap=cap)
    labels = {f"w{w}": w for w in range(1, n + 1)}
    for i in range(1, m + 1):
        c, s = n + 2 * i - 1, n + 2 * i
        labels[f"c{i}"] = c
        labels[f"s{i}"] = s
        state = qsim.apply_gate(state, GateId("H", (c,)))
        state = qsim.apply_gate(state, GateId("CNOT", (c, s)))
    return JointRegister(state, labels, num_data_wires=n, num_pairs=m)


def load_ciphertext(register: JointRegister, ciphertext: StateVector) -> None:
    """Place the ciphertext on the data wires and log the first transmission."""
    n, m = register.num_data_wires, register.num_pairs
    if ciphertext.num_qubits != n:
        raise ValueError(f"ciphertext has {ciphertext.num_qubits} qubits, expected {n}")
    if register.state.num_qubits != n + 2 * m:
        raise ValueError("register no longer holds the setup layout")
    pair_block = register.state.amplitudes[: 2 ** (2 * m)]
    rest = register.state.amplitudes[2 ** (2 * m):]
    if rest.size and np.abs(rest).max() > 1e-12:
        raise ValueError("data wires are not in the |0..0> placeholder state")
    register.state = StateVector(n + 2 * m, np.kron(ciphertext.amplitudes, pair_block))
    register.transcript.append(
        Message(
            CLIENT_TO_SERVER,
            "ciphertext",
            tuple(f"w{w}" for w in range(1, n + 1)),
            0,
        )
    )


def eg_u(
    register: JointRegister,
    data_label: str,
    c_label: str,
    s_label: str,
    u: Optional[np.ndarray],
    *,
    rng: Optional[np.random.Generator] = None,
    forced: Optional[tuple[int, int]] = None,
) -> tuple[MeasurementOutcome, float]:
    """Run the encrypted gate on one qubit.

    Precondition: ``(c_label, s_label)`` hold a ``|Phi00>`` pair.  The data
    qubit and the ``c`` half are measured in the u-rotated Bell basis; the
    ``s`` half is left holding ``X^a Z^b u |data>`` and keeps its label.
    """
    register.wire_of(s_label)  # fail fast on a dead label
    return register.measure_pair(data_label, c_label, u, rng=rng, forced=forced)


def evaluate(
    scheme: str, circuit: Circuit, register: JointRegister
) -> KeyUpdatePlan:
    """Run the evaluation stage: gates, per-T SWAPs, and plan generation.

    No measurement happens here.  Appends the single server-to-client
    message carrying the result wires, every ``s_i`` qubit, and the plan.
    """
    prof = profile(circuit)
    if circuit.num_wires != register.num_data_wires:
        raise ValueError(
            f"circuit acts on {circuit.num_wires} wires, register has "
            f"{register.num_data_wires}"
        )
    if prof.m != register.num_pairs:
        raise ValueError(
            f"circuit has {prof.m} T/TD gates but the register holds "
            f"{register.num_pairs} Bell pairs"
        )
    round_ = 0
    for g in circuit.gates:
        register.apply_gate(g.kind, *(f"w{w}" for w in g.wires))
        if g.kind in T_KINDS:
            round_ += 1
            register.apply_gate("SWAP", f"w{g.wires[0]}", f"s{round_}")
    plan = keyalg.derive_plan(scheme, circuit)
    labels = tuple(f"w{w}" for w in range(1, circuit.num_wires + 1)) + tuple(
        f"s{i}" for i in range(1, prof.m + 1)
    )
    register.transcript.append(
        Message(
            SERVER_TO_CLIENT,
            "result_and_plan",
            labels,
            len(keyalg.plan_to_text(plan).encode()),
        )
    )
    return plan


def _measurement_basis(bit: int) -> Optional[np.ndarray]:
    return qsim.P if bit else None


def decrypt(
    scheme: str,
    sk: PauliKey,
    plan: KeyUpdatePlan,
    register: JointRegister,
    *,
    rng: Optional[np.random.Generator] = None,
    forced_outcomes: Optional[Sequence[tuple[int, int]]] = None,
) -> RunResult:
    """Run the decryption stage: alternate basis-bit computation and
    measurement, assemble the final key, and strip the QOTP mask."""
    if scheme != plan.scheme:
        raise ValueError(f"plan was derived for {plan.scheme!r}, not {scheme!r}")
    n, m = plan.num_wires, plan.num_rounds
    if n != register.num_data_wires or m != register.num_pairs:
        raise ValueError("plan does not match the register layout")
    if sk.n != n:
        raise ValueError(f"secret key covers {sk.n} wires, expected {n}")
    if forced_outcomes is not None and len(forced_outcomes) != m:
        raise ValueError(f"need {m} forced outcomes, got {len(forced_outcomes)}")

    outcomes: list[MeasurementOutcome] = []
    probs: list[float] = []

    def measure(i: int, basis_bit: int) -> MeasurementOutcome:
        forced = None if forced_outcomes is None else forced_outcomes[i - 1]
        out, prob = register.measure_pair(
            f"s{i}", f"c{i}", _measurement_basis(basis_bit), rng=rng, forced=forced
        )
        outcomes.append(out)
        probs.append(prob)
        return out

    if plan.scheme == GT:
        assignment = {x_var(w): sk.x[w - 1] for w in range(1, n + 1)}
        assignment.update({z_var(w): sk.z[w - 1] for w in range(1, n + 1)})
        for i in range(1, m + 1):
            out = measure(i, plan.g[i - 1].evaluate(assignment))
            assignment[rx_var(i)] = out.a
            assignment[rz_var(i)] = out.b
        xf = tuple(plan.f_final[w - 1].evaluate(assignment) for w in range(1, n + 1))
        zf = tuple(plan.f_final[n + w - 1].evaluate(assignment) for w in range(1, n + 1))
    else:
        current = {x_var(w, 0): sk.x[w - 1] for w in range(1, n + 1)}
        current.update({z_var(w, 0): sk.z[w - 1] for w in range(1, n + 1)})
        for i in range(1, m + 1):
            out = measure(i, plan.g[i - 1].evaluate(current))
            local = dict(current)
            local[rx_var(i)] = out.a
            local[rz_var(i)] = out.b
            rows = plan.f_rounds[i - 1]
            tag = plan.key_tags[i]
            nxt = {
                x_var(w, tag): rows[w - 1].evaluate(local) for w in range(1, n + 1)
            }
            nxt.update(
                {z_var(w, tag): rows[n + w - 1].evaluate(local) for w in range(1, n + 1)}
            )
            current = nxt
        xf = tuple(plan.f_final[w - 1].evaluate(current) for w in range(1, n + 1))
        zf = tuple(plan.f_final[n + w - 1].evaluate(current) for w in range(1, n + 1))

    final_key = PauliKey(xf, zf)
    output = decrypt_qotp(final_key, register.state)
    return RunResult(
        output, tuple(outcomes), final_key, register.transcript, tuple(probs)
    )


def run_end_to_end(
    scheme: str,
    circuit: Circuit,
    plaintext: StateVector,
    seed: Optional[int] = None,
    *,
    rng: Optional[np.random.Generator] = None,
    sk: Optional[PauliKey] = None,
    forced_outcomes: Optional[Sequence[tuple[int, int]]] = None,
    cap: int = DEFAULT_QUBIT_CAP,
) -> RunResult:
    """Setup, key generation, encryption, evaluation and decryption in one
    call, all driven by a single seeded random stream."""
    if rng is None:
        rng = np.random.default_rng(seed)
    if plaintext.num_qubits != circuit.num_wires:
        raise ValueError(
            f"plaintext has {plaintext.num_qubits} qubits, circuit wants "
            f"{circuit.num_wires}"
        )
    prof = profile(circuit)
    register = setup(circuit.num_wires, prof.m, cap=cap)
    if sk is None:
        sk = keygen(circuit.num_wires, rng)
    load_ciphertext(register, encrypt(sk, plaintext))
    plan = evaluate(scheme, circuit, register)
    return decrypt(
        scheme, sk, plan, register, rng=rng, forced_outcomes=forced_outcomes
    )
