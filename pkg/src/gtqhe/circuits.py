"""Clifford+T circuits: text format, validation, and T-position profiling.

Circuit files are line-oriented UTF-8.  The first effective line is
``qubits <n>``; every following line names one gate: ``X w``, ``Z w``,
``H w``, ``P w``, ``T w``, ``TD w`` or ``CNOT c t`` (control first).
``#`` starts a comment and blank lines are ignored.  Wire indices are
1-based.  SWAP never appears in circuit files; it is internal to the
evaluation protocol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qsim import GATE_ARITY, GateId, StateVector, apply_gate

T_KINDS = ("T", "TD")
USER_GATE_KINDS = ("X", "Z", "H", "P", "T", "TD", "CNOT")


class CircuitParseError(ValueError):
    """A circuit file violated the grammar; the message names the line."""


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list over wires ``1..num_wires``."""

    num_wires: int
    gates: tuple[GateId, ...]

    def __post_init__(self):
        if self.num_wires < 1:
            raise ValueError("a circuit needs at least one wire")
        object.__setattr__(self, "gates", tuple(self.gates))
        for j, g in enumerate(self.gates, start=1):
            if g.kind not in USER_GATE_KINDS:
                raise ValueError(f"gate {j}: {g.kind} is not allowed in user circuits")
            for w in g.wires:
                if w > self.num_wires:
                    raise ValueError(
                        f"gate {j}: wire {w} out of range 1..{self.num_wires}"
                    )

    @property
    def size(self) -> int:
        return len(self.gates)


@dataclass(frozen=True)
class CircuitProfile:
    """Positions of the T/TD gates: ``m`` of them, at (gate index, wire)."""

    m: int
    positions: tuple[tuple[int, int], ...]
    kinds: tuple[str, ...]

    def __post_init__(self):
        if self.m != len(self.positions) or self.m != len(self.kinds):
            raise ValueError("profile length mismatch")
        for (j, _), (j2, _) in zip(self.positions, self.positions[1:]):
            if j2 <= j:
                raise ValueError("profile positions must be strictly increasing")


def parse_circuit(text: str) -> Circuit:
    """Parse the circuit file grammar; raise :class:`CircuitParseError`."""
    num_wires = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if num_wires is None:
            if tokens[0] != "qubits" or len(tokens) != 2:
                raise CircuitParseError(
                    f"line {lineno}: expected 'qubits <n>' header, got {line!r}"
                )
            try:
                num_wires = int(tokens[1])
            except ValueError:
                raise CircuitParseError(f"line {lineno}: bad qubit count {tokens[1]!r}")
            if num_wires < 1:
                raise CircuitParseError(f"line {lineno}: qubit count must be positive")
            continue
        kind = tokens[0]
        if kind not in USER_GATE_KINDS:
            raise CircuitParseError(f"line {lineno}: unknown gate mnemonic {kind!r}")
        try:
            wires = tuple(int(t) for t in tokens[1:])
        except ValueError:
            raise CircuitParseError(f"line {lineno}: wire indices must be integers")
        if len(wires) != GATE_ARITY[kind]:
            raise CircuitParseError(
                f"line {lineno}: {kind} takes {GATE_ARITY[kind]} wire(s), got {len(wires)}"
            )
        if any(not 1 <= w <= num_wires for w in wires):
            raise CircuitParseError(
                f"line {lineno}: wire out of range 1..{num_wires}"
            )
        try:
            gates.append(GateId(kind, wires))
        except ValueError as exc:
            raise CircuitParseError(f"line {lineno}: {exc}")
    if num_wires is None:
        raise CircuitParseError("missing 'qubits <n>' header")
    return Circuit(num_wires, tuple(gates))


def serialize_circuit(circuit: Circuit) -> str:
    """Inverse of :func:`parse_circuit` (up to comments and blank lines)."""
    lines = [f"qubits {circuit.num_wires}"]
    lines.extend(f"{g.kind} {' '.join(str(w) for w in g.wires)}" for g in circuit.gates)
    return "\n".join(lines) + "\n"


def profile(circuit: Circuit) -> CircuitProfile:
    """Count and locate the T/TD gates, numbered left to right."""
    positions = []
    kinds = []
    for j, g in enumerate(circuit.gates, start=1):
        if g.kind in T_KINDS:
            positions.append((j, g.wires[0]))
            kinds.append(g.kind)
    return CircuitProfile(len(positions), tuple(positions), tuple(kinds))


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    """Apply the gates in order; the reference channel for homomorphism tests."""
    if state.num_qubits != circuit.num_wires:
        raise ValueError(
            f"state has {state.num_qubits} qubits, circuit wants {circuit.num_wires}"
        )
    for g in circuit.gates:
        state = apply_gate(state, g)
    return state


def random_circuit(
    rng: np.random.Generator,
    *,
    max_wires: int = 3,
    max_gates: int = 20,
    max_t: int = 5,
) -> Circuit:
    """Random Clifford+T circuit with at most ``max_t`` T/TD gates."""
    n = int(rng.integers(1, max_wires + 1))
    size = int(rng.integers(0, max_gates + 1))
    t_left = max_t
    gates = []
    for _ in range(size):
        pool = ["X", "Z", "H", "P"]
        if n >= 2:
            pool.append("CNOT")
        if t_left > 0:
            pool.extend(["T", "TD"])
        kind = pool[int(rng.integers(len(pool)))]
        if kind == "CNOT":
            c, t = rng.choice(n, size=2, replace=False) + 1
            gates.append(GateId("CNOT", (int(c), int(t))))
        else:
            if kind in T_KINDS:
                t_left -= 1
            gates.append(GateId(kind, (int(rng.integers(1, n + 1)),)))
    return Circuit(n, tuple(gates))
