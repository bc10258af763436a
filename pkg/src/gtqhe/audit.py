"""Desk-scale verifiers: security audits, deferred-measurement equivalence,
and quasi-compactness instrumentation.

Every audit is exact (projector norms, exhaustive key averages, eigenvalue
trace distances) except where a seeded random sweep is explicitly part of the
check.  Reports serialize to JSON with stable field names and a ``pass``
verdict at the audit's tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import keyalg, protocol, qsim
from .circuits import Circuit, T_KINDS, apply_circuit, profile
from .keyalg import GT, KeyUpdatePlan, update_key_bits
from .protocol import PauliKey, decrypt_qotp, encrypt, load_ciphertext, setup
from .qsim import DensityMatrix, StateVector, density_matrix, maximally_mixed

#: Exact-identity audits (security, branch probabilities) pass at this bound.
EXACT_TOL = 1e-10

#: Simulation-level audits (state fidelities) pass at this bound.
SIM_TOL = 1e-9


@dataclass(frozen=True)
class SecurityReport:
    """Key-averaged ciphertext vs. the totally mixed reference."""

    n: int
    distances: tuple[float, ...]
    max_trace_distance: float
    tolerance: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "distances": list(self.distances),
            "max_trace_distance": self.max_trace_distance,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class EgSecurityReport:
    """Server's view of the encrypted gate, averaged over outcomes."""

    max_probability_deviation: float
    distance_to_mixed: tuple[float, float]  # hidden bit 0, hidden bit 1
    cross_view_distance: float
    tolerance: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "max_probability_deviation": self.max_probability_deviation,
            "distance_to_mixed": list(self.distance_to_mixed),
            "cross_view_distance": self.cross_view_distance,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class DeferredEquivalenceReport:
    """Immediate vs. deferred measurement on identical forced branches."""

    fidelity_gap: float
    probability_gap: float
    keys_match: bool
    tolerance: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "fidelity_gap": self.fidelity_gap,
            "probability_gap": self.probability_gap,
            "keys_match": self.keys_match,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class CompactnessReport:
    """Arity and XOR-work accounting for one key-update plan."""

    scheme: str
    n: int
    m: int
    g_arities: tuple[int, ...]
    f_round_arities: tuple[tuple[int, ...], ...]
    f_final_arities: tuple[int, ...]
    xor_term_total: int
    measurement_count: int
    violations: tuple[str, ...]
    passed: bool

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "n": self.n,
            "M": self.m,
            "arities": {
                "g": list(self.g_arities),
                "f_rounds": [list(r) for r in self.f_round_arities],
                "f_final": list(self.f_final_arities),
            },
            "xor_term_total": self.xor_term_total,
            "measurement_count": self.measurement_count,
            "violations": list(self.violations),
            "pass": self.passed,
        }


@dataclass(frozen=True)
class SweepReport:
    """Aggregate of many end-to-end runs against the plaintext oracle."""

    scheme: str
    runs: int
    min_fidelity: float
    transcripts_ok: bool
    compactness_ok: bool
    failures: tuple[str, ...]
    tolerance: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "runs": self.runs,
            "min_fidelity": self.min_fidelity,
            "transcripts_ok": self.transcripts_ok,
            "compactness_ok": self.compactness_ok,
            "failures": list(self.failures),
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


Plaintext = Union[StateVector, DensityMatrix]


def _as_dm(pt: Plaintext, n: int) -> DensityMatrix:
    dm = pt if isinstance(pt, DensityMatrix) else density_matrix(pt)
    if dm.num_qubits != n:
        raise ValueError(f"plaintext has {dm.num_qubits} qubits, expected {n}")
    return dm


def _key_average(dm: np.ndarray, n_masked: int, n_idle: int = 0) -> np.ndarray:
    """Average ``(X^a Z^b (x) I) rho (...)^dag`` over all 4^n_masked keys."""
    acc = np.zeros_like(dm)
    idle = np.eye(2 ** n_idle, dtype=complex) if n_idle else None
    for xbits in itertools.product((0, 1), repeat=n_masked):
        for zbits in itertools.product((0, 1), repeat=n_masked):
            op = qsim.pauli_operator(xbits, zbits)
            if idle is not None:
                op = np.kron(op, idle)
            acc += op @ dm @ op.conj().T
    return acc / 4 ** n_masked


def qotp_security_audit(
    n: int, plaintexts: Sequence[Plaintext], tolerance: float = EXACT_TOL
) -> SecurityReport:
    """Exhaustively key-average each plaintext and compare with ``I/2^n``."""
    if not 1 <= n <= 3:
        raise ValueError("exhaustive key audit supports n in 1..3")
    mixed = maximally_mixed(n)
    distances = []
    for pt in plaintexts:
        dm = _as_dm(pt, n)
        avg = DensityMatrix(n, _key_average(dm.entries, n))
        distances.append(qsim.trace_distance(avg, mixed))
    worst = max(distances) if distances else 0.0
    return SecurityReport(n, tuple(distances), worst, tolerance, worst <= tolerance)


def qotp_reference_system_audit(
    n_a: int, joint: DensityMatrix, tolerance: float = EXACT_TOL
) -> SecurityReport:
    """Encrypt only part A of a joint A|E state and compare against
    ``I/2^{n_A} (x) Tr_A(joint)``; entanglement with E must not leak."""
    n_e = joint.num_qubits - n_a
    if n_a < 1 or n_e < 0 or joint.num_qubits > 4:
        raise ValueError("reference audit supports n_A >= 1 and n_A + n_E <= 4")
    avg = _key_average(joint.entries, n_a, n_e)
    if n_e:
        env = qsim.partial_trace(joint, range(n_a + 1, joint.num_qubits + 1))
        ref = np.kron(maximally_mixed(n_a).entries, env.entries)
    else:
        ref = maximally_mixed(n_a).entries
    dist = qsim.trace_distance(
        DensityMatrix(joint.num_qubits, avg), DensityMatrix(joint.num_qubits, ref)
    )
    return SecurityReport(n_a, (dist,), dist, tolerance, dist <= tolerance)


def eg_security_audit(
    alpha: StateVector, tolerance: float = EXACT_TOL
) -> EgSecurityReport:
    """Check the encrypted-gate security claims for one input qubit.

    For both hidden bits x: every branch probability is exactly 1/4, the
    outcome-averaged server qubit is totally mixed, and the two averaged
    views coincide, so the server learns nothing about x or the outcome.
    """
    if alpha.num_qubits != 1:
        raise ValueError("the encrypted gate acts on a single qubit")
    state = qsim.tensor(alpha, qsim.bell_state(0, 0))
    views = []
    prob_dev = 0.0
    for x in (0, 1):
        branches, probs = qsim.bell_branches(state, 1, 2, qsim.P if x else None)
        prob_dev = max(prob_dev, float(np.abs(probs - 0.25).max()))
        avg = np.zeros((2, 2), dtype=complex)
        for vec in branches:
            avg += np.outer(vec, vec.conj())
        views.append(DensityMatrix(1, avg))
    mixed = maximally_mixed(1)
    d0 = qsim.trace_distance(views[0], mixed)
    d1 = qsim.trace_distance(views[1], mixed)
    cross = qsim.trace_distance(views[0], views[1])
    passed = max(prob_dev, d0, d1, cross) <= tolerance
    return EgSecurityReport(prob_dev, (d0, d1), cross, tolerance, passed)


def _immediate_measurement_run(
    circuit: Circuit,
    plaintext: StateVector,
    sk: PauliKey,
    forced_outcomes: Sequence[tuple[int, int]],
) -> tuple[StateVector, PauliKey, list[float]]:
    """Measure each Bell pair right after its SWAP instead of deferring."""
    prof = profile(circuit)
    register = setup(circuit.num_wires, prof.m)
    load_ciphertext(register, encrypt(sk, plaintext))
    xbits, zbits = sk.x, sk.z
    probs = []
    round_ = 0
    for g in circuit.gates:
        if g.kind in T_KINDS:
            round_ += 1
            basis_bit = xbits[g.wires[0] - 1]
            register.apply_gate(g.kind, f"w{g.wires[0]}")
            register.apply_gate("SWAP", f"w{g.wires[0]}", f"s{round_}")
            out, prob = register.measure_pair(
                f"s{round_}",
                f"c{round_}",
                qsim.P if basis_bit else None,
                forced=forced_outcomes[round_ - 1],
            )
            probs.append(prob)
            xbits, zbits = update_key_bits(xbits, zbits, g, (out.a, out.b))
        else:
            register.apply_gate(g.kind, *(f"w{w}" for w in g.wires))
            xbits, zbits = update_key_bits(xbits, zbits, g)
    key = PauliKey(xbits, zbits)
    return decrypt_qotp(key, register.state), key, probs


def deferred_equivalence(
    circuit: Circuit,
    plaintext: StateVector,
    forced_outcomes: Sequence[tuple[int, int]],
    *,
    sk: Optional[PauliKey] = None,
    tolerance: float = SIM_TOL,
) -> DeferredEquivalenceReport:
    """Compare immediate-measurement and fully deferred runs on one forced
    branch; both the outputs and the branch probabilities must agree."""
    prof = profile(circuit)
    if len(forced_outcomes) != prof.m:
        raise ValueError(f"need {prof.m} forced outcomes, got {len(forced_outcomes)}")
    if sk is None:
        sk = protocol.keygen(circuit.num_wires, np.random.default_rng(0))

    out_a, key_a, probs_a = _immediate_measurement_run(
        circuit, plaintext, sk, forced_outcomes
    )

    register = setup(circuit.num_wires, prof.m)
    load_ciphertext(register, encrypt(sk, plaintext))
    plan = protocol.evaluate(GT, circuit, register)
    res = protocol.decrypt(GT, sk, plan, register, forced_outcomes=forced_outcomes)

    gap = 1.0 - qsim.fidelity_up_to_phase(out_a, res.output_state)
    if probs_a:
        prob_gap = max(
            abs(pa - pb) for pa, pb in zip(probs_a, res.branch_probabilities)
        )
    else:
        prob_gap = 0.0
    keys_match = key_a == res.final_key
    passed = gap <= tolerance and prob_gap <= tolerance and keys_match
    return DeferredEquivalenceReport(gap, prob_gap, keys_match, tolerance, passed)


def compactness_report(plan: KeyUpdatePlan) -> CompactnessReport:
    """Tabulate plan arities and assert the scheme's quasi-compactness bounds."""
    n, m = plan.num_wires, plan.num_rounds
    g_arities = tuple(e.arity for e in plan.g)
    f_final_arities = tuple(e.arity for e in plan.f_final)
    violations = []
    if plan.scheme == GT:
        f_round_arities: tuple[tuple[int, ...], ...] = ()
        for i, a in enumerate(g_arities, start=1):
            bound = 2 * n + 2 * (i - 1)
            if a > bound:
                violations.append(f"g_{i} arity {a} exceeds {bound}")
        for r, a in enumerate(f_final_arities):
            if a > 2 * n + 2 * m:
                violations.append(f"f row {r} arity {a} exceeds {2 * n + 2 * m}")
    else:
        f_round_arities = tuple(
            tuple(e.arity for e in rows) for rows in plan.f_rounds
        )
        for i, a in enumerate(g_arities, start=1):
            if a > 2 * n:
                violations.append(f"g_{i} arity {a} exceeds {2 * n}")
        for i, rows in enumerate(f_round_arities, start=1):
            for r, a in enumerate(rows):
                if a > 2 * n + 2:
                    violations.append(f"f_{i} row {r} arity {a} exceeds {2 * n + 2}")
        for r, a in enumerate(f_final_arities):
            if a > 2 * n:
                violations.append(f"final map row {r} arity {a} exceeds {2 * n}")
    xor_total = sum(g_arities) + sum(f_final_arities) + sum(
        a for rows in f_round_arities for a in rows
    )
    return CompactnessReport(
        plan.scheme,
        n,
        m,
        g_arities,
        f_round_arities,
        f_final_arities,
        xor_total,
        m,
        tuple(violations),
        not violations,
    )


def homomorphism_sweep(
    scheme: str,
    circuits: Sequence[Circuit],
    seeds_per_circuit: int = 10,
    seed: int = 0,
    tolerance: float = SIM_TOL,
) -> SweepReport:
    """Run every circuit end to end against the plaintext oracle.

    Each run also asserts the two-message transcript and the plan's
    compactness bounds; any violation is a failure, not an exception.
    """
    failures = []
    min_fid = 1.0
    transcripts_ok = True
    compactness_ok = True
    runs = 0
    for ci, circuit in enumerate(circuits):
        plan = keyalg.derive_plan(scheme, circuit)
        if not compactness_report(plan).passed:
            compactness_ok = False
            failures.append(f"circuit {ci}: compactness bounds violated")
        for s in range(seeds_per_circuit):
            rng = np.random.default_rng([seed, ci, s])
            plaintext = qsim.random_state(circuit.num_wires, rng)
            result = protocol.run_end_to_end(scheme, circuit, plaintext, rng=rng)
            fid = qsim.fidelity_up_to_phase(
                result.output_state, apply_circuit(plaintext, circuit)
            )
            min_fid = min(min_fid, fid)
            if fid < 1.0 - tolerance:
                failures.append(f"circuit {ci} seed {s}: fidelity {fid:.12f}")
            if len(result.transcript) != 2:
                transcripts_ok = False
                failures.append(
                    f"circuit {ci} seed {s}: {len(result.transcript)} messages"
                )
            runs += 1
    passed = transcripts_ok and compactness_ok and min_fid >= 1.0 - tolerance
    return SweepReport(
        scheme,
        runs,
        min_fid,
        transcripts_ok,
        compactness_ok,
        tuple(failures),
        tolerance,
        passed,
    )


def qotp_plaintext_battery(
    n: int, rng: np.random.Generator, count: int = 10
) -> list[DensityMatrix]:
    """A varied plaintext set for the QOTP audit: basis states, uniform
    superpositions, maximally entangled states (n >= 2), and random fills."""
    states: list[StateVector] = [
        qsim.basis_state([0] * n),
        qsim.basis_state([1] * n),
    ]
    plus = qsim.new_state(n)
    for w in range(1, n + 1):
        plus = qsim.apply_gate(plus, qsim.GateId("H", (w,)))
    states.append(plus)
    if n >= 2:
        ghz = qsim.new_state(n)
        ghz = qsim.apply_gate(ghz, qsim.GateId("H", (1,)))
        for w in range(2, n + 1):
            ghz = qsim.apply_gate(ghz, qsim.GateId("CNOT", (1, w)))
        states.append(ghz)
    while len(states) < count:
        states.append(qsim.random_state(n, rng))
    return [density_matrix(s) for s in states[:count]]
