"""Statevector/density-matrix core: gates, Bell machinery, measurements."""

import numpy as np
import pytest

from conftest import expand_operator
from gtqhe import qsim
from gtqhe.qsim import (
    DensityMatrix,
    GateId,
    PostSelectionError,
    ResourceLimitError,
    StateVector,
    apply_gate,
    apply_unitary,
    basis_state,
    bell_branches,
    bell_state,
    density_matrix,
    fidelity_up_to_phase,
    gate,
    maximally_mixed,
    new_state,
    operator_fidelity,
    partial_trace,
    pauli_operator,
    random_state,
    rotated_bell_measure,
    rotated_bell_vector,
    tensor,
    trace_distance,
)

SQ2 = 1 / np.sqrt(2)


class TestNewState:
    def test_one_qubit(self):
        np.testing.assert_allclose(new_state(1).amplitudes, [1, 0])

    def test_two_qubits(self):
        np.testing.assert_allclose(new_state(2).amplitudes, [1, 0, 0, 0])

    def test_cap_boundary(self):
        with pytest.raises(ResourceLimitError, match="22"):
            new_state(23)

    def test_configurable_cap(self):
        with pytest.raises(ResourceLimitError, match="4"):
            new_state(5, cap=4)
        assert new_state(4, cap=4).num_qubits == 4

    def test_rejects_zero_qubits(self):
        with pytest.raises(ValueError):
            new_state(0)


class TestBasisState:
    def test_index_convention_wire1_is_msb(self):
        # |10> must sit at index 2
        np.testing.assert_allclose(basis_state([1, 0]).amplitudes, [0, 0, 1, 0])

    def test_rejects_non_bits(self):
        with pytest.raises(ValueError):
            basis_state([0, 2])


class TestGateId:
    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown gate"):
            GateId("Y", (1,))

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            GateId("H", (1, 2))
        with pytest.raises(ValueError):
            GateId("CNOT", (1,))

    def test_cnot_equal_wires(self):
        with pytest.raises(ValueError, match="distinct"):
            GateId("CNOT", (1, 1))


class TestApplyGate:
    def test_hadamard_definition(self):
        out = apply_gate(new_state(1), gate("H", 1))
        np.testing.assert_allclose(out.amplitudes, [SQ2, SQ2], atol=1e-12)

    def test_t_phase_on_one(self):
        out = apply_gate(basis_state([1]), gate("T", 1))
        np.testing.assert_allclose(
            out.amplitudes, [0, np.exp(1j * np.pi / 4)], atol=1e-12
        )

    def test_cnot_flips_target(self):
        out = apply_gate(basis_state([1, 0]), gate("CNOT", 1, 2))
        np.testing.assert_allclose(out.amplitudes, basis_state([1, 1]).amplitudes)

    def test_wire_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            apply_gate(new_state(1), gate("H", 2))

    def test_matches_expanded_operator_oracle(self):
        # every gate on every wire placement of a 4-qubit register
        rng = np.random.default_rng(7)
        state = random_state(4, rng)
        for kind, mat in qsim.SINGLE_QUBIT_GATES.items():
            for w in range(1, 5):
                got = apply_gate(state, gate(kind, w)).amplitudes
                want = expand_operator(mat, (w,), 4) @ state.amplitudes
                np.testing.assert_allclose(got, want, atol=1e-12)
        for kind, mat in qsim.TWO_QUBIT_GATES.items():
            for w1 in range(1, 5):
                for w2 in range(1, 5):
                    if w1 == w2:
                        continue
                    got = apply_gate(state, gate(kind, w1, w2)).amplitudes
                    want = expand_operator(mat, (w1, w2), 4) @ state.amplitudes
                    np.testing.assert_allclose(got, want, atol=1e-12)

    def test_norm_preserved_on_random_states(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            state = random_state(3, rng)
            for g in [gate("H", 2), gate("T", 1), gate("P", 3), gate("CNOT", 3, 1),
                      gate("X", 2), gate("Z", 1), gate("TD", 3), gate("SWAP", 1, 2)]:
                state = apply_gate(state, g)
                assert abs(state.norm() - 1.0) < 1e-9


class TestBellStates:
    def test_phi00(self):
        np.testing.assert_allclose(bell_state(0, 0).amplitudes, [SQ2, 0, 0, SQ2])

    def test_phi10_x_applied(self):
        # (X (x) I)|Phi00> = (|10> + |01>)/sqrt2
        np.testing.assert_allclose(bell_state(1, 0).amplitudes, [0, SQ2, SQ2, 0])

    def test_phi01_z_applied(self):
        np.testing.assert_allclose(bell_state(0, 1).amplitudes, [SQ2, 0, 0, -SQ2])

    def test_orthonormal_basis(self):
        vecs = [bell_state(a, b).amplitudes for a in (0, 1) for b in (0, 1)]
        gram = np.array([[np.vdot(u, v) for v in vecs] for u in vecs])
        np.testing.assert_allclose(gram, np.eye(4), atol=1e-12)


class TestRotatedBellMeasure:
    def test_teleport_identity_branch(self):
        joint = tensor(new_state(1), bell_state(0, 0))
        out, post, prob = rotated_bell_measure(joint, 1, 2, None, forced=(0, 0))
        assert (out.a, out.b) == (0, 0)
        assert abs(prob - 0.25) < 1e-12
        assert fidelity_up_to_phase(post, new_state(1)) > 1 - 1e-12

    def test_teleport_x_branch(self):
        joint = tensor(new_state(1), bell_state(0, 0))
        _, post, _ = rotated_bell_measure(joint, 1, 2, None, forced=(1, 0))
        assert fidelity_up_to_phase(post, basis_state([1])) > 1 - 1e-12

    def test_rotated_branch_matches_projector_oracle(self):
        # oracle: apply |Phi(P)_ab><Phi(P)_ab| (x) I as an explicit 8x8 matrix
        rng = np.random.default_rng(11)
        alpha = random_state(1, rng)
        data = StateVector(1, qsim.T @ qsim.X @ qsim.Z @ alpha.amplitudes)
        joint = tensor(data, bell_state(0, 0))
        for a in (0, 1):
            for b in (0, 1):
                phi = rotated_bell_vector(a, b, qsim.P)
                proj = np.kron(np.outer(phi, phi.conj()), np.eye(2))
                projected = (proj @ joint.amplitudes).reshape(4, 2)
                # measured pair collapsed onto phi: residual lives on qubit 3
                residual = phi.conj() @ projected
                want = residual / np.linalg.norm(residual)
                _, post, prob = rotated_bell_measure(joint, 1, 2, qsim.P, forced=(a, b))
                assert abs(prob - np.linalg.norm(residual) ** 2) < 1e-12
                assert abs(abs(np.vdot(want, post.amplitudes)) - 1) < 1e-12

    def test_branch_probabilities_uniform_for_any_input_and_basis(self):
        rng = np.random.default_rng(5)
        for u in (None, qsim.P, qsim.T, qsim.H):
            alpha = random_state(1, rng)
            joint = tensor(alpha, bell_state(0, 0))
            _, probs = bell_branches(joint, 1, 2, u)
            np.testing.assert_allclose(probs, 0.25, atol=1e-9)

    def test_branch_average_matches_expansion_mixture(self):
        # sum_ab p(ab) |post_ab><post_ab| == (1/4) sum_ab |X^a Z^b u alpha><...|
        rng = np.random.default_rng(13)
        alpha = random_state(1, rng)
        u = qsim.P
        joint = tensor(alpha, bell_state(0, 0))
        avg = np.zeros((2, 2), dtype=complex)
        for a in (0, 1):
            for b in (0, 1):
                _, post, prob = rotated_bell_measure(joint, 1, 2, u, forced=(a, b))
                avg += prob * np.outer(post.amplitudes, post.amplitudes.conj())
        ref = np.zeros((2, 2), dtype=complex)
        for a in (0, 1):
            for b in (0, 1):
                m = u @ alpha.amplitudes
                if b:
                    m = qsim.Z @ m
                if a:
                    m = qsim.X @ m
                ref += 0.25 * np.outer(m, m.conj())
        assert trace_distance(DensityMatrix(1, avg), DensityMatrix(1, ref)) < 1e-9

    def test_measured_wires_removed_and_order_kept(self):
        joint = tensor(tensor(new_state(1), bell_state(0, 0)), basis_state([1]))
        _, post, _ = rotated_bell_measure(joint, 1, 2, None, forced=(1, 0))
        assert post.num_qubits == 2
        assert fidelity_up_to_phase(post, basis_state([1, 1])) > 1 - 1e-12

    def test_forced_zero_probability_rejected(self):
        # measuring wires (2,3) of |000> can never see the (1,0) Bell branch
        with pytest.raises(PostSelectionError):
            rotated_bell_measure(new_state(3), 2, 3, None, forced=(1, 0))

    def test_requires_rng_or_forced(self):
        joint = tensor(new_state(1), bell_state(0, 0))
        with pytest.raises(ValueError):
            rotated_bell_measure(joint, 1, 2, None)

    def test_sampling_is_seed_deterministic(self):
        joint = tensor(new_state(1), bell_state(0, 0))
        a = rotated_bell_measure(joint, 1, 2, None, rng=np.random.default_rng(9))
        b = rotated_bell_measure(joint, 1, 2, None, rng=np.random.default_rng(9))
        assert a[0] == b[0]


class TestPartialTrace:
    def test_bell_marginal_is_mixed(self):
        dm = density_matrix(bell_state(0, 0))
        reduced = partial_trace(dm, keep={1})
        assert trace_distance(reduced, maximally_mixed(1)) < 1e-12

    def test_keep_everything_is_identity(self):
        dm = density_matrix(random_state(2, np.random.default_rng(2)))
        np.testing.assert_allclose(partial_trace(dm, {1, 2}).entries, dm.entries)

    def test_product_state_marginal(self):
        dm = density_matrix(basis_state([0, 1]))
        reduced = partial_trace(dm, keep={2})
        np.testing.assert_allclose(reduced.entries, [[0, 0], [0, 1]])

    def test_empty_keep_rejected(self):
        with pytest.raises(ValueError):
            partial_trace(density_matrix(bell_state(0, 0)), set())

    def test_trace_preserved(self):
        dm = density_matrix(random_state(3, np.random.default_rng(4)))
        reduced = partial_trace(dm, keep={2})
        assert abs(np.trace(reduced.entries) - 1) < 1e-12


class TestTraceDistance:
    def test_identical_states(self):
        dm = density_matrix(random_state(2, np.random.default_rng(6)))
        assert trace_distance(dm, dm) == 0

    def test_orthogonal_pure_states(self):
        # eigenvalues of |0><0| - |1><1| are +1 and -1, so Tr|diff| = 2
        d0 = density_matrix(basis_state([0]))
        d1 = density_matrix(basis_state([1]))
        assert abs(trace_distance(d0, d1) - 2.0) < 1e-12

    def test_pure_vs_mixed(self):
        # eigenvalues of |0><0| - I/2 are +1/2 and -1/2
        d0 = density_matrix(basis_state([0]))
        assert abs(trace_distance(d0, maximally_mixed(1)) - 1.0) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            trace_distance(maximally_mixed(1), maximally_mixed(2))


class TestFidelityUpToPhase:
    def test_identical(self):
        psi = random_state(2, np.random.default_rng(8))
        assert abs(fidelity_up_to_phase(psi, psi) - 1) < 1e-12

    def test_global_phase_ignored(self):
        psi = random_state(1, np.random.default_rng(9))
        rotated = StateVector(1, np.exp(1j * np.pi / 4) * psi.amplitudes)
        assert abs(fidelity_up_to_phase(psi, rotated) - 1) < 1e-12

    def test_orthogonal(self):
        assert fidelity_up_to_phase(basis_state([0]), basis_state([1])) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fidelity_up_to_phase(new_state(1), new_state(2))


class TestDensityMatrixChecks:
    def test_pure_state_density_matrix_is_valid(self):
        density_matrix(random_state(2, np.random.default_rng(10))).validate()

    def test_invalid_trace_flagged(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(1, np.eye(2)).validate()

    def test_non_hermitian_flagged(self):
        m = np.array([[0.5, 0.5], [0.0, 0.5]])
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix(1, m).validate()


class TestPauliOperator:
    def test_wirewise_layout(self):
        # X on wire 1, Z on wire 2
        op = pauli_operator([1, 0], [0, 1])
        want = np.kron(qsim.X, qsim.Z)
        np.testing.assert_allclose(op, want)

    def test_order_within_wire(self):
        # X^1 Z^1 means Z first, X second
        op = pauli_operator([1], [1])
        np.testing.assert_allclose(op, qsim.X @ qsim.Z)


class TestOperatorIdentities:
    """A few sanity identities; the full suite lives in the acceptance tests."""

    def test_t_dagger_is_seven_t(self):
        m = np.linalg.matrix_power(qsim.T, 7)
        assert abs(operator_fidelity(qsim.T_DAGGER, m) - 1) < 1e-9

    def test_swap_is_three_cnots(self):
        cnot_ji = expand_operator(qsim.CNOT, (2, 1), 2)
        m = qsim.CNOT @ cnot_ji @ qsim.CNOT
        np.testing.assert_allclose(m, qsim.SWAP, atol=1e-12)

    def test_p_squared_is_z(self):
        assert abs(operator_fidelity(qsim.P @ qsim.P, qsim.Z) - 1) < 1e-12
