"""Dense statevector and density-matrix simulation of few-qubit registers.

Conventions
-----------
Wires are numbered from 1, and wire 1 is the *most significant* bit of the
amplitude index: the basis state ``|b1 b2 ... bk>`` sits at index
``b1*2^(k-1) + b2*2^(k-2) + ... + bk``.

All amplitudes are double-precision complex.  Public operations take a state
in and return a new state; nothing is mutated in place.  Equality of pure
states is always judged with :func:`fidelity_up_to_phase`, never amplitude by
amplitude, because the algebra used throughout only holds up to a global
phase.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

#: Hard ceiling on register width; 2^22 complex amplitudes is about 64 MB.
DEFAULT_QUBIT_CAP = 22

#: Default numeric tolerance for state/operator comparisons.
DEFAULT_ATOL = 1e-9

#: A forced measurement branch below this probability is treated as impossible.
POSTSELECT_MIN_PROB = 1e-12


class ResourceLimitError(Exception):
    """A register would exceed the configured qubit cap."""


class PostSelectionError(Exception):
    """A forced measurement outcome has numerically zero probability."""


_SQRT_HALF = 1.0 / np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = _SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex)
P = np.array([[1, 0], [0, 1j]], dtype=complex)
T = np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex)
T_DAGGER = np.array([[1, 0], [0, np.exp(-1j * np.pi / 4)]], dtype=complex)
CNOT = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]],
    dtype=complex,
)
SWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]],
    dtype=complex,
)

SINGLE_QUBIT_GATES = {"X": X, "Z": Z, "H": H, "P": P, "T": T, "TD": T_DAGGER}
TWO_QUBIT_GATES = {"CNOT": CNOT, "SWAP": SWAP}
GATE_ARITY = {**{k: 1 for k in SINGLE_QUBIT_GATES}, **{k: 2 for k in TWO_QUBIT_GATES}}


@dataclass(frozen=True)
class GateId:
    """A named gate applied to specific wires.

    ``kind`` is one of ``X Z H P T TD CNOT SWAP`` (``TD`` is the adjoint of
    ``T``).  For ``CNOT`` the wire order is ``(control, target)``.
    """

    kind: str
    wires: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        arity = GATE_ARITY[self.kind]
        if len(self.wires) != arity:
            raise ValueError(f"{self.kind} takes {arity} wire(s), got {self.wires}")
        if any(w < 1 for w in self.wires):
            raise ValueError(f"wire indices are 1-based, got {self.wires}")
        if arity == 2 and self.wires[0] == self.wires[1]:
            raise ValueError(f"{self.kind} requires two distinct wires")

    def matrix(self) -> np.ndarray:
        return SINGLE_QUBIT_GATES.get(self.kind, TWO_QUBIT_GATES.get(self.kind))


def gate(kind: str, *wires: int) -> GateId:
    """Shorthand constructor: ``gate("CNOT", 2, 1)``."""
    return GateId(kind, tuple(wires))


@dataclass(frozen=True)
class MeasurementOutcome:
    """One rotated-Bell-measurement result: ``a`` is the X-correction bit
    (r_x) and ``b`` the Z-correction bit (r_z) of the teleported state."""

    a: int
    b: int

    def __post_init__(self):
        if self.a not in (0, 1) or self.b not in (0, 1):
            raise ValueError(f"outcome bits must be 0/1, got ({self.a}, {self.b})")


@dataclass(eq=False)
class StateVector:
    """Pure state of ``num_qubits`` qubits as 2^n complex amplitudes."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.num_qubits < 1:
            raise ValueError("a state needs at least one qubit")
        if self.amplitudes.shape != (2 ** self.num_qubits,):
            raise ValueError(
                f"expected {2 ** self.num_qubits} amplitudes, got {self.amplitudes.shape}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor_view(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per wire (axis w-1 <-> wire w)."""
        return self.amplitudes.reshape((2,) * self.num_qubits)


@dataclass(eq=False)
class DensityMatrix:
    """Mixed state of ``num_qubits`` qubits as a 2^n x 2^n operator."""

    num_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        d = 2 ** self.num_qubits
        if self.num_qubits < 1 or self.entries.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix for {self.num_qubits} qubits")

    def validate(self, atol: float = DEFAULT_ATOL) -> None:
        """Check Hermiticity, unit trace and positivity; raise on violation."""
        m = self.entries
        if np.abs(m - m.conj().T).max() > atol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > atol:
            raise ValueError(f"trace is {np.trace(m)}, expected 1")
        if np.linalg.eigvalsh(m).min() < -atol:
            raise ValueError("density matrix has a negative eigenvalue")


def new_state(num_qubits: int, cap: int = DEFAULT_QUBIT_CAP) -> StateVector:
    """Return the all-zeros basis state ``|0...0>`` on ``num_qubits`` wires."""
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    if num_qubits > cap:
        raise ResourceLimitError(
            f"{num_qubits} qubits exceeds the register cap of {cap}"
        )
    amps = np.zeros(2 ** num_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


def basis_state(bits: Sequence[int]) -> StateVector:
    """Return the computational basis state for the given bit string."""
    bits = [int(b) for b in bits]
    if not bits or any(b not in (0, 1) for b in bits):
        raise ValueError(f"bits must be a non-empty 0/1 sequence, got {bits}")
    idx = 0
    for b in bits:
        idx = (idx << 1) | b
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[idx] = 1.0
    return StateVector(len(bits), amps)


def random_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    """Haar-ish random pure state (normalized complex Gaussian vector)."""
    v = rng.normal(size=2 ** num_qubits) + 1j * rng.normal(size=2 ** num_qubits)
    return StateVector(num_qubits, v / np.linalg.norm(v))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product; ``a``'s wires come first (most significant)."""
    return StateVector(a.num_qubits + b.num_qubits, np.kron(a.amplitudes, b.amplitudes))


def _check_wire(state: StateVector, w: int) -> None:
    if not 1 <= w <= state.num_qubits:
        raise ValueError(f"wire {w} out of range 1..{state.num_qubits}")


def apply_unitary(state: StateVector, matrix: np.ndarray, wires: Sequence[int]) -> StateVector:
    """Apply a 2x2 or 4x4 unitary to the named wires (identity elsewhere).

    For a 4x4 matrix the first wire in ``wires`` indexes the high bit of the
    matrix basis, so the standard CNOT matrix takes ``(control, target)``.
    """
    wires = tuple(wires)
    for w in wires:
        _check_wire(state, w)
    k = state.num_qubits
    t = state.tensor_view()
    if len(wires) == 1:
        w = wires[0]
        out = np.tensordot(matrix, t, axes=([1], [w - 1]))
        out = np.moveaxis(out, 0, w - 1)
    elif len(wires) == 2:
        w1, w2 = wires
        if w1 == w2:
            raise ValueError("two-qubit gate requires distinct wires")
        moved = np.moveaxis(t, (w1 - 1, w2 - 1), (0, 1))
        rest = moved.shape[2:]
        out = (matrix @ moved.reshape(4, -1)).reshape((2, 2) + rest)
        out = np.moveaxis(out, (0, 1), (w1 - 1, w2 - 1))
    else:
        raise ValueError("only 1- and 2-wire unitaries are supported")
    return StateVector(k, np.ascontiguousarray(out).reshape(-1))


def apply_gate(state: StateVector, g: GateId) -> StateVector:
    """Apply a named gate; all other wires act as identity."""
    return apply_unitary(state, g.matrix(), g.wires)


def rotated_bell_vector(a: int, b: int, u: Optional[np.ndarray] = None) -> np.ndarray:
    """The 4-vector ``(u^dag Z^b X^a (x) I)|Phi00>``; ``u=None`` means identity.

    The first tensor factor is the slot that receives ``u^dag``.
    """
    m = I2
    if a:
        m = X @ m
    if b:
        m = Z @ m
    if u is not None:
        m = u.conj().T @ m
    base = np.zeros(4, dtype=complex)
    base[0] = base[3] = _SQRT_HALF
    return np.kron(m, I2) @ base


def bell_state(a: int, b: int) -> StateVector:
    """Two-qubit Bell state ``(Z^b X^a (x) I)|Phi00>``."""
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError("Bell labels must be bits")
    return StateVector(2, rotated_bell_vector(a, b, None))


def bell_branches(
    state: StateVector, q1: int, q2: int, u: Optional[np.ndarray] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Project wires ``(q1, q2)`` of ``state`` onto the u-rotated Bell basis.

    Returns ``(branches, probs)`` where ``branches[2a+b]`` is the
    *unnormalized* residual vector on the remaining wires (in their original
    relative order) after projecting onto ``|Phi(u)_ab>``, and
    ``probs[2a+b]`` is the Born probability of that branch.  ``q1`` is the
    slot that receives ``u^dag``.
    """
    _check_wire(state, q1)
    _check_wire(state, q2)
    if q1 == q2:
        raise ValueError("measurement wires must be distinct")
    t = np.moveaxis(state.tensor_view(), (q1 - 1, q2 - 1), (0, 1))
    flat = t.reshape(4, -1)
    branches = np.empty((4, flat.shape[1]), dtype=complex)
    probs = np.empty(4)
    for a in (0, 1):
        for c in (0, 1):
            phi = rotated_bell_vector(a, c, u)
            vec = phi.conj() @ flat
            branches[2 * a + c] = vec
            probs[2 * a + c] = float(np.real(np.vdot(vec, vec)))
    return branches, probs


def rotated_bell_measure(
    state: StateVector,
    q1: int,
    q2: int,
    u: Optional[np.ndarray] = None,
    *,
    rng: Optional[np.random.Generator] = None,
    forced: Optional[tuple[int, int]] = None,
) -> tuple[MeasurementOutcome, StateVector, float]:
    """Measure wires ``(q1, q2)`` in the u-rotated Bell basis.

    The measured wires are consumed: the returned state has them removed and
    is renormalized.  Outcomes are sampled from ``rng`` with Born
    probabilities unless ``forced=(a, b)`` post-selects a branch; forcing a
    branch of numerically zero probability raises :class:`PostSelectionError`.

    Returns ``(outcome, post_state, branch_probability)``.
    """
    if state.num_qubits < 3:
        raise ValueError("the register must keep at least one unmeasured qubit")
    branches, probs = bell_branches(state, q1, q2, u)
    if forced is not None:
        a, b = int(forced[0]), int(forced[1])
        if a not in (0, 1) or b not in (0, 1):
            raise ValueError(f"forced outcome bits must be 0/1, got {forced}")
        idx = 2 * a + b
        if probs[idx] < POSTSELECT_MIN_PROB:
            raise PostSelectionError(
                f"forced outcome ({a},{b}) has probability {probs[idx]:.3e}"
            )
    else:
        if rng is None:
            raise ValueError("either an rng or a forced outcome is required")
        idx = int(rng.choice(4, p=probs / probs.sum()))
        a, b = idx >> 1, idx & 1
    post = branches[idx] / np.sqrt(probs[idx])
    return (
        MeasurementOutcome(a, b),
        StateVector(state.num_qubits - 2, post),
        float(probs[idx]),
    )


def density_matrix(state: StateVector) -> DensityMatrix:
    """Rank-one density matrix ``|psi><psi|``."""
    v = state.amplitudes
    return DensityMatrix(state.num_qubits, np.outer(v, v.conj()))


def maximally_mixed(num_qubits: int) -> DensityMatrix:
    """The totally mixed state ``I / 2^n``."""
    d = 2 ** num_qubits
    return DensityMatrix(num_qubits, np.eye(d, dtype=complex) / d)


def partial_trace(dm: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every wire not in ``keep``; kept wires keep their order."""
    keep_set = {int(w) for w in keep}
    if not keep_set:
        raise ValueError("keep set must not be empty")
    if not keep_set <= set(range(1, dm.num_qubits + 1)):
        raise ValueError(f"keep wires {sorted(keep_set)} out of range")
    traced = sorted(set(range(1, dm.num_qubits + 1)) - keep_set, reverse=True)
    k = dm.num_qubits
    t = dm.entries.reshape((2,) * (2 * k))
    for w in traced:
        t = np.trace(t, axis1=w - 1, axis2=k + w - 1)
        k -= 1
    d = 2 ** k
    return DensityMatrix(k, t.reshape(d, d))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``Tr|rho - sigma|`` (no factor 1/2), via the Hermitian eigenvalues."""
    if rho.num_qubits != sigma.num_qubits:
        raise ValueError("trace distance needs equal dimensions")
    eigs = np.linalg.eigvalsh(rho.entries - sigma.entries)
    return float(np.abs(eigs).sum())


def fidelity_up_to_phase(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|``: 1 iff the states agree up to a global phase."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("fidelity needs equal dimensions")
    return float(np.abs(np.vdot(a.amplitudes, b.amplitudes)))


def operator_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|Tr(a^dag b)| / dim``: 1 iff the operators agree up to a phase."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError("operator fidelity needs equal square matrices")
    return float(np.abs(np.trace(a.conj().T @ b)) / a.shape[0])


def pauli_operator(xbits: Sequence[int], zbits: Sequence[int]) -> np.ndarray:
    """The n-qubit mask ``X^x Z^z`` as a dense matrix (wire 1 leftmost)."""
    if len(xbits) != len(zbits) or not xbits:
        raise ValueError("xbits and zbits must be equal-length and non-empty")
    op = np.array([[1.0 + 0j]])
    for xb, zb in zip(xbits, zbits):
        m = I2
        if zb:
            m = Z @ m
        if xb:
            m = X @ m
        op = np.kron(op, m)
    return op
