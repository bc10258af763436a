"""Shared fixtures: the two worked-example circuits and an independent
operator-embedding oracle used to cross-check the simulator's tensor math."""

import numpy as np
import pytest

from gtqhe import parse_circuit

# single-qubit benchmark: T, H, T, H applied left to right
C1_TEXT = "qubits 1\nT 1\nH 1\nT 1\nH 1\n"

# two-qubit QFT benchmark (no trailing swap)
C2_TEXT = "qubits 2\nH 1\nCNOT 2 1\nTD 1\nCNOT 2 1\nT 1\nT 2\nH 2\n"


@pytest.fixture
def c1():
    return parse_circuit(C1_TEXT)


@pytest.fixture
def c2():
    return parse_circuit(C2_TEXT)


def expand_operator(mat, wires, num_qubits):
    """Embed a small operator on `wires` into the full 2^k matrix.

    Pure index arithmetic, independent of the simulator's axis juggling:
    wire 1 is the most significant index bit and the first wire in `wires`
    is the most significant bit of the small matrix basis.
    """
    mat = np.asarray(mat, dtype=complex)
    k = num_qubits
    dim = 2 ** k
    sub_n = len(wires)
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (k - w)) & 1 for w in range(1, k + 1)]
        sub_in = 0
        for w in wires:
            sub_in = (sub_in << 1) | bits[w - 1]
        for sub_out in range(2 ** sub_n):
            amp = mat[sub_out, sub_in]
            if amp == 0:
                continue
            new_bits = list(bits)
            for pos, w in enumerate(wires):
                new_bits[w - 1] = (sub_out >> (sub_n - 1 - pos)) & 1
            row = 0
            for b in new_bits:
                row = (row << 1) | b
            full[row, col] += amp
    return full
