"""Shared brute-force oracles for the test suite.

These helpers deliberately avoid the package's own embedding/conjugation
code paths: operators are expanded by enumerating basis states, so circuit
unitaries and channels are checked against an independent construction.
"""

import numpy as np
import pytest

from sbsim.sim import gate_unitary

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron_all(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def embed_bruteforce(op: np.ndarray, qubits, width: int) -> np.ndarray:
    """Expand op onto the full register by explicit basis-state bookkeeping."""
    dim = 2**width
    k = len(qubits)
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (width - 1 - q)) & 1 for q in range(width)]
        sub_in = 0
        for q in qubits:
            sub_in = (sub_in << 1) | bits[q]
        for sub_out in range(2**k):
            amp = op[sub_out, sub_in]
            if amp == 0:
                continue
            out_bits = list(bits)
            for i, q in enumerate(qubits):
                out_bits[q] = (sub_out >> (k - 1 - i)) & 1
            row = 0
            for b in out_bits:
                row = (row << 1) | b
            full[row, col] += amp
    return full


def circuit_unitary(circuit) -> np.ndarray:
    """Gate-by-gate matrix product of a purely unitary circuit."""
    dim = 2**circuit.width
    total = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        if g.kind in ("barrier", "measure"):
            continue
        if g.kind == "reset":
            raise ValueError("circuit is not unitary")
        total = embed_bruteforce(gate_unitary(g.kind, g.angle), g.qubits, circuit.width) @ total
    return total


def random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
