"""Mapping of the truncated oscillator and the spin-boson Hamiltonian onto qubits.

The oscillator is truncated at ``d_ho`` levels, each level is assigned an
integer, the integer is written out with an integer-to-bit code (reflected
Gray or standard binary), and every level transition ``|l><l'|`` becomes a
product of the single-qubit operators

    |0><0| = (I + Z)/2      |0><1| = (X + iY)/2
    |1><1| = (I - Z)/2      |1><0| = (X - iY)/2

so that any truncated operator turns into a Pauli sum.  With the register
laid out as ``[spin 1, boson qubits, spin 2, ...]`` the encoded Hamiltonian
for one spin at (h=1, eps=0.5, omega=4, lambda=2, d_ho=4, Gray) has exactly
the eight non-identity terms

    -sqrt(2) X0X1Z2 + sqrt(2) X0X1 + (1-sqrt(3)) X0Z1X2 + (1+sqrt(3)) X0X2
    + 1/4 X0 - 1/2 Z0 - 2 Z1Z2 - 4 Z1

which the test suite pins down coefficient by coefficient.  The spin-z term
enters as -h/2 Z, i.e. the excited spin state is the computational |1>.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .pauli import PauliString, PauliSum, canonicalize

GRAY = "gray"
STANDARD_BINARY = "binary"
CODE_KINDS = (GRAY, STANDARD_BINARY)

# |b><b'| in terms of (phase, letter) pairs; each entry is a two-term sum.
_BIT_PAIR_OPS = {
    (0, 0): ((0.5, "I"), (0.5, "Z")),
    (1, 1): ((0.5, "I"), (-0.5, "Z")),
    (0, 1): ((0.5, "X"), (0.5j, "Y")),
    (1, 0): ((0.5, "X"), (-0.5j, "Y")),
}


@dataclass(frozen=True)
class TruncationSpec:
    """Number of retained oscillator levels and the qubits they need."""

    d_ho: int

    def __post_init__(self) -> None:
        if self.d_ho < 2:
            raise ValueError("need at least two oscillator levels")

    @property
    def n_qubits(self) -> int:
        return boson_qubit_count(self.d_ho)


@dataclass(frozen=True)
class BitCode:
    """An integer-to-bit code of fixed width (Gray or standard binary)."""

    kind: str
    width: int

    def __post_init__(self) -> None:
        if self.kind not in CODE_KINDS:
            raise ValueError(f"unknown code kind {self.kind!r}")
        if self.width < 1:
            raise ValueError("code width must be positive")

    def bits(self, i: int) -> tuple[int, ...]:
        return code_bits(i, self)


def boson_qubit_count(d_ho: int) -> int:
    """Qubits needed for d_ho levels: ceil(log2 d_ho)."""
    return max(1, math.ceil(math.log2(d_ho)))


def code_bits(i: int, code: BitCode) -> tuple[int, ...]:
    """Code word of integer ``i``, most significant bit first."""
    if not 0 <= i < 2**code.width:
        raise ValueError(f"index {i} out of range for width {code.width}")
    word = i ^ (i >> 1) if code.kind == GRAY else i
    return tuple((word >> (code.width - 1 - k)) & 1 for k in range(code.width))


def code_index(bits: tuple[int, ...], code: BitCode) -> int:
    """Integer whose code word is ``bits`` (inverse of :func:`code_bits`)."""
    if len(bits) != code.width:
        raise ValueError("word length does not match code width")
    word = 0
    for b in bits:
        word = (word << 1) | b
    if code.kind != GRAY:
        return word
    i = word
    shift = 1
    while (word >> shift) > 0:
        i ^= word >> shift
        shift += 1
    return i


def code_permutation(code: BitCode) -> np.ndarray:
    """Permutation matrix P with P|i> = |code word of i>."""
    dim = 2**code.width
    perm = np.zeros((dim, dim))
    for i in range(dim):
        word = int("".join(map(str, code_bits(i, code))), 2)
        perm[word, i] = 1
    return perm


def encode_transition(l: int, lp: int, code: BitCode, d_ho: int | None = None) -> PauliSum:
    """Pauli sum whose dense matrix is exactly ``|code(l)><code(lp)|``."""
    limit = d_ho if d_ho is not None else 2**code.width
    if not (0 <= l < limit and 0 <= lp < limit):
        raise ValueError(f"levels ({l}, {lp}) out of range for d_ho={limit}")
    row = code_bits(l, code)
    col = code_bits(lp, code)
    terms = []
    for combo in itertools.product(*(_BIT_PAIR_OPS[pair] for pair in zip(row, col))):
        coeff = 1.0 + 0j
        letters = []
        for c, letter in combo:
            coeff *= c
            letters.append(letter)
        terms.append(PauliString("".join(letters), coeff))
    return canonicalize(PauliSum(tuple(terms)))


def encode_boson_operator(which: str, spec: TruncationSpec, code: BitCode) -> PauliSum:
    """Encoded lowering, raising or number operator of the truncated oscillator.

    ``which`` is one of ``"a"``, ``"a_dagger"``, ``"number"``; matrix
    elements are a_{l,l+1} = sqrt(l+1), its transpose, and n_{l,l} = l.
    """
    if code.width != spec.n_qubits:
        raise ValueError("code width does not match truncation")
    terms: list[PauliString] = []
    for l in range(spec.d_ho):
        for lp in range(spec.d_ho):
            if which == "a":
                elem = math.sqrt(lp) if lp == l + 1 else 0.0
            elif which == "a_dagger":
                elem = math.sqrt(l) if l == lp + 1 else 0.0
            elif which == "number":
                elem = float(l) if l == lp else 0.0
            else:
                raise ValueError(f"unknown boson operator {which!r}")
            if elem:
                terms.extend(encode_transition(l, lp, code, spec.d_ho).scaled(elem).terms)
    return canonicalize(PauliSum(tuple(terms)))


def spin_positions(n_spins: int, n_boson_qubits: int) -> tuple[int, ...]:
    """Register positions of the spins: spin 1 first, the rest after the bosons."""
    return (0,) + tuple(n_boson_qubits + k for k in range(1, n_spins))


def boson_positions(n_spins: int, n_boson_qubits: int) -> tuple[int, ...]:
    return tuple(range(1, 1 + n_boson_qubits))


def register_width(n_spins: int, n_boson_qubits: int) -> int:
    return n_spins + n_boson_qubits


def _embed(pattern: str, positions: tuple[int, ...], width: int) -> str:
    letters = ["I"] * width
    for q, c in zip(positions, pattern):
        letters[q] = c
    return "".join(letters)


def encode_hamiltonian(params, code: BitCode | str = GRAY) -> PauliSum:
    """Encoded spin-boson Hamiltonian on the ``[spin1, bosons, spin2, ...]`` register.

    Per spin the terms are ``-h/2 Z + eps/2 X + lambda X (a + a')`` with the
    encoded oscillator operators, plus ``omega`` times the encoded number
    operator; identity-only terms (a global phase) are dropped.
    """
    spec = TruncationSpec(params.d_ho)
    if isinstance(code, str):
        code = BitCode(code, spec.n_qubits)
    width = register_width(params.n_spins, spec.n_qubits)
    if width > 8:
        raise ValueError(f"register width {width} exceeds the dense-oracle limit")
    spins = spin_positions(params.n_spins, spec.n_qubits)
    bosons = boson_positions(params.n_spins, spec.n_qubits)

    number = encode_boson_operator("number", spec, code)
    position = canonicalize(
        encode_boson_operator("a", spec, code) + encode_boson_operator("a_dagger", spec, code)
    )

    terms: list[PauliString] = []
    for t in number.terms:
        terms.append(PauliString(_embed(t.letters, bosons, width), params.omega * t.coefficient))
    for sq in spins:
        terms.append(PauliString(_embed("Z", (sq,), width), -params.h / 2))
        terms.append(PauliString(_embed("X", (sq,), width), params.epsilon / 2))
        for t in position.terms:
            pattern = _embed(t.letters, bosons, width)
            pattern = pattern[:sq] + "X" + pattern[sq + 1 :]
            terms.append(PauliString(pattern, params.lambda_c * t.coefficient))

    encoded, _ = canonicalize(PauliSum(tuple(terms))).drop_identity()
    return encoded
