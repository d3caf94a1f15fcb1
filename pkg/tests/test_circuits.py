"""Circuit constructors against dense matrix-product and channel oracles."""

import math

import numpy as np
import pytest
import scipy.linalg

from conftest import circuit_unitary, embed_bruteforce, kron_all, PAULI
from sbsim.circuits import (
    Circuit,
    Gate,
    assemble_evolution,
    collision_angle,
    collision_block,
    pauli_exponential,
    trotter_step,
)
from sbsim.model import (
    EQ2_LITERAL,
    PAPER_COLLISION,
    InitialStateSpec,
    ModelParams,
    hamiltonian_sum,
)
from sbsim.pauli import PauliString, PauliSum


def _string_matrix(term: PauliString) -> np.ndarray:
    return term.to_dense()


def test_single_z_is_one_rz():
    frag = pauli_exponential(PauliString("Z"), 0.3)
    assert [g.kind for g in frag.gates] == ["rz"]
    assert frag.gates[0].angle == pytest.approx(0.6)
    np.testing.assert_allclose(
        circuit_unitary(frag), scipy.linalg.expm(-0.3j * PAULI["Z"]), atol=1e-14
    )


def test_zz_staircase_pattern():
    frag = pauli_exponential(PauliString("ZZ"), 0.45)
    assert [g.kind for g in frag.gates] == ["cx", "rz", "cx"]
    np.testing.assert_allclose(
        circuit_unitary(frag),
        scipy.linalg.expm(-0.45j * kron_all([PAULI["Z"], PAULI["Z"]])),
        atol=1e-13,
    )


def test_zero_angle_is_identity():
    frag = pauli_exponential(PauliString("XYZ"), 0.0)
    np.testing.assert_allclose(circuit_unitary(frag), np.eye(8), atol=1e-13)


def test_identity_string_rejected():
    with pytest.raises(ValueError):
        pauli_exponential(PauliString("II"), 0.1)


def test_complex_coefficient_rejected():
    with pytest.raises(ValueError):
        pauli_exponential(PauliString("X", 1j), 0.1)


@pytest.mark.parametrize("letters", ["X", "Y", "XZ", "YY", "XIZ", "IYX", "XYZI"])
def test_exponential_matches_expm_exactly(letters):
    # exact including global phase, per the staircase construction
    coeff = 0.731
    frag = pauli_exponential(PauliString(letters, coeff), 0.37)
    target = scipy.linalg.expm(-1j * 0.37 * coeff * _string_matrix(PauliString(letters)))
    np.testing.assert_allclose(circuit_unitary(frag), target, atol=1e-12)


def test_exponential_random_strings(rng):
    for _ in range(15):
        width = int(rng.integers(1, 5))
        letters = "".join(rng.choice(list("IXYZ"), size=width))
        if set(letters) == {"I"}:
            continue
        coeff = float(rng.normal())
        angle = float(rng.normal())
        frag = pauli_exponential(PauliString(letters, coeff), angle)
        target = scipy.linalg.expm(-1j * angle * coeff * _string_matrix(PauliString(letters)))
        np.testing.assert_allclose(circuit_unitary(frag), target, atol=1e-12)


def test_single_term_orders_agree():
    h = PauliSum.from_pairs([("XZ", 0.8)])
    u1 = circuit_unitary(trotter_step(h, 0.3, 1))
    u2 = circuit_unitary(trotter_step(h, 0.3, 2))
    np.testing.assert_allclose(u1, u2, atol=1e-13)


def test_second_order_beats_first_order():
    h = hamiltonian_sum(ModelParams())
    exact = scipy.linalg.expm(-0.1j * h.to_dense())
    err1 = np.linalg.norm(circuit_unitary(trotter_step(h, 0.1, 1)) - exact)
    err2 = np.linalg.norm(circuit_unitary(trotter_step(h, 0.1, 2)) - exact)
    assert err2 < err1


def test_two_half_steps_beat_one_full_step():
    h = hamiltonian_sum(ModelParams())
    exact = scipy.linalg.expm(-0.2j * h.to_dense())
    full = circuit_unitary(trotter_step(h, 0.2, 1))
    half = circuit_unitary(trotter_step(h, 0.1, 1))
    assert np.linalg.norm(half @ half - exact) < np.linalg.norm(full - exact)


def test_second_order_is_first_order_with_reversed_half():
    # structural identity: U2(dt) = reversed-order U1(dt/2) times U1(dt/2)
    h = hamiltonian_sum(ModelParams())
    forward = circuit_unitary(trotter_step(h, 0.15, 1))
    terms = h.canonicalize().terms
    reversed_sum = PauliSum(tuple(reversed(terms)))
    backward_gates = []
    for t in reversed_sum.terms:
        backward_gates.extend(pauli_exponential(t, 0.15).gates)
    backward = circuit_unitary(Circuit(h.width, tuple(backward_gates)))
    u2 = circuit_unitary(trotter_step(h, 0.3, 2))
    np.testing.assert_allclose(u2, backward @ forward, atol=1e-12)


def test_unsupported_order():
    with pytest.raises(ValueError):
        trotter_step(PauliSum.from_pairs([("X", 1.0)]), 0.1, 3)


def test_collision_angles():
    assert collision_angle(0.0, 0.2) == 0.0
    assert collision_angle(1.0, 0.2, PAPER_COLLISION) == pytest.approx(
        math.asin(math.sqrt(1 - math.exp(-0.2))), abs=1e-12
    )
    # frozen from the closed form: arcsin(sqrt(1 - exp(-0.2))), arcsin(sqrt(1 - exp(-0.4)))
    assert collision_angle(1.0, 0.2, PAPER_COLLISION) == pytest.approx(0.4397986259359949, abs=1e-12)
    assert collision_angle(1.0, 0.2, EQ2_LITERAL) == pytest.approx(0.6115993522446161, abs=1e-12)
    with pytest.raises(ValueError):
        collision_angle(-1.0, 0.2)


def _collision_channel_on_spin(gamma, dt, convention):
    """Brute-force channel tomography of the block, aux traced out."""
    from sbsim.sim import gate_unitary

    block = collision_block(gamma, dt, 0, 1, convention)

    def apply_block(rho_spin):
        rho = np.kron(rho_spin, np.diag([1.0, 0.0]).astype(complex))
        for g in block.gates:
            if g.kind == "reset":
                k0 = embed_bruteforce(np.array([[1, 0], [0, 0]], dtype=complex), g.qubits, 2)
                k1 = embed_bruteforce(np.array([[0, 1], [0, 0]], dtype=complex), g.qubits, 2)
                rho = k0 @ rho @ k0.conj().T + k1 @ rho @ k1.conj().T
            else:
                u = embed_bruteforce(gate_unitary(g.kind, g.angle), g.qubits, 2)
                rho = u @ rho @ u.conj().T
        return np.einsum(rho.reshape(2, 2, 2, 2), [0, 1, 2, 1], [0, 2])

    choi = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[i, j] = 1.0
            out = apply_block(unit)
            choi += np.kron(unit, out)
    return choi


def _amplitude_damping_choi(p):
    k0 = np.array([[1, 0], [0, math.sqrt(1 - p)]], dtype=complex)
    k1 = np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex)
    choi = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[i, j] = 1.0
            choi += np.kron(unit, k0 @ unit @ k0.conj().T + k1 @ unit @ k1.conj().T)
    return choi


@pytest.mark.parametrize("convention,scale", [(PAPER_COLLISION, 1.0), (EQ2_LITERAL, 2.0)])
def test_collision_block_is_amplitude_damping(convention, scale):
    gamma, dt = 1.3, 0.17
    choi = _collision_channel_on_spin(gamma, dt, convention)
    expected = _amplitude_damping_choi(1 - math.exp(-scale * gamma * dt))
    assert np.max(np.abs(choi - expected)) < 1e-12


def test_collision_block_gate_order():
    block = collision_block(1.0, 0.2, 3, 4)
    kinds = [g.kind for g in block.gates]
    assert kinds == ["cry", "cx", "reset"]
    assert block.gates[0].qubits == (3, 4)  # spin controls the aux rotation
    assert block.gates[1].qubits == (4, 3)  # aux controls the spin flip
    assert block.gates[2].qubits == (4,)


def test_collision_gamma_zero_identity_channel():
    choi = _collision_channel_on_spin(0.0, 0.2, PAPER_COLLISION)
    assert np.max(np.abs(choi - _amplitude_damping_choi(0.0))) < 1e-14


def test_assemble_zero_steps():
    c = assemble_evolution(ModelParams(), InitialStateSpec(), 0, 0.2)
    kinds = [g.kind for g in c.gates]
    assert kinds == ["x", "barrier", "measure", "measure", "measure"]
    assert c.roles == ("boson", "boson", "spin", "aux")
    assert c.model_register == (2, 0, 1)


def test_assemble_barriers_and_steps():
    c = assemble_evolution(ModelParams(), InitialStateSpec(), 10, 0.2)
    assert sum(1 for g in c.gates if g.kind == "barrier") == 11
    assert sum(1 for g in c.gates if g.kind == "reset") == 10
    # resets only touch the aux qubit
    assert all(g.qubits == (3,) for g in c.gates if g.kind == "reset")


def test_assemble_two_spins_collisions_per_step():
    params = ModelParams(n_spins=2, omega=6)
    c = assemble_evolution(params, InitialStateSpec(("up", "down")), 3, 0.2)
    assert c.width == 6
    assert c.roles == ("aux", "spin", "boson", "boson", "spin", "aux")
    assert sum(1 for g in c.gates if g.kind == "cry") == 6  # two collisions per step
    assert c.model_register == (1, 2, 3, 4)
    measured = c.measured_qubits
    assert set(measured) == {1, 2, 3, 4}


def test_assemble_gamma_zero_has_no_collisions():
    c = assemble_evolution(ModelParams(gamma=0.0), InitialStateSpec(), 5, 0.2)
    assert all(g.kind not in ("cry", "reset") for g in c.gates)


def test_assemble_measures_after_final_barrier():
    c = assemble_evolution(ModelParams(), InitialStateSpec(), 2, 0.2)
    last_barrier = max(i for i, g in enumerate(c.gates) if g.kind == "barrier")
    assert all(g.kind == "measure" for g in c.gates[last_barrier + 1 :])


def test_assemble_boson_level_preparation():
    c = assemble_evolution(ModelParams(), InitialStateSpec(("down",), 3), 0, 0.2)
    x_targets = {g.qubits[0] for g in c.gates if g.kind == "x"}
    assert x_targets == {0}  # gray(3) = 10 on [b hi, b lo]


def test_circuit_text_serialization():
    c = collision_block(1.0, 0.2, 0, 1)
    lines = c.to_text().splitlines()
    assert lines[0].startswith("cry 0 1 0.879")
    assert lines[1] == "cx 1 0"
    assert lines[2] == "reset 1"


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("cx", (1, 1))
    with pytest.raises(ValueError):
        Gate("rz", (0,))
    with pytest.raises(ValueError):
        Gate("x", (0,), 0.5)
    with pytest.raises(ValueError):
        Gate("warp", (0,))
    with pytest.raises(ValueError):
        Circuit(1, (Gate("x", (3,)),))


def test_circuit_invariants():
    with pytest.raises(ValueError):
        Circuit(1, (Gate("measure", (0,)), Gate("x", (0,))))
    with pytest.raises(ValueError):
        Circuit(2, (Gate("reset", (0,)),), roles=("spin", "aux"))
    Circuit(2, (Gate("reset", (1,)),), roles=("spin", "aux"))
