"""Gate-level IR and circuit constructors.

Builds Pauli-exponential staircases, first/second-order product-formula
steps, the two-qubit collision block realizing amplitude damping, and the
full evolution circuit that alternates a unitary step with one collision
per spin, with a barrier marking every time step.

Angle convention (pinned by the gate set): RY(t) = exp(-i t Y / 2) and
RZ(t) = exp(-i t Z / 2), i.e. the gate argument is twice the rotation
angle.  The collision block therefore carries CRY(2*theta) with
theta = arcsin(sqrt(1 - exp(-gamma_eff dt))).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


from .encoding import GRAY, BitCode, TruncationSpec, code_bits
from .model import (
    PAPER_COLLISION,
    SPIN_UP,
    InitialStateSpec,
    ModelParams,
    gamma_eff,
    hamiltonian_sum,
)
from .pauli import PauliString, PauliSum

UNITARY_KINDS = ("x", "sx", "rz", "ry", "cx", "cry", "id")
MARKER_KINDS = ("reset", "measure", "barrier")
ANGLED_KINDS = ("rz", "ry", "cry")
TWO_QUBIT_KINDS = ("cx", "cry")

ROLE_SPIN = "spin"
ROLE_BOSON = "boson"
ROLE_AUX = "aux"


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...] = ()
    angle: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in UNITARY_KINDS + MARKER_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated operands {self.qubits}")
        if self.kind in TWO_QUBIT_KINDS and len(self.qubits) != 2:
            raise ValueError(f"{self.kind} needs two operands")
        if self.kind in ANGLED_KINDS:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle")
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over a register with optional per-qubit role tags.

    ``model_register`` lists, in spin+boson register order, the circuit
    index of each model qubit; auxiliaries are not listed.
    """

    width: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)
    roles: tuple[str, ...] | None = None
    model_register: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.roles is not None and len(self.roles) != self.width:
            raise ValueError("one role per qubit required")
        seen_measure = False
        for g in self.gates:
            if any(q >= self.width or q < 0 for q in g.qubits):
                raise ValueError(f"gate {g} outside register of width {self.width}")
            if seen_measure and g.kind != "measure":
                raise ValueError("measurements must come last")
            seen_measure = seen_measure or g.kind == "measure"
            if (
                g.kind == "reset"
                and self.roles is not None
                and any(self.roles[q] != ROLE_AUX for q in g.qubits)
            ):
                raise ValueError(f"reset on non-auxiliary qubit {g.qubits}")

    @property
    def aux_qubits(self) -> tuple[int, ...]:
        if self.roles is None:
            return ()
        return tuple(q for q, r in enumerate(self.roles) if r == ROLE_AUX)

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        return tuple(q for g in self.gates if g.kind == "measure" for q in g.qubits)

    def to_text(self) -> str:
        lines = []
        for g in self.gates:
            parts = [g.kind] + [str(q) for q in g.qubits]
            if g.angle is not None:
                parts.append(f"{g.angle:.17g}")
            lines.append(" ".join(parts))
        return "\n".join(lines)


# Basis changes V with V P V' = Z, as (pre, post) gate lists; the
# exponential then conjugates a single RZ: exp(-i a P) = V' RZ(2a) V.
# SX RZ(pi/2) SX equals the Hadamard exactly (no global phase), so both
# conjugations below are exact inverse pairs built from native gates only.
def _basis_change(letter: str, q: int) -> tuple[list[Gate], list[Gate]]:
    half = math.pi / 2
    hadamard = [Gate("sx", (q,)), Gate("rz", (q,), half), Gate("sx", (q,))]
    if letter == "Z":
        return [], []
    if letter == "X":
        return hadamard, list(hadamard)
    # Y: V = H Sdg, realized as RZ(-pi/2) followed by the Hadamard triple.
    return (
        [Gate("rz", (q,), -half)] + hadamard,
        hadamard + [Gate("rz", (q,), half)],
    )


def _pauli_exponential_gates(term: PauliString, angle: float) -> list[Gate]:
    if abs(term.coefficient.imag) > 1e-12:
        raise ValueError(f"coefficient {term.coefficient} is not real")
    active = [(q, c) for q, c in enumerate(term.letters) if c != "I"]
    if not active:
        raise ValueError("identity string exponentiates to a global phase; fold it out")
    pre: list[Gate] = []
    post: list[Gate] = []
    for q, c in active:
        p, u = _basis_change(c, q)
        pre.extend(p)
        post = u + post
    qs = [q for q, _ in active]
    stair = [Gate("cx", (qs[i], qs[i + 1])) for i in range(len(qs) - 1)]
    rz = Gate("rz", (qs[-1],), 2.0 * angle * term.coefficient.real)
    return pre + stair + [rz] + stair[::-1] + post


def pauli_exponential(term: PauliString, angle: float) -> Circuit:
    """Circuit realizing exp(-i angle coeff P) exactly (no phase slack)."""
    return Circuit(term.width, tuple(_pauli_exponential_gates(term, angle)))


def _trotter_gates(terms: tuple[PauliString, ...], dt: float, order: int) -> list[Gate]:
    gates: list[Gate] = []
    if order == 1:
        for t in terms:
            gates.extend(_pauli_exponential_gates(t, dt))
    elif order == 2:
        # Half-angle sweep forward, then reverse; the doubled turning-point
        # exponential is merged into a single full-angle one.
        for t in terms[:-1]:
            gates.extend(_pauli_exponential_gates(t, dt / 2))
        gates.extend(_pauli_exponential_gates(terms[-1], dt))
        for t in terms[-2::-1]:
            gates.extend(_pauli_exponential_gates(t, dt / 2))
    else:
        raise ValueError(f"unsupported product-formula order {order}")
    return gates


def trotter_step(h_terms: PauliSum, dt: float, order: int) -> Circuit:
    """One product-formula step for the given Hamiltonian terms (canonical order)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    terms = h_terms.canonicalize().terms
    if not terms:
        raise ValueError("empty Hamiltonian")
    return Circuit(h_terms.width, tuple(_trotter_gates(terms, dt, order)))


def collision_angle(gamma: float, dt: float, convention: str = PAPER_COLLISION) -> float:
    """theta = arcsin(sqrt(1 - exp(-gamma_eff dt)))."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    return math.asin(math.sqrt(1.0 - math.exp(-gamma_eff(gamma, convention) * dt)))


def _collision_gates(
    gamma: float, dt: float, spin_q: int, aux_q: int, convention: str
) -> list[Gate]:
    theta = collision_angle(gamma, dt, convention)
    return [
        Gate("cry", (spin_q, aux_q), 2.0 * theta),
        Gate("cx", (aux_q, spin_q)),
        Gate("reset", (aux_q,)),
    ]


def collision_block(
    gamma: float, dt: float, spin_q: int, aux_q: int, convention: str = PAPER_COLLISION
) -> Circuit:
    """One collision: CRY(2 theta) spin->aux, CX aux->spin, reset of the aux."""
    width = max(spin_q, aux_q) + 1
    return Circuit(width, tuple(_collision_gates(gamma, dt, spin_q, aux_q, convention)))


def evolution_layout(params: ModelParams) -> tuple[tuple[str, ...], tuple[int, ...], tuple[int, ...]]:
    """Roles, model->circuit map, and per-spin aux indices for the assembled circuit.

    One spin: [bosons..., spin, aux]; two spins: [aux1, spin1, bosons...,
    spin2, aux2], i.e. auxiliaries sit at the circuit edges next to their
    spins.
    """
    nb = params.n_boson_qubits
    if params.n_spins == 1:
        roles = (ROLE_BOSON,) * nb + (ROLE_SPIN, ROLE_AUX)
        model_register = (nb,) + tuple(range(nb))
        aux_for_spin = (nb + 1,)
    elif params.n_spins == 2:
        roles = (ROLE_AUX, ROLE_SPIN) + (ROLE_BOSON,) * nb + (ROLE_SPIN, ROLE_AUX)
        model_register = (1,) + tuple(range(2, 2 + nb)) + (2 + nb,)
        aux_for_spin = (0, 3 + nb)
    else:
        raise ValueError("assembled circuits support one or two spins")
    return roles, model_register, aux_for_spin


def assemble_evolution(
    params: ModelParams,
    spec: InitialStateSpec,
    n_steps: int,
    dt: float,
    order: int = 2,
    code_kind: str = GRAY,
    convention: str = PAPER_COLLISION,
) -> Circuit:
    """Full evolution circuit: preparation, n_steps of [unitary; collisions], measurement.

    Collisions are omitted entirely for gamma = 0, where the run is a plain
    Hamiltonian simulation.  A barrier follows the preparation and every
    step, so the marked states align with the reference grid t = k dt.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    roles, model_register, aux_for_spin = evolution_layout(params)
    width = len(roles)
    gates: list[Gate] = []

    # State preparation: X on excited spins and on the 1-bits of the code
    # word of the initial oscillator level.
    if len(spec.spin_states) != params.n_spins:
        raise ValueError("one spin state flag per spin required")
    for flag, model_pos in zip(spec.spin_states, params.spin_positions):
        if flag == SPIN_UP:
            gates.append(Gate("x", (model_register[model_pos],)))
    code = BitCode(code_kind, TruncationSpec(params.d_ho).n_qubits)
    if spec.boson_level >= params.d_ho:
        raise ValueError(f"boson level {spec.boson_level} out of range")
    for bit, model_pos in zip(code_bits(spec.boson_level, code), params.boson_positions):
        if bit:
            gates.append(Gate("x", (model_register[model_pos],)))
    gates.append(Gate("barrier"))

    if n_steps > 0:
        h_sum = hamiltonian_sum(params, code_kind)
        step_gates = [
            _remap(g, model_register) for g in _trotter_gates(h_sum.canonicalize().terms, dt, order)
        ]
        for _ in range(n_steps):
            gates.extend(step_gates)
            if params.gamma > 0:
                for model_pos, aux_q in zip(params.spin_positions, aux_for_spin):
                    gates.extend(
                        _collision_gates(
                            params.gamma, dt, model_register[model_pos], aux_q, convention
                        )
                    )
            gates.append(Gate("barrier"))

    for q, role in enumerate(roles):
        if role != ROLE_AUX:
            gates.append(Gate("measure", (q,)))
    return Circuit(width, tuple(gates), roles, model_register)


def _remap(gate: Gate, mapping: tuple[int, ...]) -> Gate:
    return Gate(gate.kind, tuple(mapping[q] for q in gate.qubits), gate.angle)
