"""Density-matrix execution engine.

Applies gate unitaries, per-gate noise channels, resets, and measurement
sampling on registers of up to six qubits (dense 64 x 64 states).  States
marked by barriers are reduced to the spin+boson register (auxiliaries
traced out) whenever the circuit carries a model-register map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit

MAX_SIM_WIDTH = 6
_TRACE_TOL = 1e-9

_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
_RESET_KRAUS = (
    np.array([[1, 0], [0, 0]], dtype=complex),
    np.array([[0, 1], [0, 0]], dtype=complex),
)


def _ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _controlled(op: np.ndarray) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = op
    return out


def gate_unitary(kind: str, angle: float | None = None) -> np.ndarray:
    """Matrix of a unitary gate kind; control is the first operand of 2q gates."""
    if kind == "x":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind == "sx":
        return _SX.copy()
    if kind == "id":
        return np.eye(2, dtype=complex)
    if kind == "rz":
        return _rz(angle)
    if kind == "ry":
        return _ry(angle)
    if kind == "cx":
        return _controlled(np.array([[0, 1], [1, 0]], dtype=complex))
    if kind == "cry":
        return _controlled(_ry(angle))
    raise ValueError(f"gate kind {kind!r} has no unitary")


def embed_operator(op: np.ndarray, qubits: tuple[int, ...], width: int) -> np.ndarray:
    """Expand a k-qubit operator to the full register (qubit 0 leftmost)."""
    k = len(qubits)
    if op.shape != (2**k, 2**k):
        raise ValueError("operator shape does not match operand count")
    rest = [q for q in range(width) if q not in qubits]
    full = np.kron(op, np.eye(2 ** (width - k), dtype=complex))
    order = list(qubits) + rest
    perm = [order.index(q) for q in range(width)]
    tensor = full.reshape((2,) * (2 * width))
    tensor = tensor.transpose(perm + [width + p for p in perm])
    return np.ascontiguousarray(tensor.reshape(2**width, 2**width))


def partial_trace(rho: np.ndarray, keep: tuple[int, ...], width: int) -> np.ndarray:
    """Reduced state on ``keep``, reordered to the order given there."""
    tensor = rho.reshape((2,) * (2 * width))
    kept = set(keep)
    in_sub = list(range(width)) + [width + q if q in kept else q for q in range(width)]
    out_sub = [q for q in keep] + [width + q for q in keep]
    reduced = np.einsum(tensor, in_sub, out_sub)
    dim = 2 ** len(keep)
    return reduced.reshape(dim, dim)


def ground_state(width: int) -> np.ndarray:
    rho = np.zeros((2**width, 2**width), dtype=complex)
    rho[0, 0] = 1.0
    return rho


@dataclass
class SimulationResult:
    """States at each barrier (model register if mapped) and the final full state."""

    snapshots: list[np.ndarray]
    final: np.ndarray


def simulate(circuit: Circuit, noise=None, rho0: np.ndarray | None = None) -> SimulationResult:
    """Run the circuit, applying the noise model's channel after each native gate.

    With a noise model the circuit must be native (no ry/cry); channels are
    applied on the gate operands right after the ideal unitary, and resets
    stay ideal.  Barriers record snapshots.
    """
    width = circuit.width
    if width > MAX_SIM_WIDTH:
        raise ValueError(f"register width {width} exceeds the dense engine limit {MAX_SIM_WIDTH}")
    rho = ground_state(width) if rho0 is None else rho0.astype(complex).copy()
    if rho.shape != (2**width, 2**width):
        raise ValueError("initial state does not match the register")

    unitary_cache: dict[tuple, np.ndarray] = {}
    kraus_cache: dict[tuple, list[np.ndarray]] = {}
    snapshots: list[np.ndarray] = []

    def full_unitary(kind, qubits, angle):
        key = (kind, qubits, angle)
        if key not in unitary_cache:
            unitary_cache[key] = embed_operator(gate_unitary(kind, angle), qubits, width)
        return unitary_cache[key]

    def full_kraus(kind, qubits):
        key = (kind, qubits)
        if key not in kraus_cache:
            channel = noise.channel_for(kind, qubits)
            kraus_cache[key] = [embed_operator(k, qubits, width) for k in channel.kraus]
        return kraus_cache[key]

    for g in circuit.gates:
        if g.kind == "barrier":
            snapshots.append(_snapshot(rho, circuit))
            continue
        if g.kind == "measure":
            continue
        if g.kind == "reset":
            ks = [embed_operator(k, g.qubits, width) for k in _RESET_KRAUS]
            rho = sum(k @ rho @ k.conj().T for k in ks)
            continue
        if noise is not None and g.kind in ("ry", "cry"):
            raise ValueError("noisy simulation requires a native circuit; transpile first")
        u = full_unitary(g.kind, g.qubits, g.angle)
        rho = u @ rho @ u.conj().T
        if noise is not None:
            out = np.zeros_like(rho)
            for k in full_kraus(g.kind, g.qubits):
                out += k @ rho @ k.conj().T
            rho = out
            drift = abs(np.trace(rho).real - 1.0)
            if drift > _TRACE_TOL:
                raise RuntimeError(f"trace drift {drift:.2e} after {g.kind}; engine invariant broken")
    return SimulationResult(snapshots, rho)


def _snapshot(rho: np.ndarray, circuit: Circuit) -> np.ndarray:
    if circuit.model_register is None:
        return rho.copy()
    return partial_trace(rho, circuit.model_register, circuit.width)


@dataclass
class CountsTable:
    counts: dict[str, int]
    shots: int

    def vector(self, n_bits: int) -> np.ndarray:
        out = np.zeros(2**n_bits)
        for key, n in self.counts.items():
            out[int(key, 2)] = n
        return out


def sample_counts(
    rho: np.ndarray,
    shots: int,
    readout: list[np.ndarray] | None = None,
    seed: int | None = None,
    qubits: tuple[int, ...] | None = None,
) -> CountsTable:
    """Multinomial sampling from diag(rho), optionally through per-qubit confusion matrices.

    ``readout`` matrices are row-stochastic, M[m, n] = P(record n | true m),
    one per measured qubit in the order of ``qubits``.
    """
    if shots < 1:
        raise ValueError("need at least one shot")
    width = int(round(math.log2(rho.shape[0])))
    if qubits is None:
        qubits = tuple(range(width))
    marginal = rho if qubits == tuple(range(width)) else partial_trace(rho, qubits, width)
    probs = np.clip(np.diag(marginal).real, 0.0, None)
    probs = probs / probs.sum()
    if readout is not None:
        probs = probs @ _joint_confusion(readout)
    rng = np.random.default_rng(seed)
    drawn = rng.multinomial(shots, probs)
    n_bits = len(qubits)
    counts = {format(i, f"0{n_bits}b"): int(c) for i, c in enumerate(drawn) if c > 0}
    return CountsTable(counts, shots)


def _joint_confusion(mats: list[np.ndarray]) -> np.ndarray:
    joint = np.array([[1.0]])
    for m in mats:
        joint = np.kron(joint, m)
    return joint


def mitigate_readout(
    counts: CountsTable, confusions: list[np.ndarray], project: bool = False
) -> np.ndarray:
    """Invert the tensor-product confusion matrix on the empirical distribution.

    Returns a quasi-probability vector (entries may be slightly negative);
    with ``project`` the result is replaced by its nearest point on the
    probability simplex.
    """
    n_bits = len(confusions)
    freq = counts.vector(n_bits) / counts.shots
    joint = _joint_confusion(confusions)
    quasi = np.linalg.solve(joint.T, freq)
    return _project_simplex(quasi) if project else quasi


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u)
    idx = np.arange(1, len(v) + 1)
    feasible = u + (1.0 - cumulative) / idx > 0
    rho_idx = int(np.nonzero(feasible)[0][-1])
    tau = (1.0 - cumulative[rho_idx]) / (rho_idx + 1)
    return np.clip(v + tau, 0.0, None)
