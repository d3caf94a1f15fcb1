"""Per-gate noise channels derived from device calibration data.

Every native gate carries thermal relaxation (acting for the gate's
duration) followed by a depolarizing channel whose probability is solved
backwards so the composition reproduces the calibrated average gate
infidelity.  Readout error is an independent per-qubit bit flip before a
noiseless measurement.  A noise factor xi in [0, 1] scales gate
infidelities, gate times, and false-readout probabilities uniformly,
leaving T1/T2 untouched; this keeps the thermal-to-depolarizing ratio of
the model approximately unchanged.

Thermal relaxation with T2 <= T1 is a probabilistic mixture (identity,
phase flip, reset to the ground state); with T1 < T2 <= 2 T1 it only has a
Choi-matrix description.  Qubit temperature is fixed at zero, so qubit
frequency never enters.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .metrics import fidelity

CPTP_TOL = 1e-10

_I2 = np.eye(2, dtype=complex)
_PAULIS_1Q = (
    _I2,
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


# ---------------------------------------------------------------------------
# calibration data


@dataclass(frozen=True)
class QubitCalibration:
    t1_us: float
    t2_us: float
    freq_ghz: float
    p10: float  # P(read 1 | prepared 0)
    p01: float  # P(read 0 | prepared 1)

    def __post_init__(self) -> None:
        if self.t1_us <= 0 or not 0 < self.t2_us <= 2 * self.t1_us:
            raise ValueError(f"unphysical relaxation times T1={self.t1_us}, T2={self.t2_us}")
        for p in (self.p10, self.p01):
            if not 0 <= p <= 1:
                raise ValueError(f"readout probability {p} outside [0, 1]")


@dataclass(frozen=True)
class GateCalibration:
    kind: str
    qubits: tuple[int, ...] | None  # None = applies to any operands
    error: float
    time_ns: float

    def __post_init__(self) -> None:
        if self.qubits is not None:
            object.__setattr__(self, "qubits", tuple(self.qubits))
        if not 0 <= self.error <= 1:
            raise ValueError(f"gate error {self.error} outside [0, 1]")
        if self.time_ns < 0:
            raise ValueError("gate time must be nonnegative")


@dataclass(frozen=True)
class CalibrationData:
    qubits: tuple[QubitCalibration, ...]
    gates: tuple[GateCalibration, ...]

    def gate_entry(self, kind: str, qubits: tuple[int, ...] | None = None) -> GateCalibration:
        if qubits is not None:
            for g in self.gates:
                if g.kind == kind and g.qubits == tuple(qubits):
                    return g
        for g in self.gates:
            if g.kind == kind and g.qubits is None:
                return g
        raise KeyError(f"no calibration entry for {kind} on {qubits}")

    def mean_qubit(self) -> QubitCalibration:
        return QubitCalibration(
            float(np.mean([q.t1_us for q in self.qubits])),
            float(np.mean([q.t2_us for q in self.qubits])),
            float(np.mean([q.freq_ghz for q in self.qubits])),
            float(np.mean([q.p10 for q in self.qubits])),
            float(np.mean([q.p01 for q in self.qubits])),
        )


def load_calibration(path) -> CalibrationData:
    with open(path) as fh:
        doc = json.load(fh)
    return _calibration_from_dict(doc)


def jakarta_average_calibration() -> CalibrationData:
    """Bundled device averages (processor-wide means of the published calibration)."""
    text = resources.files("sbsim").joinpath("data/jakarta-avg.json").read_text()
    return _calibration_from_dict(json.loads(text))


def _calibration_from_dict(doc: dict) -> CalibrationData:
    try:
        qubits = tuple(
            QubitCalibration(q["t1_us"], q["t2_us"], q.get("freq_ghz", 0.0), q["p10"], q["p01"])
            for q in doc["qubits"]
        )
        gates = tuple(
            GateCalibration(
                g["kind"],
                tuple(g["qubits"]) if g.get("qubits") is not None else None,
                g["error"],
                g["time_ns"],
            )
            for g in doc["gates"]
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed calibration document: {exc}") from exc
    return CalibrationData(qubits, gates)


def scale_calibration(cal: CalibrationData, xi: float) -> CalibrationData:
    """Scale gate infidelity, gate time, and readout flip probabilities by xi."""
    if not 0 <= xi <= 1:
        raise ValueError(f"noise factor {xi} outside [0, 1]")
    qubits = tuple(replace(q, p10=xi * q.p10, p01=xi * q.p01) for q in cal.qubits)
    gates = tuple(replace(g, error=xi * g.error, time_ns=xi * g.time_ns) for g in cal.gates)
    return CalibrationData(qubits, gates)


# ---------------------------------------------------------------------------
# quantum channels


@dataclass(frozen=True)
class QuantumChannel:
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kraus", tuple(np.asarray(k, dtype=complex) for k in self.kraus))

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.dim)))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho, dtype=complex)
        for k in self.kraus:
            out += k @ rho @ k.conj().T
        return out

    def choi(self) -> np.ndarray:
        """Choi matrix with the input factor first: C = sum |i><j| x E(|i><j|)."""
        d = self.dim
        out = np.zeros((d * d, d * d), dtype=complex)
        for k in self.kraus:
            v = k.T.reshape(-1)  # v[i*d + o] = K[o, i]
            out += np.outer(v, v.conj())
        return out

    @classmethod
    def from_choi(cls, choi: np.ndarray, eig_floor: float = -1e-10) -> "QuantumChannel":
        d = int(round(math.sqrt(choi.shape[0])))
        vals, vecs = np.linalg.eigh((choi + choi.conj().T) / 2)
        if vals.min() < eig_floor:
            raise ValueError(f"Choi matrix not positive semidefinite (min eig {vals.min():.2e})")
        kraus = []
        for val, vec in zip(vals, vecs.T):
            if val > 1e-14:
                kraus.append(math.sqrt(val) * vec.reshape(d, d).T)
        return cls(tuple(kraus))

    def then(self, other: "QuantumChannel") -> "QuantumChannel":
        """Composition: self first, then other."""
        return QuantumChannel(tuple(b @ a for a in self.kraus for b in other.kraus))

    def tensor(self, other: "QuantumChannel") -> "QuantumChannel":
        return QuantumChannel(tuple(np.kron(a, b) for a in self.kraus for b in other.kraus))

    def compressed(self) -> "QuantumChannel":
        """Minimal Kraus set (at most dim^2 operators) via the Choi eigenbasis."""
        return QuantumChannel.from_choi(self.choi())

    def is_cptp(self, tol: float = CPTP_TOL) -> bool:
        total = sum(k.conj().T @ k for k in self.kraus)
        return bool(np.max(np.abs(total - np.eye(self.dim))) <= tol)


def identity_channel(n_qubits: int = 1) -> QuantumChannel:
    return QuantumChannel((np.eye(2**n_qubits, dtype=complex),))


def thermal_relaxation_channel(
    t1: float, t2: float, t_gate: float, excited_population: float = 0.0
) -> QuantumChannel:
    """Single-qubit thermal relaxation acting for ``t_gate`` (same unit as T1/T2).

    For T2 <= T1 the channel is the mixture {identity, phase flip, reset}
    with p_reset = 1 - exp(-t/T1) and
    p_z = (1 - p_reset)(1 - exp(-t (1/T2 - 1/T1)))/2; for T1 < T2 <= 2 T1 it
    is built from its Choi matrix with coherence factor exp(-t/T2).
    """
    if t1 <= 0 or t2 <= 0:
        raise ValueError("relaxation times must be positive")
    if t2 > 2 * t1:
        raise ValueError(f"T2={t2} > 2 T1={2 * t1} is unphysical")
    if excited_population != 0.0:
        raise ValueError("only zero-temperature relaxation is modeled")
    if t_gate < 0:
        raise ValueError("gate time must be nonnegative")
    if t_gate == 0:
        return identity_channel(1)

    p_reset = 1.0 - math.exp(-t_gate / t1)
    if t2 <= t1:
        p_z = (1.0 - p_reset) * (1.0 - math.exp(-t_gate * (1.0 / t2 - 1.0 / t1))) / 2.0
        p_id = 1.0 - p_z - p_reset
        kraus = (
            math.sqrt(p_id) * _I2,
            math.sqrt(p_z) * _PAULIS_1Q[3],
            math.sqrt(p_reset) * np.array([[1, 0], [0, 0]], dtype=complex),
            math.sqrt(p_reset) * np.array([[0, 1], [0, 0]], dtype=complex),
        )
        return QuantumChannel(kraus)

    p_t2 = math.exp(-t_gate / t2)
    choi = np.array(
        [
            [1, 0, 0, p_t2],
            [0, 0, 0, 0],
            [0, 0, p_reset, 0],
            [p_t2, 0, 0, 1 - p_reset],
        ],
        dtype=complex,
    )
    return QuantumChannel.from_choi(choi)


def depolarizing_channel(p: float, n_qubits: int) -> QuantumChannel:
    """E(rho) = (1 - p) rho + p I/d, written with uniform Pauli Kraus operators."""
    if not 0 <= p <= 1:
        raise ValueError(f"depolarizing probability {p} outside [0, 1]")
    d2 = 4**n_qubits
    paulis = [_kron_all(c) for c in itertools.product(_PAULIS_1Q, repeat=n_qubits)]
    kraus = [math.sqrt(1.0 - p * (d2 - 1) / d2) * paulis[0]]
    kraus += [math.sqrt(p / d2) * m for m in paulis[1:]]
    return QuantumChannel(tuple(kraus))


def _kron_all(mats) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def process_fidelity(channel: QuantumChannel, target: np.ndarray | None = None) -> float:
    """State fidelity between the normalized Choi matrices of channel and target unitary."""
    if not channel.is_cptp():
        raise ValueError("channel is not CPTP")
    d = channel.dim
    target_u = np.eye(d, dtype=complex) if target is None else np.asarray(target, dtype=complex)
    if target_u.shape != (d, d):
        raise ValueError("target dimension mismatch")
    v = target_u.T.reshape(-1)
    target_choi = np.outer(v, v.conj())
    return fidelity(channel.choi() / d, target_choi / d)


def average_gate_fidelity(channel: QuantumChannel, target: np.ndarray | None = None) -> float:
    """Haar-averaged gate fidelity, (d F_pro + 1) / (d + 1)."""
    d = channel.dim
    return (d * process_fidelity(channel, target) + 1.0) / (d + 1.0)


def depolarizing_probability(
    target_gate_infidelity: float, thermal: QuantumChannel
) -> float:
    """Back-solve p_D so depolarizing-after-thermal hits the calibrated gate error.

    p_D = d (F_T - F_gate) / (d F_T - 1).  A negative solution means the
    thermal channel alone already exceeds the error budget; it is clamped
    to zero with a warning so scaled calibrations remain usable.
    """
    d = thermal.dim
    f_thermal = average_gate_fidelity(thermal)
    f_gate = 1.0 - target_gate_infidelity
    p = d * (f_thermal - f_gate) / (d * f_thermal - 1.0)
    if -1e-9 < p < 0:  # numerically zero
        return 0.0
    if p < 0:
        warnings.warn(
            f"thermal infidelity {1 - f_thermal:.3e} exceeds gate error "
            f"{target_gate_infidelity:.3e}; depolarizing probability clamped to 0",
            stacklevel=2,
        )
        return 0.0
    if p > 1:
        raise ValueError(f"depolarizing probability {p:.3f} > 1; calibration inconsistent")
    return p


# ---------------------------------------------------------------------------
# assembled noise model


@dataclass(frozen=True)
class NoiseModel:
    """Per-(gate kind, operands) channels plus per-qubit readout confusion matrices."""

    channels: dict
    readout: tuple[np.ndarray, ...]
    xi: float

    def channel_for(self, kind: str, qubits: tuple[int, ...]) -> QuantumChannel:
        key = (kind, tuple(qubits))
        if key in self.channels:
            return self.channels[key]
        wildcard = (kind, None)
        if wildcard in self.channels:
            return self.channels[wildcard]
        raise KeyError(f"no noise channel for {kind} on {qubits}")

    def confusion_matrix(self, qubit: int) -> np.ndarray:
        return self.readout[qubit]

    def confusion_matrices(self, qubits) -> list[np.ndarray]:
        return [self.readout[q] for q in qubits]


def build_noise_model(cal: CalibrationData, xi: float = 1.0) -> NoiseModel:
    """Compose thermal relaxation then depolarizing per gate entry, scaled by xi.

    Two-qubit thermal error is the tensor product of the operands'
    single-qubit channels.  Wildcard gate entries use the processor-average
    qubit parameters.
    """
    scaled = scale_calibration(cal, xi)
    mean_q = scaled.mean_qubit()
    channels = {}
    for entry in scaled.gates:
        n_q = 2 if entry.kind == "cx" else 1
        if entry.qubits is None:
            qcals = [mean_q] * n_q
        else:
            if len(entry.qubits) != n_q:
                raise ValueError(f"{entry.kind} entry with {len(entry.qubits)} operands")
            qcals = [scaled.qubits[q] for q in entry.qubits]
        t_us = entry.time_ns * 1e-3
        singles = [thermal_relaxation_channel(qc.t1_us, qc.t2_us, t_us) for qc in qcals]
        thermal = singles[0] if n_q == 1 else singles[0].tensor(singles[1])
        p_depol = depolarizing_probability(entry.error, thermal)
        channel = thermal.then(depolarizing_channel(p_depol, n_q)).compressed()
        if not channel.is_cptp():
            raise RuntimeError(f"constructed channel for {entry.kind} is not CPTP")
        channels[(entry.kind, entry.qubits)] = channel
    readout = tuple(
        np.array([[1 - q.p10, q.p10], [q.p01, 1 - q.p01]]) for q in scaled.qubits
    )
    return NoiseModel(channels, readout, xi)


def error_source_ratio(cal: CalibrationData, kinds: tuple[str, ...] = ("cx", "sx", "x")) -> float:
    """Device-level thermal/depolarizing infidelity ratio, averaged per kind.

    Virtual gates (zero duration and zero error) are skipped.
    """
    mean_q = cal.mean_qubit()
    per_kind = []
    for kind in kinds:
        ratios = []
        for entry in cal.gates:
            if entry.kind != kind or (entry.time_ns == 0 and entry.error == 0):
                continue
            n_q = 2 if kind == "cx" else 1
            qcals = [mean_q] * n_q if entry.qubits is None else [cal.qubits[q] for q in entry.qubits]
            t_us = entry.time_ns * 1e-3
            singles = [thermal_relaxation_channel(qc.t1_us, qc.t2_us, t_us) for qc in qcals]
            thermal = singles[0] if n_q == 1 else singles[0].tensor(singles[1])
            i_thermal = 1.0 - average_gate_fidelity(thermal)
            i_depol = entry.error - i_thermal
            if i_depol <= 0:
                raise ValueError(f"thermal error exceeds calibrated error for {kind}")
            ratios.append(i_thermal / i_depol)
        if ratios:
            per_kind.append(float(np.mean(ratios)))
    if not per_kind:
        raise ValueError("no non-virtual gate entries among requested kinds")
    return float(np.mean(per_kind))
