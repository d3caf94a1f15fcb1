"""Exact reference evolution of the Markovian master equation.

Fixed-step RK4 on the vectorized (column-stacked) Liouvillian; the system
dimension never exceeds 2^5 here, stiffness is mild at the studied
parameters, and a fixed step keeps golden tests deterministic.  The state
is re-symmetrized after every internal step and trace/Hermiticity drift is
monitored against hard tolerances.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .encoding import GRAY
from .metrics import fidelity
from .model import PAPER_COLLISION, ModelParams, dense_hamiltonian, lindblad_operators

log = logging.getLogger(__name__)

TRACE_TOL = 1e-6
HERM_TOL = 1e-8
_REFINE_TOL = 1e-8
_MAX_REFINEMENTS = 8


@dataclass(frozen=True)
class TrajectorySnapshot:
    t: float
    rho: np.ndarray


def liouvillian(h: np.ndarray, jump_ops: list[tuple[np.ndarray, float]]) -> np.ndarray:
    """Column-stacked generator of drho/dt = -i[H,rho] + sum_k r_k D[L_k](rho)."""
    dim = h.shape[0]
    eye = np.eye(dim, dtype=complex)
    gen = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for op, rate in jump_ops:
        anti = op.conj().T @ op
        gen += rate * (
            np.kron(op.conj(), op)
            - 0.5 * np.kron(eye, anti)
            - 0.5 * np.kron(anti.T, eye)
        )
    return gen


@lru_cache(maxsize=32)
def _liouvillian_for(params: ModelParams, convention: str, code_kind: str) -> np.ndarray:
    h = dense_hamiltonian(params, code_kind)
    jumps = lindblad_operators(params, convention) if params.gamma > 0 else []
    return liouvillian(h, jumps)


def _integrate(gen: np.ndarray, rho0: np.ndarray, t_grid, max_step: float) -> list[np.ndarray]:
    dim = rho0.shape[0]
    rho = rho0.astype(complex).copy()
    states = [rho.copy()]
    worst_herm = 0.0
    for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
        n_sub = max(1, int(np.ceil((t1 - t0) / max_step)))
        h = (t1 - t0) / n_sub
        vec = rho.flatten(order="F")
        for _ in range(n_sub):
            k1 = gen @ vec
            k2 = gen @ (vec + 0.5 * h * k1)
            k3 = gen @ (vec + 0.5 * h * k2)
            k4 = gen @ (vec + h * k3)
            vec = vec + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            mat = vec.reshape((dim, dim), order="F")
            herm_drift = np.max(np.abs(mat - mat.conj().T))
            worst_herm = max(worst_herm, herm_drift)
            if herm_drift > HERM_TOL:
                raise RuntimeError(f"Hermiticity drift {herm_drift:.2e} exceeds {HERM_TOL}")
            mat = (mat + mat.conj().T) / 2
            trace_drift = abs(np.trace(mat).real - 1.0)
            if trace_drift > TRACE_TOL:
                raise RuntimeError(f"trace drift {trace_drift:.2e}; integrator step too coarse")
            vec = mat.flatten(order="F")
        rho = vec.reshape((dim, dim), order="F")
        states.append(rho.copy())
    if worst_herm > 1e-8:
        log.warning("Hermiticity correction reached %.2e", worst_herm)
    return states


def evolve_exact(
    rho0: np.ndarray,
    params: ModelParams,
    t_grid,
    convention: str = PAPER_COLLISION,
    code_kind: str = GRAY,
    max_step: float = 1e-3,
    refine: bool = True,
) -> list[TrajectorySnapshot]:
    """Reference states rho(t) on the given ascending time grid (t_grid[0] = 0).

    With ``refine`` the internal step is halved until another halving moves
    the final-state fidelity by less than 1e-8.
    """
    t_grid = [float(t) for t in t_grid]
    if t_grid[0] != 0.0 or any(b <= a for a, b in zip(t_grid[:-1], t_grid[1:])):
        raise ValueError("time grid must be ascending and start at 0")
    gen = _liouvillian_for(params, convention, code_kind)
    if gen.shape[0] != rho0.size:
        raise ValueError("initial state dimension does not match the model register")

    if len(t_grid) == 1:
        return [TrajectorySnapshot(0.0, rho0.astype(complex).copy())]

    states = _integrate(gen, rho0, t_grid, max_step)
    if refine:
        step = max_step
        for _ in range(_MAX_REFINEMENTS):
            finer = _integrate(gen, rho0, t_grid, step / 2)
            if 1.0 - fidelity(states[-1], finer[-1]) < _REFINE_TOL:
                states = finer
                break
            step /= 2
            states = finer
        else:
            raise RuntimeError("step refinement did not converge")
    return [TrajectorySnapshot(t, s) for t, s in zip(t_grid, states)]
