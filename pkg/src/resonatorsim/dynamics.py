"""Time evolution: unitary propagation, damped (Lindblad) propagation, and
the reduced amplitude equations of the bus-eliminated model.

The Lindblad integrator advances a whole batch of density matrices in one
fixed-step fourth-order Runge-Kutta sweep.  The generator conserves the
trace identically, so a drifting trace flags an implementation or stability
problem rather than ordinary discretization error; it is checked at every
output time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: target phase advance per integration step, h * ||generator||
_STEP_PHASE = 0.05
#: minimum number of sub-steps across the full span
_MIN_STEPS = 4000
#: phase advance per step for the reduced amplitude equations (kept smaller
#: so norm drift stays well under the conservation tolerance)
_AMP_STEP_PHASE = 0.02

_TRACE_TOL = 1.0e-8
_NORM_TOL = 1.0e-8


class PropagationError(RuntimeError):
    """Raised when an integration violates a conservation invariant."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform output grid over [t_start, t_end] in us."""

    t_start: float
    t_end: float
    points: int

    def __post_init__(self):
        if self.points < 2:
            raise ValueError(f"need at least 2 grid points, got {self.points}")
        if not self.t_end > self.t_start:
            raise ValueError(
                f"t_end must exceed t_start, got [{self.t_start}, {self.t_end}]"
            )

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.points)

    @property
    def span(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Output times and the states sampled at them.

    states has shape (T, d) for state vectors, (T, d, d) for single density
    matrices, or (T, B, d, d) for a batch.
    """

    times: np.ndarray
    states: np.ndarray


def evolve_unitary(h: np.ndarray, psi0: np.ndarray, grid: TimeGrid) -> Trajectory:
    """Propagate a state vector under a constant Hamiltonian by
    diagonalization; exact up to the eigensolver."""
    h = np.asarray(h)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (h.shape[0],):
        raise ValueError(f"state shape {psi0.shape} does not match dim {h.shape[0]}")
    evals, vecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    c0 = vecs.conj().T @ psi0
    phases = np.exp(-1j * np.outer(grid.times, evals))
    states = (phases * c0) @ vecs.T
    return Trajectory(grid.times, states)


def evolve_lindblad_batch(
    h: np.ndarray,
    collapse,
    rho0: np.ndarray,
    grid: TimeGrid,
) -> Trajectory:
    """Integrate d rho/dt = -i[h, rho] + sum_k kappa_k D[xi_k] rho for a batch.

    Parameters
    ----------
    h : Hamiltonian, shape (d, d) shared or (B, d, d) per batch entry
    collapse : sequence of (rate, op) pairs; rate is a scalar or shape (B,)
        array in 1/us, op is a (d, d) matrix
    rho0 : initial density matrices, shape (B, d, d)
    grid : output times

    Returns a Trajectory with states of shape (T, B, d, d).
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.ndim != 3 or rho0.shape[1] != rho0.shape[2]:
        raise ValueError(f"rho0 must have shape (B, d, d), got {rho0.shape}")
    nbatch, dim = rho0.shape[0], rho0.shape[1]
    h = np.asarray(h, dtype=complex)
    if h.shape == (dim, dim):
        h = np.broadcast_to(h, (nbatch, dim, dim))
    elif h.shape != (nbatch, dim, dim):
        raise ValueError(f"h must have shape ({dim},{dim}) or ({nbatch},{dim},{dim})")

    drift = -1j * h.copy()
    jumps = []
    for rate, op in collapse:
        op = np.asarray(op, dtype=complex)
        if op.shape != (dim, dim):
            raise ValueError(f"collapse operator shape {op.shape} does not match dim {dim}")
        rate = np.broadcast_to(np.asarray(rate, dtype=float), (nbatch,))
        if np.any(rate < 0):
            raise ValueError("collapse rates must be nonnegative")
        if np.all(rate == 0.0):
            continue
        drift = drift - 0.5 * rate[:, None, None] * (op.conj().T @ op)[None, :, :]
        jumps.append(np.sqrt(rate)[:, None, None] * op[None, :, :])
    jump = np.stack(jumps) if jumps else None
    drift_dag = drift.conj().swapaxes(-1, -2)

    def rhs(rho):
        out = drift @ rho + rho @ drift_dag
        if jump is not None:
            tmp = jump @ rho
            out = out + (tmp @ jump.conj().swapaxes(-1, -2)).sum(axis=0)
        return out

    scale = float(np.max(np.linalg.svd(drift, compute_uv=False))) * 2.0
    if jump is not None:
        scale += float(np.sum(np.max(np.linalg.svd(jump, compute_uv=False) ** 2, axis=1)))
    h_max = grid.span / _MIN_STEPS
    if scale > 0:
        h_max = min(h_max, _STEP_PHASE / scale)

    trace0 = np.einsum("bii->b", rho0).real
    out = np.empty((grid.points,) + rho0.shape, dtype=complex)
    out[0] = rho0
    rho = rho0.copy()
    times = grid.times
    for k in range(grid.points - 1):
        dt = times[k + 1] - times[k]
        n_sub = max(1, math.ceil(dt / h_max))
        step = dt / n_sub
        for _ in range(n_sub):
            k1 = rhs(rho)
            k2 = rhs(rho + 0.5 * step * k1)
            k3 = rhs(rho + 0.5 * step * k2)
            k4 = rhs(rho + step * k3)
            rho = rho + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            rho = 0.5 * (rho + rho.conj().swapaxes(-1, -2))
        trace = np.einsum("bii->b", rho).real
        worst = float(np.max(np.abs(trace - trace0)))
        if worst > _TRACE_TOL * (1.0 + float(np.max(np.abs(trace0)))):
            raise PropagationError(
                f"trace drifted by {worst:.3e} at t = {times[k + 1]:.6g} us"
            )
        out[k + 1] = rho
    return Trajectory(times, out)


def evolve_lindblad(h: np.ndarray, collapse, rho0: np.ndarray, grid: TimeGrid) -> Trajectory:
    """Single-system wrapper around evolve_lindblad_batch; states (T, d, d)."""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.ndim != 2:
        raise ValueError(f"rho0 must be a square matrix, got shape {rho0.shape}")
    traj = evolve_lindblad_batch(h, collapse, rho0[None, :, :], grid)
    return Trajectory(traj.times, traj.states[:, 0])


def integrate_amplitudes(model, c0: np.ndarray, grid: TimeGrid) -> Trajectory:
    """Reduced single-photon amplitudes of the bus-eliminated model.

    Solves i dc_j/dt = sum_k chi_jk exp(i delta_jk t) c_k, the rotating-frame
    form of the effective hopping model that remains valid when Lamb-shifted
    frequencies differ.  Norm conservation is checked at every output time.
    """
    c0 = np.asarray(c0, dtype=complex)
    if c0.shape != (model.n,):
        raise ValueError(f"c0 must have shape ({model.n},), got {c0.shape}")
    chi = model.chi
    delta = model.delta_ij
    scale = float(np.linalg.norm(chi, 2) + np.max(np.abs(delta)))
    h_max = grid.span / 2000
    if scale > 0:
        h_max = min(h_max, _AMP_STEP_PHASE / scale)

    def rhs(t, c):
        m = chi * np.exp(1j * delta * t)
        return -1j * (m @ c)

    norm0 = float(np.linalg.norm(c0))
    out = np.empty((grid.points, model.n), dtype=complex)
    out[0] = c0
    c = c0.copy()
    times = grid.times
    for k in range(grid.points - 1):
        t = times[k]
        dt = times[k + 1] - times[k]
        n_sub = max(1, math.ceil(dt / h_max))
        step = dt / n_sub
        for _ in range(n_sub):
            k1 = rhs(t, c)
            k2 = rhs(t + 0.5 * step, c + 0.5 * step * k1)
            k3 = rhs(t + 0.5 * step, c + 0.5 * step * k2)
            k4 = rhs(t + step, c + step * k3)
            c = c + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += step
        drift = abs(float(np.linalg.norm(c)) - norm0)
        if drift > _NORM_TOL * (1.0 + norm0):
            raise PropagationError(
                f"amplitude norm drifted by {drift:.3e} at t = {times[k + 1]:.6g} us"
            )
        out[k + 1] = c
    return Trajectory(times, out)
