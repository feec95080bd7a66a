"""Lindblad dynamics of a perfectly blockaded ensemble.

The blockade is imposed structurally: the collective space holds the
ground state |G> and the N singly-excited states |r_i>, nothing else.
Two dissipative channels act on every atom:

* radiative decay at rate gamma2 (population returns to |G>), and
* pure dephasing at rate gamma (laser line width / technical noise),
  implemented as L rho = gamma (2 P_i rho P_i - rho P_i - P_i rho)
  with the projector P_i = |r_i><r_i|, so a single G-r coherence
  decays exactly as exp(-gamma t).

Per-atom dephasing couples the bright state to the dark single-
excitation states, which is why the full (N+1)-dimensional space is
kept instead of a two-level bright-state reduction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .dynamics import IntegrationError
from .jc_model import PoissonDist

TRACE_TOLERANCE = 1e-8

_RTOL = 1e-10
_ATOL = 1e-12


@dataclass(frozen=True)
class DecayParams:
    """Population decay gamma2 = 1/tau and pure dephasing gamma,
    both angular rates in rad/us."""

    gamma2: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.gamma2 < 0 or self.gamma < 0:
            raise ValueError("decay rates must be >= 0")


def ground_state(n_atoms: int) -> np.ndarray:
    """Density matrix |G><G| on the (N+1)-dimensional collective space."""
    rho = np.zeros((n_atoms + 1, n_atoms + 1), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def symmetric_excited_state(n_atoms: int) -> np.ndarray:
    """Density matrix of the bright state |R><R|,
    |R> = sum_i |r_i> / sqrt(N)."""
    if n_atoms < 1:
        raise ValueError("need at least one atom for an excited state")
    psi = np.zeros(n_atoms + 1, dtype=complex)
    psi[1:] = 1.0 / np.sqrt(n_atoms)
    return np.outer(psi, psi.conj())


def master_trajectory(
    n_atoms: int,
    rabi: float,
    decay: DecayParams,
    time_grid: np.ndarray,
    initial: np.ndarray | None = None,
    rtol: float = _RTOL,
    atol: float = _ATOL,
) -> np.ndarray:
    """Integrate the master equation; returns rho(t) with shape
    (n_times, N+1, N+1).

    Adaptive explicit Runge-Kutta (DOP853) on the column-stacked
    density matrix; the blockaded problem is non-stiff, so tight
    tolerances are cheap.
    """
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    t = np.asarray(time_grid, dtype=float)
    dim = n_atoms + 1
    rho0 = ground_state(n_atoms) if initial is None else np.asarray(initial, complex)
    if rho0.shape != (dim, dim):
        raise ValueError(f"initial state must have shape {(dim, dim)}")

    h = np.zeros((dim, dim))
    h[0, 1:] = rabi / 2.0
    h[1:, 0] = rabi / 2.0
    g2, gp = decay.gamma2, decay.gamma
    excited = np.arange(1, dim)

    def rhs(_t, y):
        rho = y.reshape(dim, dim)
        out = -1j * (h @ rho - rho @ h)
        if g2 > 0.0 or gp > 0.0:
            # {P_exc, rho} pieces shared by both channels
            col = rho[:, excited]
            row = rho[excited, :]
            anti = np.zeros_like(rho)
            anti[:, excited] += col
            anti[excited, :] += row
            if g2 > 0.0:
                jump = np.zeros_like(rho)
                jump[0, 0] = np.trace(rho[1:, 1:])
                out += g2 * (jump - 0.5 * anti)
            if gp > 0.0:
                dephased = np.zeros_like(rho)
                dephased[excited, excited] = rho[excited, excited]
                out += gp * (2.0 * dephased - anti)
        return out.ravel()

    sol = solve_ivp(
        rhs,
        (t[0], t[-1]),
        rho0.ravel(),
        t_eval=t,
        method="DOP853",
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise IntegrationError(f"master equation integration failed: {sol.message}")
    rhos = sol.y.T.reshape(len(t), dim, dim)

    traces = np.einsum("tii->t", rhos).real
    worst = float(np.max(np.abs(traces - 1.0)))
    if worst > TRACE_TOLERANCE:
        raise IntegrationError(
            f"trace deviated by {worst:.3e} (tolerance {TRACE_TOLERANCE:.0e})",
            worst_error=worst,
        )
    return rhos


def evolve_master(
    n_atoms: int,
    rabi: float,
    decay: DecayParams,
    time_grid: np.ndarray,
    initial: np.ndarray | None = None,
) -> np.ndarray:
    """Excited population P_e(t) = 1 - rho_GG(t) of a blockaded N-atom
    ensemble starting from |G><G| (or ``initial`` if given)."""
    rhos = master_trajectory(n_atoms, rabi, decay, time_grid, initial=initial)
    return 1.0 - rhos[:, 0, 0].real


def averaged_master_scenario(
    atom_dist: PoissonDist,
    rabi: float,
    decay: DecayParams,
    time_grid: np.ndarray,
) -> np.ndarray:
    """Poisson-weighted P_Ry(t) over N = 0..n_max.

    The N = 0 term carries its weight but contributes no excitation;
    weights are the raw truncated probabilities, matching the
    closed-form reference sums.
    """
    counts, probs = atom_dist.support()
    out = np.zeros(len(np.asarray(time_grid)))
    for n, p in zip(counts, probs):
        if n == 0:
            continue
        out += p * evolve_master(int(n), rabi, decay, time_grid)
    return out
