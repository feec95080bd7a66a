"""Many-body dynamics of a driven, interacting ensemble.

One spatial configuration at a time: build the Hamiltonian

    H = (Omega/2) sum_i (|g_i><r_i| + h.c.)
        + sum_{i<j} (C6 / R_ij^6) |r_i r_j><r_i r_j|

on the truncated basis and propagate the Schroedinger equation from the
all-ground state, yielding the probabilities q(n, t) of exactly n
Rydberg excitations.

The propagator diagonalizes the (real symmetric) Hamiltonian once and
applies exact spectral phases.  Pair energies far above the drive scale
make the amplitude equations extremely stiff, so explicit stepping is
impractical at Monte Carlo sample counts; the spectral propagator is
immune to stiffness and conserves the norm to machine precision.
Near-coincident atoms are handled by pruning basis states whose
interaction energy exceeds a configurable cutoff; such states are
populated at order (Omega/V)^2 and their removal is checked to be
inconsequential (see the cutoff tests).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .statespace import StateSpace, coupled_pairs

# Basis states with interaction energy above DEFAULT_CUTOFF_FACTOR*Omega
# are dropped before propagation; they carry population <= 1e-8.
DEFAULT_CUTOFF_FACTOR = 1e4

NORM_TOLERANCE = 1e-8


class IntegrationError(RuntimeError):
    """Propagation failed to meet its accuracy contract."""

    def __init__(self, message: str, worst_error: float = np.nan):
        super().__init__(message)
        self.worst_error = worst_error


@dataclass(frozen=True)
class PhysicalParams:
    """Drive and interaction parameters in angular units.

    ``rabi``: single-atom Rabi frequency Omega, rad/us.
    ``c6``: van der Waals coefficient, rad*um^6/us (positive: repulsive
    level up-shift, as for the Cs 80S model state).
    """

    rabi: float
    c6: float

    def __post_init__(self):
        if self.rabi < 0:
            raise ValueError(f"rabi must be >= 0, got {self.rabi}")
        if not self.c6 > 0:
            raise ValueError(f"c6 must be positive, got {self.c6}")


@dataclass(frozen=True, eq=False)
class SpatialConfiguration:
    """One random draw of atom positions, um, shape (N, 3)."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.size == 0:
            pos = pos.reshape(0, 3)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError(f"positions must have shape (N, 3), got {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        object.__setattr__(self, "positions", pos)

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]


@dataclass(eq=False)
class HamiltonianMatrix:
    """Sparse symmetric Hamiltonian on the (possibly pruned) basis.

    ``diagonal`` holds the interaction energies; every off-diagonal
    entry equals ``coupling`` = Omega/2 and sits on the single-flip
    edges listed in ``edges`` (upper triangle).  ``excitations`` gives
    the excitation count of each retained basis state, in basis order.
    """

    dimension: int
    diagonal: np.ndarray
    edges: np.ndarray
    coupling: float
    excitations: np.ndarray
    energy_cutoff: float
    n_pruned: int = 0

    def dense(self) -> np.ndarray:
        h = np.zeros((self.dimension, self.dimension))
        h[np.diag_indices(self.dimension)] = self.diagonal
        if len(self.edges):
            h[self.edges[:, 0], self.edges[:, 1]] = self.coupling
            h[self.edges[:, 1], self.edges[:, 0]] = self.coupling
        return h


@dataclass(eq=False)
class ExcitationHistogram:
    """q[n, j]: probability of exactly n Rydberg excitations at time
    time_grid[j]."""

    time_grid: np.ndarray
    q: np.ndarray

    @property
    def n_levels(self) -> int:
        return self.q.shape[0]


def vdw_pair_energy(params: PhysicalParams, distance: float) -> float:
    """van der Waals pair energy C6/R^6, rad/us.

    Raises for non-positive distance; coincident atoms inside a sampled
    configuration are instead handled by the energy-cutoff pruning in
    :func:`build_hamiltonian`.
    """
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    return params.c6 / distance**6


def blockade_radius(params: PhysicalParams, n_atoms: int) -> float:
    """Distance at which the pair energy equals the collective Rabi
    frequency: (C6 / (Omega sqrt(N)))^(1/6), um."""
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    if params.rabi <= 0:
        raise ValueError("rabi must be positive for a blockade radius")
    return float((params.c6 / (params.rabi * np.sqrt(n_atoms))) ** (1.0 / 6.0))


def pair_energies(params: PhysicalParams, config: SpatialConfiguration) -> np.ndarray:
    """Symmetric (N, N) matrix of pair energies; inf for coincident
    atoms (resolved later by pruning), zeros on the diagonal."""
    pos = config.positions
    n = pos.shape[0]
    if n < 2:
        return np.zeros((n, n))
    delta = pos[:, None, :] - pos[None, :, :]
    r6 = np.sum(delta * delta, axis=-1) ** 3
    with np.errstate(divide="ignore"):
        v = params.c6 / r6
    np.fill_diagonal(v, 0.0)
    return v


def build_hamiltonian(
    params: PhysicalParams,
    config: SpatialConfiguration,
    space: StateSpace,
    energy_cutoff: float | None = None,
) -> HamiltonianMatrix:
    """Assemble the many-body Hamiltonian for one configuration.

    Parameters
    ----------
    params, config, space
        Physics, positions and truncated basis; ``config`` must hold
        exactly ``space.n_atoms`` positions.
    energy_cutoff : float, optional
        Basis states whose diagonal interaction energy exceeds this
        value (rad/us) are pruned before propagation.  Defaults to
        ``DEFAULT_CUTOFF_FACTOR * rabi`` (never prunes when rabi = 0).

    Returns
    -------
    HamiltonianMatrix
        Hermitian by construction: interaction energies on the
        diagonal, Omega/2 on every single-flip edge between retained
        states.
    """
    if config.n_atoms != space.n_atoms:
        raise ValueError(
            f"configuration has {config.n_atoms} atoms, "
            f"state space expects {space.n_atoms}"
        )
    if energy_cutoff is None:
        energy_cutoff = (
            DEFAULT_CUTOFF_FACTOR * params.rabi if params.rabi > 0 else np.inf
        )

    v = pair_energies(params, config)
    masks = space.states
    diagonal = np.zeros(len(masks))
    for s, mask in enumerate(masks):
        mask = int(mask)
        if mask.bit_count() < 2:
            continue
        atoms = [i for i in range(space.n_atoms) if mask >> i & 1]
        acc = 0.0
        for a in range(len(atoms)):
            for b in range(a + 1, len(atoms)):
                acc += v[atoms[a], atoms[b]]
        diagonal[s] = acc

    keep = diagonal <= energy_cutoff
    n_pruned = int(np.count_nonzero(~keep))
    new_index = np.full(len(masks), -1, dtype=np.int64)
    new_index[keep] = np.arange(int(np.count_nonzero(keep)))

    raw_edges = coupled_pairs(space)
    edges = np.empty((0, 2), dtype=np.int64)
    if len(raw_edges):
        ok = keep[raw_edges[:, 0]] & keep[raw_edges[:, 1]]
        edges = np.stack(
            [new_index[raw_edges[ok, 0]], new_index[raw_edges[ok, 1]]], axis=1
        )

    excitations = np.array(
        [int(mask).bit_count() for mask in masks[keep]], dtype=np.int64
    )
    return HamiltonianMatrix(
        dimension=int(np.count_nonzero(keep)),
        diagonal=diagonal[keep],
        edges=edges,
        coupling=params.rabi / 2.0,
        excitations=excitations,
        energy_cutoff=float(energy_cutoff),
        n_pruned=n_pruned,
    )


def propagate_amplitudes(
    h: HamiltonianMatrix,
    time_grid: np.ndarray,
    psi0: np.ndarray | None = None,
) -> np.ndarray:
    """Amplitudes c_s(t) on the retained basis, shape (dim, n_times).

    Spectral propagation: diagonalize the real symmetric Hamiltonian
    once and apply exact phases exp(-i w t).  The initial state
    defaults to the all-ground state (basis ordinal 0).
    """
    t = np.asarray(time_grid, dtype=float)
    if psi0 is None:
        psi0 = np.zeros(h.dimension)
        psi0[0] = 1.0
    try:
        w, u = scipy.linalg.eigh(h.dense(), check_finite=False)
    except scipy.linalg.LinAlgError as err:  # pragma: no cover - rare
        raise IntegrationError(f"eigendecomposition failed: {err}") from err
    c0 = u.T @ psi0
    phases = np.exp(-1j * np.outer(w, t)) * c0[:, None]
    return u @ phases


def evolve(
    h: HamiltonianMatrix, space: StateSpace, time_grid: np.ndarray
) -> ExcitationHistogram:
    """Propagate from the all-ground state and bin probabilities by
    excitation number.

    Parameters
    ----------
    h, space
        Hamiltonian (built from ``space``) and the basis it lives on.
    time_grid : ndarray
        Ascending times in us starting at 0.

    Returns
    -------
    ExcitationHistogram
        q[n, j] for n = 0..max_excitations; each column sums to 1
        within 1e-8 (norm conservation), else IntegrationError.
    """
    t = np.asarray(time_grid, dtype=float)
    if t.ndim != 1 or len(t) == 0:
        raise ValueError("time_grid must be a non-empty 1-D array")
    if t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ValueError("time_grid must be ascending and start at 0")

    amplitudes = propagate_amplitudes(h, t)
    prob = np.abs(amplitudes) ** 2
    q = np.zeros((space.max_excitations + 1, len(t)))
    np.add.at(q, h.excitations, prob)

    norm_dev = float(np.max(np.abs(q.sum(axis=0) - 1.0)))
    if norm_dev > NORM_TOLERANCE:
        raise IntegrationError(
            f"norm deviated by {norm_dev:.3e} (tolerance {NORM_TOLERANCE:.0e})",
            worst_error=norm_dev,
        )
    return ExcitationHistogram(time_grid=t, q=q)


def excitation_expectations(
    hist: ExcitationHistogram,
) -> tuple[np.ndarray, np.ndarray]:
    """Average excitation number N_Ry(t) = sum_n n q(n, t) and the
    probability of at least one excitation P_Ry(t) = sum_{n>=1} q(n, t)."""
    levels = np.arange(hist.n_levels)
    n_ry = levels @ hist.q
    p_ry = hist.q[1:].sum(axis=0)
    return n_ry, p_ry
