"""Truncated many-body basis for N two-level atoms.

Basis states are occupation bitmasks (bit i set = atom i in the Rydberg
state).  Restricting to at most ``m`` excitations cuts the dimension
from 2^N to sum_{k<=m} C(N, k), which is what makes the many-body
propagation tractable in the blockaded regime.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

# Masks must fit one machine word and the full-space brute-force oracle
# must stay enumerable.
MAX_ATOMS = 24


class CapacityError(ValueError):
    """Atom number outside the supported range."""


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Ordered basis of at-most-``max_excitations`` states.

    ``states`` is sorted by (excitation count, mask), so lowering the
    truncation is a prefix restriction and the ordering is bit-for-bit
    reproducible.  ``index`` maps a mask back to its ordinal.
    """

    n_atoms: int
    max_excitations: int
    states: np.ndarray
    index: dict[int, int] = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.states)


def enumerate_basis(n_atoms: int, max_excitations: int) -> StateSpace:
    """Enumerate all occupation masks with at most ``max_excitations``
    set bits, ordered by (excitation count, mask).

    Parameters
    ----------
    n_atoms : int
        Number of atoms N, 1 <= N <= 24 (N = 0 is allowed and yields the
        single empty state, for the empty-trap edge case).
    max_excitations : int
        Truncation level m, 0 <= m <= N.
    """
    if not 0 <= n_atoms <= MAX_ATOMS:
        raise CapacityError(
            f"n_atoms must lie in [0, {MAX_ATOMS}], got {n_atoms}"
        )
    if not 0 <= max_excitations <= n_atoms:
        raise ValueError(
            f"max_excitations must lie in [0, {n_atoms}], got {max_excitations}"
        )
    masks: list[int] = []
    for k in range(max_excitations + 1):
        block = sorted(
            sum(1 << i for i in bits)
            for bits in combinations(range(n_atoms), k)
        )
        masks.extend(block)
    states = np.array(masks, dtype=np.int64)
    index = {int(mask): i for i, mask in enumerate(states)}
    return StateSpace(n_atoms, max_excitations, states, index)


def excitation_count(state: int) -> int:
    """Number of Rydberg excitations in a basis state (popcount)."""
    return int(state).bit_count()


def basis_dimension(n_atoms: int, max_excitations: int) -> int:
    """Dimension of the truncated basis, sum_{k<=m} C(N, k)."""
    return sum(comb(n_atoms, k) for k in range(max_excitations + 1))


def coupled_pairs(space: StateSpace) -> np.ndarray:
    """All unordered basis pairs connected by a single-atom flip.

    Returns an (n_edges, 3) int array of rows (index_a, index_b,
    atom_id) with index_a < index_b.  Flips that would exceed the
    excitation cap are absent by construction, so every edge connects
    states whose excitation counts differ by exactly one.
    """
    edges = []
    m = space.max_excitations
    for ia, mask in enumerate(space.states):
        mask = int(mask)
        if mask.bit_count() >= m:
            continue  # adding one more excitation would leave the basis
        for atom in range(space.n_atoms):
            bit = 1 << atom
            if mask & bit:
                continue
            ib = space.index[mask | bit]
            edges.append((ia, ib, atom))
    if not edges:
        return np.empty((0, 3), dtype=np.int64)
    return np.array(edges, dtype=np.int64)
