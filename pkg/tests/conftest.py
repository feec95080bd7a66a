"""Shared fixtures and independent oracles.

The brute-force helpers below rebuild the physics from scratch (full
2^N space, matrix-exponential stepping) so the main propagation path
is checked against a genuinely different computation.
"""

import numpy as np
import pytest
import scipy.linalg

from rydsim import TWO_PI, PhysicalParams


@pytest.fixture
def params():
    """The standard drive/interaction point: Omega/2pi = 1 MHz,
    C6/2pi = 3.2e6 MHz um^6."""
    return PhysicalParams(rabi=TWO_PI * 1.0, c6=TWO_PI * 3.2e6)


@pytest.fixture
def time_grid():
    return np.linspace(0.0, 10.0, 201)


def dense_full_hamiltonian(params: PhysicalParams, positions: np.ndarray) -> np.ndarray:
    """Full 2^N Hamiltonian built by direct enumeration of masks."""
    n = len(positions)
    dim = 2**n
    h = np.zeros((dim, dim))
    for s in range(dim):
        acc = 0.0
        for i in range(n):
            if not s >> i & 1:
                continue
            for j in range(i + 1, n):
                if s >> j & 1:
                    r = np.linalg.norm(positions[i] - positions[j])
                    acc += params.c6 / r**6
        h[s, s] = acc
        for i in range(n):
            flipped = s ^ (1 << i)
            if flipped > s:
                h[s, flipped] = h[flipped, s] = params.rabi / 2.0
    return h


def expm_counts(params, positions, time_grid, max_count=None):
    """Independent reference q(n, t): expm propagation on the full
    2^N space, binned by popcount."""
    n = len(positions)
    h = dense_full_hamiltonian(params, positions)
    dim = 2**n
    psi0 = np.zeros(dim, dtype=complex)
    psi0[0] = 1.0
    pops = np.array([s.bit_count() for s in range(dim)])
    m = n if max_count is None else max_count
    q = np.zeros((m + 1, len(time_grid)))
    for j, t in enumerate(time_grid):
        psi = scipy.linalg.expm(-1j * h * t) @ psi0
        prob = np.abs(psi) ** 2
        for level in range(m + 1):
            q[level, j] = prob[pops == level].sum()
    return q
