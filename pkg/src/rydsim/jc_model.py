"""Closed-form Jaynes-Cummings reference model.

A two-level system driven through a ladder of collective states
oscillates at a frequency proportional to the square root of the
occupation number: sqrt(n) for n photons in a resonant cavity mode,
sqrt(N) for N atoms sharing a single Rydberg excitation.  Averaging
the oscillation over a random occupation number produces the familiar
collapse-and-revival pattern.  This module evaluates those averages in
closed form; the Monte Carlo pipelines use them as analytic oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, lgamma, log, pi, sqrt

import numpy as np

DEFAULT_NMAX = 20


@dataclass(frozen=True)
class PoissonDist:
    """Poisson occupation-number statistics, truncated at ``n_max``.

    The truncation keeps downstream state spaces finite; the neglected
    tail mass is available via :meth:`tail_mass` and is reported in run
    metadata.  Probabilities are *not* renormalized after truncation.
    """

    mean: float
    n_max: int = DEFAULT_NMAX

    def __post_init__(self):
        if not self.mean > 0:
            raise ValueError(f"Poisson mean must be positive, got {self.mean}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")

    def tail_mass(self) -> float:
        """Probability mass beyond n_max, 1 - sum_{n<=n_max} p(n)."""
        total = sum(poisson_pmf(self, n) for n in range(self.n_max + 1))
        return 1.0 - total

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        counts = np.arange(self.n_max + 1)
        probs = np.array([poisson_pmf(self, int(n)) for n in counts])
        return counts, probs


@dataclass(frozen=True)
class BinomialDist:
    """Binomial site-occupancy statistics: ``trials`` sites, each loaded
    with probability ``success_prob``."""

    trials: int
    success_prob: float

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0.0 <= self.success_prob <= 1.0:
            raise ValueError(
                f"success_prob must lie in [0, 1], got {self.success_prob}"
            )

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        counts = np.arange(self.trials + 1)
        probs = np.array([binomial_pmf(self, int(k)) for k in counts])
        return counts, probs


@dataclass(frozen=True)
class FixedDist:
    """Degenerate distribution: exactly ``count`` atoms, always."""

    count: int

    def __post_init__(self):
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([self.count]), np.array([1.0])


CountDistribution = PoissonDist | BinomialDist | FixedDist


@dataclass(frozen=True)
class DriveParams:
    """Resonant drive parameters, angular units (rad/us).

    ``rabi`` is the single-atom Rabi frequency Omega of the atomic
    ensembles; ``coupling`` is the atom-field coupling g of the photonic
    variant.  The drive is resonant throughout (zero detuning).
    """

    rabi: float = 0.0
    coupling: float = 0.0

    def __post_init__(self):
        if self.rabi < 0:
            raise ValueError(f"rabi must be >= 0, got {self.rabi}")
        if self.coupling < 0:
            raise ValueError(f"coupling must be >= 0, got {self.coupling}")


def poisson_pmf(dist: PoissonDist, n: int) -> float:
    """Poisson probability of exactly ``n`` counts.

    Evaluated in log space (log-gamma for the factorial) so that means
    and counts up to a few hundred stay finite.
    """
    if n < 0:
        raise ValueError(f"count must be >= 0, got {n}")
    return exp(n * log(dist.mean) - dist.mean - lgamma(n + 1))


def binomial_pmf(dist: BinomialDist, k: int) -> float:
    """Binomial probability of exactly ``k`` occupied sites."""
    if not 0 <= k <= dist.trials:
        raise ValueError(f"k must lie in [0, {dist.trials}], got {k}")
    n, q = dist.trials, dist.success_prob
    # Multiplicative recurrence for C(n, k); exact in float64 for n <= 24.
    coeff = 1.0
    for i in range(min(k, n - k)):
        coeff = coeff * (n - i) / (i + 1)
    # Direct powers keep dyadic probabilities (e.g. q = 1/2) exact.
    return float(coeff * q**k * (1.0 - q) ** (n - k))


def jc_excited_probability(
    drive: DriveParams, dist: CountDistribution, t: float | np.ndarray
) -> float | np.ndarray:
    """Excited-state probability of a two-level system in a field with
    random occupation number.

    Parameters
    ----------
    drive : DriveParams
        Uses ``drive.coupling`` (g); the n-photon Rabi frequency is
        ``2 g sqrt(n)``.
    dist : count distribution
        Photon-number statistics; the n = 0 term never contributes.
    t : float or ndarray
        Time(s) in us, must be >= 0.

    Returns
    -------
    float or ndarray
        P_e(t) = sum_n p(n) sin^2(g t sqrt(n)).
    """
    t = _check_times(t)
    counts, probs = dist.support()
    out = np.zeros_like(t, dtype=float)
    for n, p in zip(counts, probs):
        if n == 0:
            continue
        out += p * np.sin(drive.coupling * t * sqrt(n)) ** 2
    return out if out.ndim else float(out)


def collective_p1(
    drive: DriveParams, atom_dist: CountDistribution, t: float | np.ndarray
) -> float | np.ndarray:
    """Single-excitation probability of a perfectly blockaded ensemble
    with a random atom number.

    The N-atom collective Rabi frequency is sqrt(N)*Omega, so

        P_1(t) = sum_N p(N) sin^2(sqrt(N) Omega t / 2),

    the ensemble analog of :func:`jc_excited_probability` with
    g = Omega/2.
    """
    t = _check_times(t)
    counts, probs = atom_dist.support()
    out = np.zeros_like(t, dtype=float)
    for n, p in zip(counts, probs):
        if n == 0:
            continue
        out += p * np.sin(sqrt(n) * drive.rabi * t / 2.0) ** 2
    return out if out.ndim else float(out)


def revival_time_estimate(drive: DriveParams, mean_n: float) -> float:
    """Rephasing time of adjacent occupation-number components.

    Neighboring terms of the collective sum beat at
    Omega*(sqrt(N+1)-sqrt(N)) ~ Omega/(2 sqrt(nbar)); they return in
    phase after 4*pi*sqrt(nbar)/Omega.
    """
    if mean_n < 1:
        raise ValueError(f"mean_n must be >= 1, got {mean_n}")
    if drive.rabi <= 0:
        raise ValueError("rabi must be positive for a revival estimate")
    return 4.0 * pi * sqrt(mean_n) / drive.rabi


def _check_times(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be >= 0")
    return t
