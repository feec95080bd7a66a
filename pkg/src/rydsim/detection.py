"""Finite-efficiency detection statistics.

A detector that registers each excited atom independently with
probability T maps the true counting statistics q(i) onto detected
statistics by binomial thinning:

    s(k) = sum_{i>=k} C(i, k) T^k (1-T)^(i-k) q(i).

q has finite support (i <= N_max), so the sum is exact; the transform
conserves total probability and scales the mean count by T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ExcitationHistogram


@dataclass(frozen=True)
class DetectionModel:
    """Loss-only detector with per-atom efficiency T in [0, 1]."""

    efficiency: float

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(
                f"efficiency must lie in [0, 1], got {self.efficiency}"
            )


def thinning_matrix(n_levels: int, efficiency: float) -> np.ndarray:
    """Matrix M with M[k, i] = C(i, k) T^k (1-T)^(i-k) for i >= k.

    Binomial coefficients by multiplicative recurrence; exact in
    float64 for i <= 24.
    """
    t = efficiency
    m = np.zeros((n_levels, n_levels))
    for i in range(n_levels):
        coeff = 1.0
        for k in range(i + 1):
            m[k, i] = coeff * t**k * (1.0 - t) ** (i - k)
            coeff = coeff * (i - k) / (k + 1)
    return m


def detection_transform(q: np.ndarray, model: DetectionModel) -> np.ndarray:
    """Apply the thinning transform to per-count probabilities.

    ``q`` may be a vector q[i] or a matrix q[i, j] of per-count
    time series; counts run along the first axis.
    """
    q = np.asarray(q, dtype=float)
    if np.any(q < -1e-12) or np.any(q > 1.0 + 1e-9):
        raise ValueError("q entries must be probabilities in [0, 1]")
    totals = q.sum(axis=0)
    if np.any(totals > 1.0 + 1e-9):
        raise ValueError("q must sum to at most 1 over counts")
    return thinning_matrix(q.shape[0], model.efficiency) @ q


def detected_timeseries(
    hist: ExcitationHistogram, model: DetectionModel
) -> ExcitationHistogram:
    """Column-wise detection transform of an excitation histogram."""
    return ExcitationHistogram(
        time_grid=hist.time_grid, q=detection_transform(hist.q, model)
    )
