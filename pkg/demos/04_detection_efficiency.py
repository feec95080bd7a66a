"""Counting statistics behind an imperfect detector.

Each excited atom is registered only with probability T, so the
detected statistics are a binomial thinning of the true ones.  Even at
T = 0.1 the collapse/revival structure of the single-count channel
stays visible; it is only scaled down.

Run:
    python demos/04_detection_efficiency.py
"""

import numpy as np

from rydsim import (
    DetectionModel,
    PhysicalParams,
    PoissonDist,
    ScenarioSpec,
    TimeSeries,
    TrapGeometry,
    TWO_PI,
    detected_timeseries,
    revival_contrast,
    run_scenario,
)
from _plotting import maybe_plot

t = np.linspace(0.0, 10.0, 201)
spec = ScenarioSpec(
    geometry=TrapGeometry.gaussian_cloud(2.0),
    atom_dist=PoissonDist(mean=7, n_max=20),
    params=PhysicalParams(rabi=TWO_PI * 1.0, c6=TWO_PI * 3.2e6),
    time_grid=t,
    samples=400,
    seed=2024,
)
result = run_scenario(spec)
q1 = result.histogram.q[1]
print(f"undetected contrast: {revival_contrast(TimeSeries(t, q1)):.4f}")

curves = {}
for efficiency in (1.0, 0.5, 0.1):
    detected = detected_timeseries(result.histogram, DetectionModel(efficiency))
    curves[efficiency] = detected.q[1]
    print(
        f"T = {efficiency:3.1f}: detected-count conservation "
        f"{abs(detected.q.sum(0) - result.histogram.q.sum(0)).max():.2e}, "
        f"s1 contrast {revival_contrast(TimeSeries(t, detected.q[1])):.4f}"
    )

maybe_plot(
    "04_detection.png",
    lambda ax: (
        [ax.plot(t, v, label=f"T = {k}") for k, v in curves.items()],
        ax.legend(),
        ax.set_xlabel("t (us)"),
        ax.set_ylabel("s1"),
        ax.set_title("Single-count channel under binomial thinning"),
    ),
)
