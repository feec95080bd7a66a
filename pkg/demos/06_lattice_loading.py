"""Collapse and revival without Poissonian loading.

An array of microtraps holds at most one atom per site (collisional
blockade), each site filled with 50% probability, so the atom number
is binomial.  Nine sites at 3 um spacing are deep inside the blockade
radius and show clear collapses and revivals; four sites give only a
few beat frequencies and no clean collapse.

Run:
    python demos/06_lattice_loading.py
"""

import numpy as np

from rydsim import (
    BinomialDist,
    PhysicalParams,
    ScenarioSpec,
    TimeSeries,
    TrapGeometry,
    TWO_PI,
    revival_contrast,
    run_scenario,
)
from _plotting import maybe_plot

t = np.linspace(0.0, 10.0, 201)
params = PhysicalParams(rabi=TWO_PI * 1.0, c6=TWO_PI * 3.2e6)

runs = {
    "9 sites, d = 3 um": ScenarioSpec(
        geometry=TrapGeometry.square_lattice(3, 3, 3.0),
        atom_dist=BinomialDist(trials=9, success_prob=0.5),
        params=params,
        time_grid=t,
        samples=500,
        seed=41,
    ),
    "4 sites, d = 4 um": ScenarioSpec(
        geometry=TrapGeometry.square_lattice(2, 2, 4.0),
        atom_dist=BinomialDist(trials=4, success_prob=0.5),
        params=params,
        time_grid=t,
        samples=500,
        seed=42,
    ),
}

curves = {}
for label, spec in runs.items():
    result = run_scenario(spec)
    curves[label] = result.n_ry
    print(
        f"{label}: revival contrast of N_Ry = "
        f"{revival_contrast(TimeSeries(t, result.n_ry)):.3f}, "
        f"max q2 = {result.histogram.q[2].max():.4f}"
    )

maybe_plot(
    "06_lattice.png",
    lambda ax: (
        [ax.plot(t, v, label=k) for k, v in curves.items()],
        ax.legend(),
        ax.set_xlabel("t (us)"),
        ax.set_ylabel("N_Ry"),
    ),
)
