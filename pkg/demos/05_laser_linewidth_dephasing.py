"""Open-system dynamics: radiative decay and laser-linewidth dephasing.

A perfectly blockaded ensemble evolves under a master equation with a
slow population decay (Rydberg lifetime) and a tunable pure dephasing
(laser line width).  Weak dephasing barely touches the revivals;
strong dephasing kills them and pushes the excitation probability
toward the uniform mixture of collective states.

Run (takes ~half a minute: one master equation per atom number
and line width):
    python demos/05_laser_linewidth_dephasing.py
"""

import numpy as np

from rydsim import (
    DecayParams,
    PoissonDist,
    TimeSeries,
    TWO_PI,
    averaged_master_scenario,
    khz_to_angular,
    revival_contrast,
)
from _plotting import maybe_plot

t = np.linspace(0.0, 10.0, 201)
dist = PoissonDist(mean=7, n_max=20)
rabi = TWO_PI * 1.0
gamma2 = khz_to_angular(0.8)  # Cs 80S effective room-temperature decay

curves = {}
for gamma_khz in (0.0, 10.0, 100.0):
    decay = DecayParams(gamma2=gamma2, gamma=khz_to_angular(gamma_khz))
    p_ry = averaged_master_scenario(dist, rabi, decay, t)
    curves[gamma_khz] = p_ry
    print(
        f"gamma/2pi = {gamma_khz:5.1f} kHz: revival contrast "
        f"{revival_contrast(TimeSeries(t, p_ry)):.4f}, P_Ry(10 us) = {p_ry[-1]:.3f}"
    )

maybe_plot(
    "05_dephasing.png",
    lambda ax: (
        [ax.plot(t, v, label=f"gamma/2pi = {k} kHz") for k, v in curves.items()],
        ax.legend(),
        ax.set_xlabel("t (us)"),
        ax.set_ylabel("P_Ry"),
    ),
)
