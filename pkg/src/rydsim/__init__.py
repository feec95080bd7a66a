"""Collapse and revival of collective Rabi oscillations in
Rydberg-blockaded atomic ensembles.

A numpy/scipy library plus a small CLI: many-body Schroedinger dynamics
with van der Waals interactions on a truncated excitation basis, Monte
Carlo averaging over random trap loading, finite-efficiency detection
statistics, Lindblad dephasing of blockaded ensembles, and coupled
two-ensemble (superatom) dynamics.
"""

__version__ = "0.1.0"

from .analysis import (
    COLLAPSE_WINDOW,
    REVIVAL_WINDOW,
    SpectrumResult,
    TimeSeries,
    fourier_spectrum,
    revival_contrast,
)
from .detection import DetectionModel, detected_timeseries, detection_transform
from .dynamics import (
    ExcitationHistogram,
    HamiltonianMatrix,
    IntegrationError,
    PhysicalParams,
    SpatialConfiguration,
    blockade_radius,
    build_hamiltonian,
    evolve,
    excitation_expectations,
    propagate_amplitudes,
    vdw_pair_energy,
)
from .ensemble import (
    AveragedResult,
    ScenarioSpec,
    SweepGrid,
    TrapGeometry,
    radius_sweep,
    run_scenario,
    sample_atom_number,
    sample_positions,
)
from .jc_model import (
    BinomialDist,
    DriveParams,
    FixedDist,
    PoissonDist,
    binomial_pmf,
    collective_p1,
    jc_excited_probability,
    poisson_pmf,
    revival_time_estimate,
)
from .open_system import (
    DecayParams,
    averaged_master_scenario,
    evolve_master,
    master_trajectory,
    symmetric_excited_state,
)
from .statespace import (
    CapacityError,
    StateSpace,
    coupled_pairs,
    enumerate_basis,
    excitation_count,
)
from .superatom import (
    PairAmplitudes,
    SuperatomPair,
    distance_sweep,
    evolve_pair,
    mean_coupling,
    two_ensemble_scenario,
)
from .units import TWO_PI, angular_to_mhz, khz_to_angular, mhz_to_angular

from .runio import (  # noqa: E402 (depends on __version__ above)
    ConfigError,
    RunConfig,
    RunManifest,
    load_config,
    read_timeseries_csv,
    write_grid_csv,
    write_timeseries_csv,
)
from .presets import PRESETS, UnknownPresetError, run_preset  # noqa: E402
from .cli import cli_main  # noqa: E402
