"""Random-loading Monte Carlo pipeline.

Samples atom numbers and spatial configurations, propagates each
configuration with the dynamics module, and combines the results into
distribution-averaged excitation statistics.

Determinism contract: a scenario is fully specified by its seed.  Every
task (one spatial configuration) draws from its own counter-based
generator derived from (seed, task index) via spawn keys, and partial
results are reduced in fixed task order, so results are bit-identical
for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .dynamics import (
    DEFAULT_CUTOFF_FACTOR,
    ExcitationHistogram,
    IntegrationError,
    PhysicalParams,
    SpatialConfiguration,
    build_hamiltonian,
    evolve,
    excitation_expectations,
)
from .jc_model import BinomialDist, CountDistribution, FixedDist, PoissonDist
from .statespace import enumerate_basis

# Default stratified-sampling knobs: strata with probability below
# RETAIN_THRESHOLD are dropped (mass reported in metadata), retained
# strata get at least SAMPLES_FLOOR configurations.
RETAIN_THRESHOLD = 1e-3
SAMPLES_FLOOR = 50

MAX_FAILURE_FRACTION = 1e-3

ProgressCallback = Callable[[int, int], None]


@dataclass(frozen=True, eq=False)
class TrapGeometry:
    """Trap model: an isotropic Gaussian cloud of rms radius ``sigma``
    (um) or a fixed array of lattice sites."""

    kind: str
    sigma: float | None = None
    site_positions: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "gaussian_cloud":
            if self.sigma is None or not self.sigma > 0:
                raise ValueError(f"gaussian_cloud needs sigma > 0, got {self.sigma}")
        elif self.kind == "lattice":
            sites = np.atleast_2d(np.asarray(self.site_positions, dtype=float))
            if sites.ndim != 2 or sites.shape[1] != 3 or len(sites) == 0:
                raise ValueError("lattice needs site_positions of shape (S, 3)")
            delta = sites[:, None, :] - sites[None, :, :]
            dist = np.sqrt((delta**2).sum(axis=-1))
            np.fill_diagonal(dist, np.inf)
            if len(sites) > 1 and not dist.min() > 0:
                raise ValueError("lattice sites must be pairwise distinct")
            object.__setattr__(self, "site_positions", sites)
        else:
            raise ValueError(f"unknown trap kind {self.kind!r}")

    @classmethod
    def gaussian_cloud(cls, sigma: float) -> "TrapGeometry":
        return cls(kind="gaussian_cloud", sigma=sigma)

    @classmethod
    def lattice(cls, site_positions: np.ndarray) -> "TrapGeometry":
        return cls(kind="lattice", site_positions=site_positions)

    @classmethod
    def square_lattice(cls, rows: int, cols: int, spacing: float) -> "TrapGeometry":
        """Planar grid of rows x cols sites with nearest-neighbor
        distance ``spacing`` (um), in the z = 0 plane."""
        if rows < 1 or cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if not spacing > 0:
            raise ValueError(f"spacing must be positive, got {spacing}")
        sites = [
            (r * spacing, c * spacing, 0.0) for r in range(rows) for c in range(cols)
        ]
        return cls.lattice(np.array(sites))

    @property
    def n_sites(self) -> int:
        if self.kind != "lattice":
            raise ValueError("n_sites is only defined for lattice geometries")
        return len(self.site_positions)


@dataclass(eq=False)
class ScenarioSpec:
    """A fully seeded description of one simulated experiment."""

    geometry: TrapGeometry
    atom_dist: CountDistribution
    params: PhysicalParams
    time_grid: np.ndarray
    max_excitations: int | None = None  # None: resolve by trap size
    samples: int = 2000
    seed: int = 12345
    energy_cutoff_factor: float = DEFAULT_CUTOFF_FACTOR
    retain_threshold: float = RETAIN_THRESHOLD
    samples_floor: int = SAMPLES_FLOOR
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.geometry.kind == "lattice":
            if not isinstance(self.atom_dist, BinomialDist):
                raise ValueError(
                    "lattice scenarios use binomial site occupancy; "
                    f"got {type(self.atom_dist).__name__}"
                )
            if self.atom_dist.trials != self.geometry.n_sites:
                raise ValueError(
                    f"binomial trials ({self.atom_dist.trials}) must equal "
                    f"the lattice site count ({self.geometry.n_sites})"
                )
        elif not isinstance(self.atom_dist, (PoissonDist, FixedDist)):
            raise ValueError(
                "gaussian_cloud scenarios use Poissonian or fixed atom "
                f"numbers; got {type(self.atom_dist).__name__}"
            )


@dataclass(eq=False)
class AveragedResult:
    """Distribution-averaged observables plus reproduction metadata."""

    histogram: ExcitationHistogram
    n_ry: np.ndarray
    p_ry: np.ndarray
    metadata: dict
    q_stderr: np.ndarray | None = None
    n_ry_stderr: np.ndarray | None = None


@dataclass(eq=False)
class SweepGrid:
    """A stack of scenario outputs along one swept parameter."""

    axis_name: str
    axis: np.ndarray
    time_grid: np.ndarray
    values: np.ndarray  # (len(axis), len(time_grid))
    results: list[AveragedResult] = field(default_factory=list)


def task_rng(seed: int, namespace: int, index: int) -> np.random.Generator:
    """Counter-based generator for one task, derived from the scenario
    seed and the task index; independent of scheduling order."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(namespace, index))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, namespace: int, index: int) -> int:
    """64-bit child seed for a nested scenario (e.g. one sweep point)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(namespace, index))
    return int(ss.generate_state(1, np.uint64)[0])


def sample_positions(
    geometry: TrapGeometry, n_atoms: int, rng: np.random.Generator
) -> SpatialConfiguration:
    """Draw one spatial configuration of ``n_atoms`` atoms.

    Gaussian cloud: every coordinate is an independent normal draw with
    standard deviation sigma and zero mean.  Lattice: the positions of
    ``n_atoms`` occupied sites (uniform site subset, which is the
    conditional law of per-site Bernoulli loading given the total).
    """
    if n_atoms < 0:
        raise ValueError(f"n_atoms must be >= 0, got {n_atoms}")
    if geometry.kind == "gaussian_cloud":
        pos = rng.normal(0.0, geometry.sigma, size=(n_atoms, 3))
        return SpatialConfiguration(pos)
    if n_atoms > geometry.n_sites:
        raise ValueError(
            f"cannot place {n_atoms} atoms on {geometry.n_sites} lattice sites"
        )
    chosen = np.sort(rng.choice(geometry.n_sites, size=n_atoms, replace=False))
    return SpatialConfiguration(geometry.site_positions[chosen])


def sample_atom_number(dist: CountDistribution, rng: np.random.Generator) -> int:
    """Draw an atom number from the (truncated, renormalized)
    distribution; Poisson draws never exceed n_max."""
    if isinstance(dist, FixedDist):
        return dist.count
    if isinstance(dist, BinomialDist):
        return int(rng.binomial(dist.trials, dist.success_prob))
    while True:
        n = int(rng.poisson(dist.mean))
        if n <= dist.n_max:
            return n


@lru_cache(maxsize=64)
def _cached_space(n_atoms: int, max_excitations: int):
    return enumerate_basis(n_atoms, max_excitations)


def _propagate_task(job):
    """Worker body: one configuration -> per-count probabilities.

    Returns (q, n_pruned) on success or an IntegrationError message
    string on a propagation failure; must stay a plain top-level
    function so process pools can pickle it.
    """
    n_atoms, m_eff, positions, rabi, c6, cutoff, time_grid = job
    if n_atoms == 0:
        q = np.zeros((1, len(time_grid)))
        q[0] = 1.0
        return q, 0
    try:
        space = _cached_space(n_atoms, m_eff)
        params = PhysicalParams(rabi=rabi, c6=c6)
        h = build_hamiltonian(
            params, SpatialConfiguration(positions), space, energy_cutoff=cutoff
        )
        hist = evolve(h, space, time_grid)
        return hist.q, h.n_pruned
    except IntegrationError as err:
        return str(err)


def _run_tasks(jobs, workers: int, progress: ProgressCallback | None = None):
    """Run propagation jobs, preserving job order in the results."""
    results = []
    if workers == 1:
        for i, job in enumerate(jobs):
            results.append(_propagate_task(job))
            if progress is not None:
                progress(i + 1, len(jobs))
        return results
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for i, out in enumerate(pool.map(_propagate_task, jobs, chunksize=4)):
            results.append(out)
            if progress is not None:
                progress(i + 1, len(jobs))
    return results


def default_max_excitations(geometry: TrapGeometry) -> int:
    """Truncation level by trap size: 2 (3) excitations suffice for
    tightly (moderately) blockaded clouds, 4 for wide ones; lattice
    presets use 3."""
    if geometry.kind == "lattice":
        return 3
    if geometry.sigma <= 2.5:
        return 2
    if geometry.sigma <= 3.5:
        return 3
    return 4


def run_scenario(
    spec: ScenarioSpec, progress: ProgressCallback | None = None
) -> AveragedResult:
    """Run the full Monte Carlo pipeline for one scenario.

    Gaussian clouds are stratified over the atom number: each retained
    N (probability above ``retain_threshold``) receives a sample count
    proportional to its probability (with a floor), configurations are
    averaged within the stratum, and strata are combined with their
    probability weights.  The N = 0 stratum contributes q(0) = 1
    exactly.  Lattice scenarios sample per-site Bernoulli occupancy
    patterns and average uniformly.

    Per-configuration propagation failures are counted and excluded;
    the run aborts if more than 0.1% of configurations fail.
    """
    m = (
        spec.max_excitations
        if spec.max_excitations is not None
        else default_max_excitations(spec.geometry)
    )
    if m < 1:
        raise ValueError(f"max_excitations must be >= 1, got {m}")
    cutoff = (
        spec.energy_cutoff_factor * spec.params.rabi
        if spec.params.rabi > 0
        else np.inf
    )
    t = np.asarray(spec.time_grid, dtype=float)

    if spec.geometry.kind == "lattice":
        return _run_lattice(spec, m, cutoff, t, progress)
    return _run_stratified(spec, m, cutoff, t, progress)


def _stratum_allocation(spec: ScenarioSpec):
    counts, probs = spec.atom_dist.support()
    retained = probs > spec.retain_threshold
    total_retained = float(probs[retained].sum())
    alloc: dict[int, int] = {}
    for n, p in zip(counts[retained], probs[retained]):
        if n == 0:
            alloc[int(n)] = 0  # exact analytic term, nothing to sample
            continue
        share = math.ceil(spec.samples * p / total_retained)
        alloc[int(n)] = max(spec.samples_floor, share)
    weights = {int(n): float(p) for n, p in zip(counts[retained], probs[retained])}
    dropped_mass = float(probs[~retained].sum())
    return alloc, weights, dropped_mass


def _run_stratified(spec, m, cutoff, t, progress):
    alloc, weights, dropped_mass = _stratum_allocation(spec)
    rabi, c6 = spec.params.rabi, spec.params.c6

    jobs = []
    job_stratum = []
    task_id = 0
    for n in sorted(alloc):
        m_eff = min(m, n)
        for _ in range(alloc[n]):
            rng = task_rng(spec.seed, 0, task_id)
            config = sample_positions(spec.geometry, n, rng)
            jobs.append((n, m_eff, config.positions, rabi, c6, cutoff, t))
            job_stratum.append(n)
            task_id += 1

    outcomes = _run_tasks(jobs, spec.workers, progress)

    # Per-stratum accumulation in fixed task order.
    sums = {n: np.zeros((m + 1, len(t))) for n in alloc}
    sumsq = {n: np.zeros((m + 1, len(t))) for n in alloc}
    nry_sums = {n: np.zeros(len(t)) for n in alloc}
    nry_sumsq = {n: np.zeros(len(t)) for n in alloc}
    ok_counts = {n: 0 for n in alloc}
    failures = []
    pruned_total = 0
    levels = np.arange(m + 1)
    for n, outcome in zip(job_stratum, outcomes):
        if isinstance(outcome, str):
            failures.append(outcome)
            continue
        q_cfg, n_pruned = outcome
        pruned_total += n_pruned
        full = np.zeros((m + 1, len(t)))
        full[: q_cfg.shape[0]] = q_cfg
        sums[n] += full
        sumsq[n] += full**2
        nry_cfg = levels @ full
        nry_sums[n] += nry_cfg
        nry_sumsq[n] += nry_cfg**2
        ok_counts[n] += 1

    n_jobs = len(jobs)
    if n_jobs and len(failures) > MAX_FAILURE_FRACTION * n_jobs:
        raise IntegrationError(
            f"{len(failures)} of {n_jobs} configurations failed to propagate; "
            f"first failure: {failures[0]}"
        )

    q_avg = np.zeros((m + 1, len(t)))
    q_var = np.zeros((m + 1, len(t)))
    nry_var = np.zeros(len(t))
    for n in sorted(alloc):
        w = weights[n]
        if n == 0:
            q_avg[0] += w
            continue
        k = ok_counts[n]
        if k == 0:
            raise IntegrationError(f"all configurations failed in stratum N={n}")
        mean_n = sums[n] / k
        q_avg += w * mean_n
        if k > 1:
            var_n = np.maximum(sumsq[n] / k - mean_n**2, 0.0) / (k - 1)
            q_var += w**2 * var_n
            mean_nry = nry_sums[n] / k
            nry_var += w**2 * np.maximum(
                nry_sumsq[n] / k - mean_nry**2, 0.0
            ) / (k - 1)

    hist = ExcitationHistogram(time_grid=t, q=q_avg)
    n_ry, p_ry = excitation_expectations(hist)
    tail = (
        spec.atom_dist.tail_mass()
        if isinstance(spec.atom_dist, PoissonDist)
        else 0.0
    )
    metadata = {
        "seed": spec.seed,
        "samples": spec.samples,
        "samples_per_n": {str(n): alloc[n] for n in sorted(alloc)},
        "stratum_weights": {str(n): weights[n] for n in sorted(alloc)},
        "max_excitations": m,
        "energy_cutoff": float(cutoff),
        "energy_cutoff_factor": spec.energy_cutoff_factor,
        "retain_threshold": spec.retain_threshold,
        "samples_floor": spec.samples_floor,
        "retained_mass": float(sum(weights.values())),
        "dropped_mass": dropped_mass,
        "poisson_tail_mass": tail,
        "n_failures": len(failures),
        "n_configurations": n_jobs,
        "pruned_states_total": pruned_total,
    }
    return AveragedResult(
        histogram=hist,
        n_ry=n_ry,
        p_ry=p_ry,
        metadata=metadata,
        q_stderr=np.sqrt(q_var),
        n_ry_stderr=np.sqrt(nry_var),
    )


def _run_lattice(spec, m, cutoff, t, progress):
    rabi, c6 = spec.params.rabi, spec.params.c6
    sites = spec.geometry.site_positions
    load_prob = spec.atom_dist.success_prob

    jobs = []
    for task_id in range(spec.samples):
        rng = task_rng(spec.seed, 0, task_id)
        occupied = rng.random(spec.geometry.n_sites) < load_prob
        positions = sites[occupied]
        n = int(occupied.sum())
        jobs.append((n, min(m, n), positions, rabi, c6, cutoff, t))

    outcomes = _run_tasks(jobs, spec.workers, progress)

    q_sum = np.zeros((m + 1, len(t)))
    q_sumsq = np.zeros((m + 1, len(t)))
    nry_sum = np.zeros(len(t))
    nry_sumsq = np.zeros(len(t))
    levels = np.arange(m + 1)
    failures = []
    pruned_total = 0
    ok = 0
    for outcome in outcomes:
        if isinstance(outcome, str):
            failures.append(outcome)
            continue
        q_cfg, n_pruned = outcome
        pruned_total += n_pruned
        full = np.zeros((m + 1, len(t)))
        full[: q_cfg.shape[0]] = q_cfg
        q_sum += full
        q_sumsq += full**2
        nry_cfg = levels @ full
        nry_sum += nry_cfg
        nry_sumsq += nry_cfg**2
        ok += 1

    if len(failures) > MAX_FAILURE_FRACTION * len(jobs):
        raise IntegrationError(
            f"{len(failures)} of {len(jobs)} occupancy patterns failed; "
            f"first failure: {failures[0]}"
        )
    if ok == 0:
        raise IntegrationError("all occupancy patterns failed to propagate")

    q_avg = q_sum / ok
    q_var = np.zeros_like(q_avg)
    nry_var = np.zeros(len(t))
    if ok > 1:
        q_var = np.maximum(q_sumsq / ok - q_avg**2, 0.0) / (ok - 1)
        mean_nry = nry_sum / ok
        nry_var = np.maximum(nry_sumsq / ok - mean_nry**2, 0.0) / (ok - 1)

    hist = ExcitationHistogram(time_grid=t, q=q_avg)
    n_ry, p_ry = excitation_expectations(hist)
    metadata = {
        "seed": spec.seed,
        "samples": spec.samples,
        "n_sites": spec.geometry.n_sites,
        "load_prob": load_prob,
        "max_excitations": m,
        "energy_cutoff": float(cutoff),
        "energy_cutoff_factor": spec.energy_cutoff_factor,
        "n_failures": len(failures),
        "n_configurations": len(jobs),
        "pruned_states_total": pruned_total,
    }
    return AveragedResult(
        histogram=hist,
        n_ry=n_ry,
        p_ry=p_ry,
        metadata=metadata,
        q_stderr=np.sqrt(q_var),
        n_ry_stderr=np.sqrt(nry_var),
    )


def radius_sweep(
    base: ScenarioSpec,
    radii: np.ndarray,
    progress: ProgressCallback | None = None,
) -> SweepGrid:
    """Run the scenario for each trap radius and assemble the P_Ry(r, t)
    surface.  Each radius runs with its own derived seed; the truncation
    level follows the trap-size rule unless pinned in ``base``."""
    radii = np.asarray(radii, dtype=float)
    if len(radii) == 0 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be positive and strictly ascending")
    results = []
    values = np.zeros((len(radii), len(base.time_grid)))
    for i, r in enumerate(radii):
        spec = ScenarioSpec(
            geometry=TrapGeometry.gaussian_cloud(float(r)),
            atom_dist=base.atom_dist,
            params=base.params,
            time_grid=base.time_grid,
            max_excitations=base.max_excitations,
            samples=base.samples,
            seed=derive_seed(base.seed, 1, i),
            energy_cutoff_factor=base.energy_cutoff_factor,
            retain_threshold=base.retain_threshold,
            samples_floor=base.samples_floor,
            workers=base.workers,
        )
        res = run_scenario(spec, progress=progress)
        results.append(res)
        values[i] = res.p_ry
    return SweepGrid(
        axis_name="r_um",
        axis=radii,
        time_grid=np.asarray(base.time_grid, dtype=float),
        values=values,
        results=results,
    )
