"""Canned scenarios and the pipelines that execute them.

Each preset resolves to a RunConfig (defaults + preset overrides +
user overrides), runs the appropriate pipeline, writes deterministic
outputs (``<name>_timeseries.csv`` / ``<name>_grid.csv``, a
``<name>_summary.json`` of headline metrics, and a
``<name>_manifest.json`` that reproduces the run), and returns the
manifest.  Preset variants (secondary curves of the same scenario)
write additional ``<name>_<variant>_timeseries.csv`` files.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analysis import TimeSeries, fourier_spectrum, revival_contrast
from .detection import DetectionModel, detected_timeseries
from .dynamics import ExcitationHistogram, build_hamiltonian, evolve
from .ensemble import (
    AveragedResult,
    default_max_excitations,
    radius_sweep,
    run_scenario,
    sample_atom_number,
    sample_positions,
    task_rng,
)
from .open_system import averaged_master_scenario
from .runio import (
    RunConfig,
    RunManifest,
    _json_safe,
    make_config,
    write_grid_csv,
    write_json,
    write_spectrum_csv,
    write_timeseries_csv,
)
from .statespace import enumerate_basis
from .superatom import distance_sweep, two_ensemble_scenario

# Number of extra configurations used to confirm that the truncation
# level of wide-trap presets is converged (run at m and m+1).
CONVERGENCE_CHECK_CONFIGS = 100


class UnknownPresetError(ValueError):
    def __init__(self, name: str):
        super().__init__(
            f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}"
        )


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    pipeline: str
    overrides: dict = field(default_factory=dict)
    variants: dict = field(default_factory=dict)
    convergence_check: bool = False


PRESETS: dict[str, Preset] = {
    p.name: p
    for p in [
        Preset(
            "fig2a",
            "Tight Poissonian cloud (r = 2 um, nbar = 7): clean collapse and revival",
            "ensemble",
        ),
        Preset(
            "fig2b",
            "r = 3 um cloud: partial blockade breakdown",
            "ensemble",
            {"trap_sigma_um": 3.0},
        ),
        Preset(
            "fig2c",
            "r = 4 um cloud: revivals suppressed",
            "ensemble",
            {"trap_sigma_um": 4.0},
            convergence_check=True,
        ),
        Preset(
            "fig2d",
            "r = 5 um cloud: revivals absent",
            "ensemble",
            {"trap_sigma_um": 5.0},
            convergence_check=True,
        ),
        Preset(
            "fig2e",
            "Trap-radius sweep r = 2..5 um: P_Ry(r, t) surface",
            "radius_sweep",
        ),
        Preset(
            "fig3a",
            "Detection efficiency T = 0.1 applied to the r = 2 um scenario",
            "detection",
            {"detection_t": 0.1},
            variants={"r4": {"trap_sigma_um": 4.0}},
        ),
        Preset(
            "fig3b",
            "Detection efficiency T = 0.5 applied to the r = 2 um scenario",
            "detection",
            {"detection_t": 0.5},
            variants={"r4": {"trap_sigma_um": 4.0}},
        ),
        Preset(
            "fig3c",
            "Blockaded master equation with radiative decay only "
            "(gamma2/2pi = 0.8 kHz)",
            "master",
            {"gamma2_khz": 0.8, "gamma_khz": 0.0},
        ),
        Preset(
            "fig3d",
            "Blockaded master equation with laser-linewidth dephasing "
            "(gamma/2pi = 10 kHz, variant: 100 kHz)",
            "master",
            {"gamma2_khz": 0.8, "gamma_khz": 10.0},
            variants={"gamma100": {"gamma_khz": 100.0}},
        ),
        Preset(
            "fig4a",
            "3x3 lattice, 50% loading, d = 3 um (variant: d = 5 um)",
            "ensemble",
            {
                "trap_kind": "lattice",
                "lattice_rows": 3,
                "lattice_cols": 3,
                "lattice_spacing_um": 3.0,
            },
            variants={"d5": {"lattice_spacing_um": 5.0}},
        ),
        Preset(
            "fig4b",
            "2x2 lattice, 50% loading, d = 4 um",
            "ensemble",
            {
                "trap_kind": "lattice",
                "lattice_rows": 2,
                "lattice_cols": 2,
                "lattice_spacing_um": 4.0,
            },
        ),
        Preset(
            "fig5a",
            "Two traps, nbar = 10 each, d = 20 um: independent superatoms",
            "pair",
            {"nbar": 10.0, "pair_distance_um": 20.0, "samples": 500},
        ),
        Preset(
            "fig5b",
            "Two traps, nbar = 10 each, d = 4 um: one merged superatom",
            "pair",
            {"nbar": 10.0, "pair_distance_um": 4.0, "samples": 500},
        ),
        Preset(
            "fig5c",
            "Two-trap separation sweep d = 4..20 um: N_Ry(d, t) surface",
            "distance_sweep",
            {"nbar": 10.0, "samples": 500},
        ),
        Preset(
            "fig5d",
            "Fourier spectra of the d = 4 um and d = 20 um two-trap runs",
            "pair_spectrum",
            {"nbar": 10.0, "samples": 500},
        ),
    ]
}

FIG2E_RADII = np.arange(2.0, 5.001, 0.25)
FIG5C_DISTANCES = np.arange(4.0, 20.001, 1.0)

# Spectra of collapse/revival records are read with the rectangular
# window: the coherent oscillation sits at the edges of the record,
# which a tapering window would suppress.
_PEAK_WINDOW = "rect"


def resolve_config(name: str, overrides: dict | None = None) -> RunConfig:
    if name not in PRESETS:
        raise UnknownPresetError(name)
    merged = dict(PRESETS[name].overrides)
    merged.update(overrides or {})
    return make_config(merged)


def run_preset(
    name: str,
    overrides: dict | None = None,
    out_dir: str | Path = ".",
    progress=None,
) -> RunManifest:
    """Execute one preset end to end and write its outputs.

    ``overrides`` maps config keys (e.g. ``samples``, ``seed``) onto
    replacement values; ``out_dir`` is created if needed.
    """
    if name not in PRESETS:
        raise UnknownPresetError(name)
    preset = PRESETS[name]
    config = resolve_config(name, overrides)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    started = time.perf_counter()
    runner = _PIPELINES[preset.pipeline]
    derived, outputs = runner(preset, config, out, progress)
    manifest = RunManifest(
        preset=name,
        config=config.as_dict(),
        derived=_json_safe(derived),
        outputs=[str(p.name) for p in outputs],
        wall_time_s=time.perf_counter() - started,
    )
    manifest_path = out / f"{name}_manifest.json"
    manifest.write(manifest_path)
    return manifest


# ---- pipeline bodies -------------------------------------------------

def _series_metrics(time_grid, values, label):
    ts = TimeSeries(time_grid, values)
    spectrum = fourier_spectrum(ts, window=_PEAK_WINDOW)
    return {
        f"{label}_revival_contrast": revival_contrast(ts),
        f"{label}_peak_frequency_mhz": spectrum.peak_frequency,
    }


def _ensemble_summary(result: AveragedResult) -> dict:
    t = result.histogram.time_grid
    summary: dict = {}
    summary.update(_series_metrics(t, result.histogram.q[1], "q1"))
    summary.update(_series_metrics(t, result.n_ry, "nry"))
    summary["max_q2"] = (
        float(result.histogram.q[2].max()) if result.histogram.q.shape[0] > 2 else 0.0
    )
    for key in ("poisson_tail_mass", "retained_mass", "dropped_mass"):
        if key in result.metadata:
            summary[key] = result.metadata[key]
    return summary


def _run_ensemble(preset, config, out, progress):
    result = run_scenario(config.scenario(), progress=progress)
    files = [out / f"{preset.name}_timeseries.csv"]
    write_timeseries_csv(result, files[0])
    summary = _ensemble_summary(result)
    derived = {"metadata": result.metadata}

    if preset.convergence_check:
        check = truncation_convergence_check(config)
        summary["truncation_check"] = check
        derived["truncation_check"] = check

    for variant, extra in preset.variants.items():
        vconfig = replace(config, **extra)
        vresult = run_scenario(vconfig.scenario(), progress=progress)
        vpath = out / f"{preset.name}_{variant}_timeseries.csv"
        write_timeseries_csv(vresult, vpath)
        files.append(vpath)
        summary[variant] = _ensemble_summary(vresult)
        derived[f"metadata_{variant}"] = vresult.metadata

    spath = out / f"{preset.name}_summary.json"
    write_json(_json_safe(summary), spath)
    files.append(spath)
    return derived, files


def _run_radius_sweep(preset, config, out, progress):
    grid = radius_sweep(config.scenario(), FIG2E_RADII, progress=progress)
    files = [out / f"{preset.name}_grid.csv"]
    write_grid_csv(grid, files[0])
    summary = {
        "radii_um": list(FIG2E_RADII),
        "p_ry_revival_contrast": [
            revival_contrast(TimeSeries(grid.time_grid, row)) for row in grid.values
        ],
    }
    spath = out / f"{preset.name}_summary.json"
    write_json(_json_safe(summary), spath)
    files.append(spath)
    derived = {"per_radius_metadata": [r.metadata for r in grid.results]}
    return derived, files


def _run_detection(preset, config, out, progress):
    model = DetectionModel(config.detection_t)
    result = run_scenario(config.scenario(), progress=progress)
    detected = detected_timeseries(result.histogram, model)
    t = result.histogram.time_grid
    levels = np.arange(detected.q.shape[0])
    det_result = AveragedResult(
        histogram=detected,
        n_ry=levels @ detected.q,
        p_ry=detected.q[1:].sum(axis=0),
        metadata=dict(result.metadata, detection_t=config.detection_t),
    )
    files = [out / f"{preset.name}_timeseries.csv"]
    write_timeseries_csv(det_result, files[0])

    summary = {
        "detection_t": config.detection_t,
        "detected": _series_metrics(t, detected.q[1], "s1"),
        "undetected": _series_metrics(t, result.histogram.q[1], "q1"),
    }
    derived = {"metadata": det_result.metadata}

    for variant, extra in preset.variants.items():
        vconfig = replace(config, **extra)
        vresult = run_scenario(vconfig.scenario(), progress=progress)
        vdetected = detected_timeseries(vresult.histogram, model)
        vlevels = np.arange(vdetected.q.shape[0])
        vdet = AveragedResult(
            histogram=vdetected,
            n_ry=vlevels @ vdetected.q,
            p_ry=vdetected.q[1:].sum(axis=0),
            metadata=dict(vresult.metadata, detection_t=config.detection_t),
        )
        vpath = out / f"{preset.name}_{variant}_timeseries.csv"
        write_timeseries_csv(vdet, vpath)
        files.append(vpath)
        summary[variant] = _series_metrics(t, vdetected.q[1], "s1")
        derived[f"metadata_{variant}"] = vdet.metadata

    spath = out / f"{preset.name}_summary.json"
    write_json(_json_safe(summary), spath)
    files.append(spath)
    return derived, files


def _master_result(config: RunConfig) -> AveragedResult:
    t = config.time_grid()
    p_ry = averaged_master_scenario(
        config.atom_dist(), config.params().rabi, config.decay(), t
    )
    q = np.stack([1.0 - p_ry, p_ry])
    hist = ExcitationHistogram(time_grid=t, q=q)
    return AveragedResult(
        histogram=hist,
        n_ry=p_ry.copy(),
        p_ry=p_ry,
        metadata={
            "gamma2_khz": config.gamma2_khz,
            "gamma_khz": config.gamma_khz,
            "nbar": config.nbar,
            "nmax": config.nmax,
        },
    )


def _run_master(preset, config, out, progress):
    result = _master_result(config)
    t = result.histogram.time_grid
    files = [out / f"{preset.name}_timeseries.csv"]
    write_timeseries_csv(result, files[0])
    summary = {
        "gamma2_khz": config.gamma2_khz,
        "gamma_khz": config.gamma_khz,
    }
    summary.update(_series_metrics(t, result.p_ry, "pry"))
    summary["max_p_ry"] = float(result.p_ry.max())
    derived = {"metadata": result.metadata}

    for variant, extra in preset.variants.items():
        vconfig = replace(config, **extra)
        vresult = _master_result(vconfig)
        vpath = out / f"{preset.name}_{variant}_timeseries.csv"
        write_timeseries_csv(vresult, vpath)
        files.append(vpath)
        summary[variant] = {
            "gamma_khz": vconfig.gamma_khz,
            **_series_metrics(t, vresult.p_ry, "pry"),
            "max_p_ry": float(vresult.p_ry.max()),
        }
        derived[f"metadata_{variant}"] = vresult.metadata

    spath = out / f"{preset.name}_summary.json"
    write_json(_json_safe(summary), spath)
    files.append(spath)
    return derived, files


def _pair_result(config: RunConfig) -> AveragedResult:
    return two_ensemble_scenario(
        mean_atoms=config.nbar,
        distance=config.pair_distance_um,
        cloud_sigma=config.trap_sigma_um,
        params=config.params(),
        time_grid=config.time_grid(),
        samples=config.samples,
        seed=config.seed,
        n_max=config.nmax,
        workers=config.workers,
    )


def _run_pair(preset, config, out, progress):
    result = _pair_result(config)
    t = result.histogram.time_grid
    files = [out / f"{preset.name}_timeseries.csv"]
    write_timeseries_csv(result, files[0])
    summary = {"distance_um": config.pair_distance_um}
    summary.update(_series_metrics(t, result.n_ry, "nry"))
    spath = out / f"{preset.name}_summary.json"
    write_json(_json_safe(summary), spath)
    files.append(spath)
    return {"metadata": result.metadata}, files


def _run_distance_sweep(preset, config, out, progress):
    grid = distance_sweep(
        mean_atoms=config.nbar,
        distances=FIG5C_DISTANCES,
        cloud_sigma=config.trap_sigma_um,
        params=config.params(),
        time_grid=config.time_grid(),
        samples=config.samples,
        seed=config.seed,
        n_max=config.nmax,
        workers=config.workers,
    )
    files = [out / f"{preset.name}_grid.csv"]
    write_grid_csv(grid, files[0])
    summary = {
        "distances_um": list(FIG5C_DISTANCES),
        "nry_revival_contrast": [
            revival_contrast(TimeSeries(grid.time_grid, row)) for row in grid.values
        ],
    }
    spath = out / f"{preset.name}_summary.json"
    write_json(_json_safe(summary), spath)
    files.append(spath)
    return {"per_distance_metadata": [r.metadata for r in grid.results]}, files


def _run_pair_spectrum(preset, config, out, progress):
    t = config.time_grid()
    summary: dict = {}
    files = []
    for label, d in (("d4", 4.0), ("d20", 20.0)):
        result = _pair_result(replace(config, pair_distance_um=d))
        spectrum = fourier_spectrum(TimeSeries(t, result.n_ry), window=_PEAK_WINDOW)
        path = out / f"{preset.name}_{label}_spectrum.csv"
        write_spectrum_csv(spectrum, path)
        files.append(path)
        summary[f"peak_{label}_mhz"] = spectrum.peak_frequency
    summary["window"] = _PEAK_WINDOW
    summary["bin_width_mhz"] = float(1.0 / (config.n_time_points * (t[1] - t[0])))
    spath = out / f"{preset.name}_summary.json"
    write_json(_json_safe(summary), spath)
    files.append(spath)
    return {}, files


def truncation_convergence_check(
    config: RunConfig, n_configs: int | None = None
) -> dict:
    """Re-propagate random configurations at m and m+1 and report the
    worst disagreement on the shared rows q[0..m-1].

    Atom numbers are drawn from the scenario's distribution (seed
    namespace 2), so the check spends effort where the run does.
    """
    if n_configs is None:
        n_configs = min(CONVERGENCE_CHECK_CONFIGS, config.samples)
    spec = config.scenario()
    m = (
        spec.max_excitations
        if spec.max_excitations is not None
        else default_max_excitations(spec.geometry)
    )
    cutoff = spec.energy_cutoff_factor * spec.params.rabi
    worst = 0.0
    for i in range(n_configs):
        rng = task_rng(spec.seed, 2, i)
        n = sample_atom_number(spec.atom_dist, rng)
        if n == 0:
            continue
        configuration = sample_positions(spec.geometry, n, rng)
        qs = []
        for level in (min(m, n), min(m + 1, n)):
            space = enumerate_basis(n, level)
            h = build_hamiltonian(spec.params, configuration, space, cutoff)
            qs.append(evolve(h, space, spec.time_grid).q)
        shared = min(qs[0].shape[0], qs[1].shape[0], m)
        worst = max(worst, float(np.max(np.abs(qs[0][:shared] - qs[1][:shared]))))
    return {
        "configs": n_configs,
        "max_excitations": m,
        "max_abs_dq": worst,
        "converged_1e4": bool(worst < 1e-4),
    }


_PIPELINES = {
    "ensemble": _run_ensemble,
    "radius_sweep": _run_radius_sweep,
    "detection": _run_detection,
    "master": _run_master,
    "pair": _run_pair,
    "distance_sweep": _run_distance_sweep,
    "pair_spectrum": _run_pair_spectrum,
}
