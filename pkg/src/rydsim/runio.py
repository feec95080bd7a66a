"""Configuration files, deterministic output writing, run manifests.

Config files are flat ``key = value`` text (one key per line, ``#``
comments); all physical quantities are in the units experimentalists
quote (MHz, MHz*um^6, kHz, um, us) and are converted to internal
angular units on load.  A written run manifest can be fed back as a
config file and reproduces the outputs byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import PhysicalParams
from .ensemble import ScenarioSpec, SweepGrid, TrapGeometry
from .jc_model import BinomialDist, PoissonDist
from .open_system import DecayParams
from .units import khz_to_angular, mhz_to_angular


class ConfigError(ValueError):
    """A configuration file could not be validated."""


def _positive(x):
    return x > 0


def _non_negative(x):
    return x >= 0


def _unit_interval(x):
    return 0.0 <= x <= 1.0


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters in config-file units.

    Defaults reproduce the tight-trap Poissonian scenario (Omega/2pi =
    1 MHz, C6/2pi = 3.2e6 MHz*um^6, nbar = 7, r = 2 um, 10 us record).
    """

    omega_mhz: float = 1.0
    c6_mhz_um6: float = 3.2e6
    nbar: float = 7.0
    nmax: int = 20
    trap_kind: str = "gaussian_cloud"
    trap_sigma_um: float = 2.0
    lattice_rows: int = 3
    lattice_cols: int = 3
    lattice_spacing_um: float = 3.0
    load_prob: float = 0.5
    t_max_us: float = 10.0
    n_time_points: int = 201
    max_excitations: int | None = None  # None: rule-of-thumb by trap size
    energy_cutoff_factor: float = 1e4
    gamma2_khz: float = 0.0
    gamma_khz: float = 0.0
    detection_t: float = 1.0
    pair_distance_um: float = 20.0
    samples: int = 2000
    seed: int = 12345
    workers: int = 1

    # ---- derived, internal-unit views -------------------------------
    def params(self) -> PhysicalParams:
        return PhysicalParams(
            rabi=mhz_to_angular(self.omega_mhz),
            c6=mhz_to_angular(self.c6_mhz_um6),
        )

    def decay(self) -> DecayParams:
        return DecayParams(
            gamma2=khz_to_angular(self.gamma2_khz),
            gamma=khz_to_angular(self.gamma_khz),
        )

    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max_us, self.n_time_points)

    def geometry(self) -> TrapGeometry:
        if self.trap_kind == "gaussian_cloud":
            return TrapGeometry.gaussian_cloud(self.trap_sigma_um)
        return TrapGeometry.square_lattice(
            self.lattice_rows, self.lattice_cols, self.lattice_spacing_um
        )

    def atom_dist(self):
        if self.trap_kind == "gaussian_cloud":
            return PoissonDist(mean=self.nbar, n_max=self.nmax)
        return BinomialDist(
            trials=self.lattice_rows * self.lattice_cols,
            success_prob=self.load_prob,
        )

    def scenario(self) -> ScenarioSpec:
        return ScenarioSpec(
            geometry=self.geometry(),
            atom_dist=self.atom_dist(),
            params=self.params(),
            time_grid=self.time_grid(),
            max_excitations=self.max_excitations,
            samples=self.samples,
            seed=self.seed,
            energy_cutoff_factor=self.energy_cutoff_factor,
            workers=self.workers,
        )

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = "auto" if value is None else value
        return out


_PARSERS = {
    "omega_mhz": (float, _positive, "must be > 0"),
    "c6_mhz_um6": (float, _positive, "must be > 0"),
    "nbar": (float, _positive, "must be > 0"),
    "nmax": (int, lambda x: x >= 1, "must be >= 1"),
    "trap_kind": (
        str,
        lambda x: x in ("gaussian_cloud", "lattice"),
        "must be 'gaussian_cloud' or 'lattice'",
    ),
    "trap_sigma_um": (float, _positive, "must be > 0"),
    "lattice_rows": (int, lambda x: x >= 1, "must be >= 1"),
    "lattice_cols": (int, lambda x: x >= 1, "must be >= 1"),
    "lattice_spacing_um": (float, _positive, "must be > 0"),
    "load_prob": (float, _unit_interval, "must lie in [0, 1]"),
    "t_max_us": (float, _positive, "must be > 0"),
    "n_time_points": (int, lambda x: x >= 16, "must be >= 16"),
    "max_excitations": (
        lambda s: None if s == "auto" else int(s),
        lambda x: x is None or x >= 1,
        "must be 'auto' or an integer >= 1",
    ),
    "energy_cutoff_factor": (float, _positive, "must be > 0"),
    "gamma2_khz": (float, _non_negative, "must be >= 0"),
    "gamma_khz": (float, _non_negative, "must be >= 0"),
    "detection_t": (float, _unit_interval, "must lie in [0, 1]"),
    "pair_distance_um": (float, _positive, "must be > 0"),
    "samples": (int, lambda x: x >= 1, "must be >= 1"),
    "seed": (int, lambda x: True, ""),
    "workers": (int, lambda x: x >= 1, "must be >= 1"),
}


def make_config(raw: dict) -> RunConfig:
    """Validate a key -> value mapping (strings or typed) into a
    RunConfig; unknown keys and domain violations raise ConfigError
    naming the key."""
    values = {}
    for key, value in raw.items():
        if key not in _PARSERS:
            raise ConfigError(
                f"unknown config key {key!r}; valid keys: "
                + ", ".join(sorted(_PARSERS))
            )
        parser, check, clause = _PARSERS[key]
        try:
            if isinstance(value, str):
                parsed = parser(value)
            elif key == "max_excitations":
                parsed = None if value is None else int(value)
            else:
                parsed = parser(value)  # type: ignore[arg-type]
        except (TypeError, ValueError) as err:
            raise ConfigError(f"config key {key!r}: cannot parse {value!r}") from err
        if not check(parsed):
            raise ConfigError(f"config key {key!r} {clause}, got {parsed!r}")
        values[key] = parsed
    return RunConfig(**values)


def load_config(path: str | Path) -> RunConfig:
    """Load a flat key=value config file, or the ``config`` block of a
    previously written run manifest (JSON)."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        manifest = json.loads(text)
        if "config" not in manifest:
            raise ConfigError(f"{path}: JSON file has no 'config' block")
        return make_config(manifest["config"])

    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return make_config(raw)


# ---- deterministic writers ------------------------------------------

def format_number(x: float) -> str:
    """Fixed 12-significant-digit, locale-independent rendering."""
    return f"{float(x):.12g}"


def write_timeseries_csv(result, path: str | Path) -> None:
    """Write an averaged result as ``t_us,q0,...,NRy,PRy`` rows.

    12 significant digits, LF newlines, '.' decimal point.  An empty
    time grid produces a header-only file.
    """
    hist = result.histogram
    n_levels = hist.q.shape[0]
    header = "t_us," + ",".join(f"q{n}" for n in range(n_levels)) + ",NRy,PRy"
    lines = [header]
    for j, t in enumerate(hist.time_grid):
        cells = [format_number(t)]
        cells += [format_number(hist.q[n, j]) for n in range(n_levels)]
        cells.append(format_number(result.n_ry[j]))
        cells.append(format_number(result.p_ry[j]))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_timeseries_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Read a timeseries CSV back as column name -> array."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [line for line in text.splitlines() if line]
    names = lines[0].split(",")
    rows = [[float(cell) for cell in line.split(",")] for line in lines[1:]]
    data = np.array(rows) if rows else np.empty((0, len(names)))
    return {name: data[:, i] for i, name in enumerate(names)}


def write_grid_csv(grid: SweepGrid, path: str | Path) -> None:
    """Write a sweep surface as ``<axis>,t_us,value`` rows (axis-major)."""
    lines = [f"{grid.axis_name},t_us,value"]
    for i, a in enumerate(grid.axis):
        for j, t in enumerate(grid.time_grid):
            lines.append(
                f"{format_number(a)},{format_number(t)},{format_number(grid.values[i, j])}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_spectrum_csv(spectrum, path: str | Path) -> None:
    lines = ["f_mhz,magnitude"]
    for f, m in zip(spectrum.frequencies, spectrum.magnitudes):
        lines.append(f"{format_number(f)},{format_number(m)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_json(payload: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
        newline="\n",
    )


@dataclass(eq=False)
class RunManifest:
    """Everything needed to reproduce a run: the resolved configuration
    plus derived quantities and the files it produced.  ``wall_time_s``
    is informational and the only field that varies between reruns."""

    preset: str
    config: dict
    derived: dict = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    tool_version: str = __version__
    wall_time_s: float = 0.0

    def as_dict(self) -> dict:
        return {
            "preset": self.preset,
            "tool_version": self.tool_version,
            "wall_time_s": self.wall_time_s,
            "config": self.config,
            "derived": self.derived,
            "outputs": self.outputs,
        }

    def write(self, path: str | Path) -> None:
        write_json(self.as_dict(), path)


def _json_safe(value):
    """Recursively convert numpy scalars/arrays for JSON output."""
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_safe(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value
