"""Command-line entry point.

Subcommands:
    run            execute a preset or a config file
    sweep          execute a sweep preset (fig2e or fig5c)
    spectrum       Fourier spectrum of a written timeseries CSV
    list-presets   show all preset names

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .analysis import TimeSeries, fourier_spectrum
from .presets import PRESETS, UnknownPresetError, run_preset
from .runio import (
    ConfigError,
    load_config,
    read_timeseries_csv,
    write_json,
    write_spectrum_csv,
)

_SWEEP_PRESETS = ("fig2e", "fig5c")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="rydsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command")

    def add_run_flags(p):
        p.add_argument("--preset", help="preset name (see list-presets)")
        p.add_argument("--config", help="flat key=value config file or manifest JSON")
        p.add_argument("--seed", type=int, help="override the random seed")
        p.add_argument("--samples", type=int, help="override the sample count")
        p.add_argument("--workers", type=int, help="worker process count")
        p.add_argument("--out", default=".", help="output directory (default: .)")

    run_p = sub.add_parser("run", help="run a preset or config file")
    add_run_flags(run_p)

    sweep_p = sub.add_parser("sweep", help="run a sweep preset (fig2e, fig5c)")
    add_run_flags(sweep_p)

    spec_p = sub.add_parser("spectrum", help="spectrum of a timeseries CSV column")
    spec_p.add_argument("--in", dest="infile", required=True, help="timeseries CSV")
    spec_p.add_argument("--column", default="NRy", help="column name (default NRy)")
    spec_p.add_argument(
        "--window", default="rect", choices=("rect", "hann"), help="window function"
    )
    spec_p.add_argument("--out", default=".", help="output directory")

    sub.add_parser("list-presets", help="list preset names")
    return parser


def _progress_printer(stream):
    state = {"last": -1}

    def update(done, total):
        step = max(1, total // 20)
        if done == total or done // step != state["last"]:
            state["last"] = done // step
            print(f"\r{done}/{total} configurations", end="", file=stream)
            if done == total:
                print(file=stream)

    return update


def _overrides_from_args(args) -> dict:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.samples is not None:
        overrides["samples"] = args.samples
    if args.workers is not None:
        overrides["workers"] = args.workers
    return overrides


def _cmd_run(args, sweep_only: bool) -> int:
    if bool(args.preset) == bool(args.config):
        raise UsageError("provide exactly one of --preset or --config")
    if args.preset:
        name = args.preset
        if name not in PRESETS:
            raise UnknownPresetError(name)
        if sweep_only and name not in _SWEEP_PRESETS:
            raise UsageError(
                f"'sweep' runs {', '.join(_SWEEP_PRESETS)}; use 'run' for {name}"
            )
        manifest = run_preset(
            name,
            overrides=_overrides_from_args(args),
            out_dir=args.out,
            progress=_progress_printer(sys.stderr),
        )
    else:
        config = load_config(args.config)
        for key, value in _overrides_from_args(args).items():
            config = replace(config, **{key: value})
        from .ensemble import run_scenario
        from .runio import RunManifest, write_timeseries_csv

        result = run_scenario(
            config.scenario(), progress=_progress_printer(sys.stderr)
        )
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        ts_path = out / "run_timeseries.csv"
        write_timeseries_csv(result, ts_path)
        manifest = RunManifest(
            preset="custom",
            config=config.as_dict(),
            derived={"metadata": result.metadata},
            outputs=[ts_path.name],
        )
        manifest.write(out / "run_manifest.json")
    print(f"wrote {', '.join(manifest.outputs)} to {args.out}")
    return 0


def _cmd_spectrum(args) -> int:
    columns = read_timeseries_csv(args.infile)
    if args.column not in columns:
        raise UsageError(
            f"column {args.column!r} not in {args.infile} "
            f"(have: {', '.join(columns)})"
        )
    series = TimeSeries(columns["t_us"], columns[args.column])
    spectrum = fourier_spectrum(series, window=args.window)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.infile).stem
    csv_path = out / f"{stem}_spectrum.csv"
    write_spectrum_csv(spectrum, csv_path)
    summary_path = out / f"{stem}_spectrum_summary.json"
    write_json(
        {
            "column": args.column,
            "window": args.window,
            "peak_frequency_mhz": spectrum.peak_frequency,
            "n_points": len(series.values),
        },
        summary_path,
    )
    print(f"peak {spectrum.peak_frequency:.4f} MHz; wrote {csv_path} and {summary_path}")
    return 0


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.command == "list-presets":
            for name, preset in PRESETS.items():
                print(f"{name:8s} {preset.description}")
            return 0
        if args.command == "spectrum":
            return _cmd_spectrum(args)
        return _cmd_run(args, sweep_only=args.command == "sweep")
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except (UsageError, UnknownPresetError, ConfigError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {err}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
