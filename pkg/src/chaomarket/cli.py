"""Command-line front end.

Five commands cover the whole workflow:

    simulate   one market run plus its standard analyses
    sweep      a lambda_b sweep with per-run artifacts and a summary table
    attractor  sampled bimap trajectory (the attractor's point cloud)
    spectrum   Fourier magnitudes of the x_t series and the dominant peak
    analyze    recompute analyses from a stored run directory

Each command reads an optional flat config file, applies --set overrides on
top, prints the fully resolved settings (each defaulted value marked)
unless -q is given, and writes plain CSV/JSON artifacts into the output
directory.
Exit codes: 0 on success, 1 for configuration/validation problems, 2 for
runtime failures (domain escape, missing or corrupt files).  Errors are
reported as one-line JSON records on stderr so pipelines can parse them.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .artifacts import (ArtifactError, read_series, read_simulation_output,
                        write_analysis_artifacts, write_peak,
                        write_run_artifacts, write_spectrum, write_trajectory)
from .config import (ANALYZE_KEYS, DYNAMICS_KEYS, ConfigError,
                     apply_overrides, build_dynamics_settings,
                     build_market_config, build_sweep_spec, check_keys,
                     flatten_dynamics_settings, flatten_market_config,
                     load_config_file)
from .dynamics import (DomainEscapeError, find_spectral_peak, power_spectrum,
                       trajectory)
from .market import run_simulation
from .stats import analyze_output
from .sweep import run_sweep

ENV_OUTPUT_DIR = "CHAOMARKET_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "out"


class _Parser(argparse.ArgumentParser):
    """argparse that raises on bad usage instead of exiting with code 2."""

    def error(self, message):
        raise ConfigError(message)


def _emit_error(kind: str, err: Exception) -> None:
    record = {"error": kind, "message": str(err)}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _merged_mapping(args) -> dict[str, str]:
    mapping = load_config_file(args.config) if getattr(args, "config", None) \
        else {}
    return apply_overrides(mapping, args.overrides)


def _resolve_output_dir(args) -> tuple[Path, bool]:
    """Resolved output directory and whether it was explicitly chosen."""
    if args.output_dir is not None:
        return Path(args.output_dir), True
    env = os.environ.get(ENV_OUTPUT_DIR)
    if env:
        return Path(env), True
    return Path(DEFAULT_OUTPUT_DIR), False


def _echo(resolved: dict[str, str], explicit: set[str], quiet: bool) -> None:
    """Print every resolved setting, marking the defaulted ones."""
    if quiet:
        return
    for key, value in resolved.items():
        marker = "" if key in explicit else "  # default"
        print(f"{key} = {value}{marker}")


def _cmd_simulate(args) -> int:
    mapping = _merged_mapping(args)
    cfg = build_market_config(mapping)
    out_dir, out_explicit = _resolve_output_dir(args)

    resolved = flatten_market_config(cfg)
    resolved["output_dir"] = str(out_dir)
    explicit = set(mapping) | ({"output_dir"} if out_explicit else set())
    _echo(resolved, explicit, args.quiet)

    output = run_simulation(cfg)
    analysis = analyze_output(output)
    paths = write_run_artifacts(out_dir, output, analysis)
    if not args.quiet:
        for path in paths:
            print(f"wrote {path}")
        print(f"transactions={output.transactions} "
              f"selections={output.stats.selections} "
              f"gini={analysis.gini:.6f} "
              f"passive={len(analysis.passive_agents)} "
              f"never_losers={len(analysis.never_losers)}")
    return 0


def _cmd_sweep(args) -> int:
    mapping = _merged_mapping(args)
    if args.output_dir is not None:
        mapping["output_dir"] = str(args.output_dir)
    env = os.environ.get(ENV_OUTPUT_DIR)
    spec = build_sweep_spec(mapping,
                            default_output_dir=env or DEFAULT_OUTPUT_DIR)

    base = flatten_market_config(spec.base_config)
    del base["lambda_b"]
    resolved = dict(base)
    resolved["lambda_b_values"] = ",".join(repr(v) for v in spec.values)
    resolved["parallel_runs"] = str(spec.parallel_runs)
    resolved["output_dir"] = str(spec.output_dir)
    explicit = set(mapping)
    if args.output_dir is not None or env:
        explicit.add("output_dir")
    _echo(resolved, explicit, args.quiet)

    summary = run_sweep(spec)
    failed = [row for row in summary.rows if row.error]
    if not args.quiet:
        for row in summary.rows:
            if row.error:
                print(f"lambda_b={row.lambda_b!r} FAILED: {row.error}")
            else:
                print(f"lambda_b={row.lambda_b!r} gini={row.gini:.6f} "
                      f"passive={row.passive_count} "
                      f"never_losers={row.never_loser_count}")
        print(f"wrote {spec.output_dir / 'sweep_summary.csv'}")
    if len(failed) == len(summary.rows):
        _emit_error("runtime", RuntimeError(
            f"all {len(failed)} sweep runs failed; first: {failed[0].error}"))
        return 2
    return 0


def _cmd_attractor(args) -> int:
    mapping = _merged_mapping(args)
    params, initial, burn_in, samples = build_dynamics_settings(
        mapping, default_samples=2000)
    out_dir, out_explicit = _resolve_output_dir(args)

    resolved = flatten_dynamics_settings(params, initial, burn_in, samples)
    resolved["output_dir"] = str(out_dir)
    explicit = set(mapping) | ({"output_dir"} if out_explicit else set())
    _echo(resolved, explicit, args.quiet)

    traj = trajectory(initial, params, burn_in, samples)
    path = Path(out_dir) / "trajectory.csv"
    write_trajectory(path, traj)
    if not args.quiet:
        print(f"wrote {path}")
    return 0


def _cmd_spectrum(args) -> int:
    mapping = _merged_mapping(args)
    out_dir, out_explicit = _resolve_output_dir(args)

    if args.series_csv is not None:
        check_keys(mapping, DYNAMICS_KEYS)  # map settings are unused here
        series = read_series(args.series_csv)
        resolved = {"series_csv": args.series_csv,
                    "samples": str(series.shape[0])}
        explicit = {"series_csv"} | set(mapping)
    else:
        params, initial, burn_in, samples = build_dynamics_settings(
            mapping, default_samples=4096)
        resolved = flatten_dynamics_settings(params, initial, burn_in,
                                             samples)
        explicit = set(mapping)
    resolved["output_dir"] = str(out_dir)
    if out_explicit:
        explicit.add("output_dir")
    _echo(resolved, explicit, args.quiet)

    if args.series_csv is None:
        traj = trajectory(initial, params, burn_in, samples)
        series = traj.x
    spectrum = power_spectrum(series)
    frequency, magnitude = find_spectral_peak(spectrum)

    spectrum_path = Path(out_dir) / "spectrum.csv"
    write_spectrum(spectrum_path, spectrum)
    peak_path = Path(out_dir) / "peak.json"
    write_peak(peak_path, frequency, magnitude)
    if not args.quiet:
        print(f"wrote {spectrum_path}")
        print(f"wrote {peak_path}")
        print(f"peak frequency={frequency!r} magnitude={magnitude!r}")
    return 0


def _cmd_analyze(args) -> int:
    mapping = apply_overrides({}, args.overrides)
    check_keys(mapping, ANALYZE_KEYS)
    exclude_passive = mapping.get("exclude_passive", "true").lower() == "true"
    coverage = float(mapping.get("coverage", "0.9"))
    tail_fraction = float(mapping.get("tail_fraction", "0.1"))

    resolved = {"run_dir": args.run_dir,
                "exclude_passive": "true" if exclude_passive else "false",
                "coverage": repr(coverage),
                "tail_fraction": repr(tail_fraction)}
    _echo(resolved, {"run_dir"} | set(mapping), args.quiet)

    output = read_simulation_output(args.run_dir)
    analysis = analyze_output(output, exclude_passive=exclude_passive,
                              coverage=coverage, tail_fraction=tail_fraction)
    paths = write_analysis_artifacts(Path(args.run_dir), analysis)
    if not args.quiet:
        for path in paths:
            print(f"wrote {path}")
        print(f"gini={analysis.gini:.6f} "
              f"passive={len(analysis.passive_agents)} "
              f"never_losers={len(analysis.never_losers)}")
    return 0


def _add_common_arguments(parser, with_config: bool = True) -> None:
    if with_config:
        parser.add_argument("--config", metavar="FILE",
                            help="flat 'key = value' config file")
    parser.add_argument("--set", dest="overrides", action="append",
                        default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    parser.add_argument("--output-dir", metavar="DIR", default=None,
                        help="artifact directory (default: "
                             f"${ENV_OUTPUT_DIR} or ./{DEFAULT_OUTPUT_DIR})")
    parser.add_argument("-q", "--quiet", action="store_true",
                        help="suppress the resolved-settings echo")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chaomarket",
                     description="chaotically coupled market simulator")
    commands = parser.add_subparsers(dest="command", required=True,
                                     metavar="command", parser_class=_Parser)

    p = commands.add_parser("simulate",
                            help="run one simulation and its analyses")
    _add_common_arguments(p)
    p.set_defaults(func=_cmd_simulate)

    p = commands.add_parser("sweep",
                            help="run a lambda_b sweep")
    _add_common_arguments(p)
    p.set_defaults(func=_cmd_sweep)

    p = commands.add_parser("attractor",
                            help="sample the selection map's attractor")
    _add_common_arguments(p)
    p.set_defaults(func=_cmd_attractor)

    p = commands.add_parser("spectrum",
                            help="spectrum of the map's x_t series")
    _add_common_arguments(p)
    p.add_argument("--series-csv", metavar="FILE", default=None,
                   help="analyze this stored one-column series instead of "
                        "generating a trajectory")
    p.set_defaults(func=_cmd_spectrum)

    p = commands.add_parser("analyze",
                            help="recompute analyses from a run directory")
    p.add_argument("run_dir", metavar="RUN_DIR",
                   help="directory holding final_money.csv and "
                        "simulation.json")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE",
                   help="analysis options: exclude_passive, coverage, "
                        "tail_fraction")
    p.add_argument("-q", "--quiet", action="store_true",
                   help="suppress the resolved-settings echo")
    p.set_defaults(func=_cmd_analyze)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as err:
        _emit_error("config", err)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as err:
        _emit_error("config", err)
        return 1
    except (DomainEscapeError, ArtifactError, OSError, RuntimeError,
            ValueError) as err:
        _emit_error("runtime", err)
        return 2


if __name__ == "__main__":
    sys.exit(main())
