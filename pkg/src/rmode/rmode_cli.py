#!/usr/bin/env python3
"""
CLI for MF R-Mode ground-wave signal-strength runs.

Usage:
    python rmode_cli.py fit curves/*.txt --out output/fit [--c-range 150 250] [--plot-dir output/fit/plots]
    python rmode_cli.py point --config config/run.example.yaml --rx-lat 36.2 --rx-lon 129.3
    python rmode_cli.py point --config config/run.example.yaml --range 100km --bearing 90
    python rmode_cli.py coverage --config config/run.example.yaml --format csv png [--n-jobs 4]
    python rmode_cli.py ea-table 0.005 0.003 --policy nearest
    python rmode_cli.py coverage --config config/run.example.yaml --dump-config

Exit codes:
    0  success
    2  usage, configuration or input parse error
    3  fit failure
    4  propagation error (degenerate path, outside raster, NoData, value not in table)
    5  export failure
"""

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

# Add src directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    # dotenv is optional
    pass

from rmode.conductivity import (
    ConductivityRaster,
    EaTable,
    apply_landcover_mapping,
    load_ea_table,
    load_landcover_mapping,
    load_landcover_raster,
    load_raster,
    lookup_ea,
)
from rmode.config import RunConfig, parse_distance
from rmode.core import (
    AntipodalPathError,
    BelowMinRangeError,
    ConfigError,
    DegenerateCurveError,
    DegeneratePathError,
    FitDivergedError,
    GridEncodingError,
    InterpolationError,
    InvalidConductivityError,
    InvalidParamsError,
    InvalidSigmaError,
    NoCurvesError,
    NoDataCellError,
    NonFiniteInputError,
    OutsideRasterError,
    PARAM_PRESETS,
    ParseError,
    PropagationParams,
    UnmappedClassError,
)
from rmode.core.logging import configure_logging, get_logger
from rmode.coverage import compute_coverage, write_grid_files
from rmode.fitting import (
    SearchConfig,
    fit_ea_table,
    fit_global,
    load_curve,
    load_fit_ea_table,
    load_params,
    profile_sse,
    save_ea_table,
    save_fit_report,
    save_fit_result,
)
from rmode.geo import GeoPoint, destination_point
from rmode.propagation import PathTracer

logger = get_logger("rmode.cli")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FIT = 3
EXIT_PROPAGATION = 4
EXIT_EXPORT = 5

# Input problems reported with EXIT_USAGE.
_INPUT_ERRORS = (
    ConfigError,
    ParseError,
    InvalidSigmaError,
    InvalidParamsError,
    InvalidConductivityError,
    UnmappedClassError,
    FileNotFoundError,
)

_PROPAGATION_ERRORS = (
    DegeneratePathError,
    AntipodalPathError,
    OutsideRasterError,
    NoDataCellError,
    BelowMinRangeError,
    InterpolationError,
)


def setup_logging(verbose: bool = False) -> None:
    """Configure logging."""
    configure_logging(verbose=verbose)


def _fail(message: str, code: int) -> int:
    logger.error(message)
    print(f"Error: {message}", file=sys.stderr)
    return code


# ============================================================================
# Config and input loading
# ============================================================================

def build_config(args) -> RunConfig:
    """Defaults < --config file < RMODE_OUTPUT_DIR < flags."""
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    config = config.apply_env()

    step_m = None
    if args.step_m is not None:
        try:
            step_m = parse_distance(args.step_m)
        except ValueError as e:
            raise ConfigError(str(e))

    config = config.with_overrides(
        params=args.params,
        params_preset=args.preset,
        ea_table=args.ea_table,
        ea_policy=args.policy,
        max_step_m=step_m,
        output_dir=args.out,
        output_formats=args.format,
        fallback_sigma=args.fallback_sigma,
        n_jobs=args.n_jobs,
        conductivity_raster=args.raster,
        uniform_sigma=args.uniform_sigma,
        transmitter_id=getattr(args, "tx_id", None),
        tx_lat=getattr(args, "tx_lat", None),
        tx_lon=getattr(args, "tx_lon", None),
        power_offset_db=getattr(args, "power_offset", None),
    )
    if args.no_fallback:
        config = replace(config, fallback_sigma=None)
    return config


def load_ground(config: RunConfig) -> ConductivityRaster:
    """Conductivity raster from the config (uniform, conductivity file or land cover)."""
    if config.uniform_sigma is not None:
        logger.info(f"Uniform ground, sigma={config.uniform_sigma} S/m")
        return ConductivityRaster.uniform(config.uniform_sigma)
    if config.landcover_mapping is not None:
        classes = load_landcover_raster(config.conductivity_raster, config.raster_format)
        mapping = load_landcover_mapping(config.landcover_mapping)
        logger.info(f"Land-cover raster {config.conductivity_raster} with {len(mapping)} class mappings")
        return apply_landcover_mapping(classes, mapping)
    raster = load_raster(config.conductivity_raster, config.raster_format)
    logger.info(f"Conductivity raster {config.conductivity_raster}: {raster.n_rows}x{raster.n_cols} cells")
    return raster


def load_table(config: RunConfig) -> EaTable:
    """ea table from a table file, a saved fit result, or the built-in MF R-Mode table."""
    if config.ea_table is None:
        return EaTable.default()
    if Path(config.ea_table).suffix.lower() in (".yaml", ".yml"):
        return load_fit_ea_table(config.ea_table)
    return load_ea_table(config.ea_table)


def resolve_params(config: RunConfig) -> PropagationParams:
    if config.params is not None:
        return load_params(config.params)
    if config.c_dbuvm is not None:
        return PropagationParams(config.c_dbuvm, config.e_exponent)
    return PARAM_PRESETS[config.params_preset]


# ============================================================================
# Commands
# ============================================================================

def cmd_fit(args) -> int:
    """Fit C, e and per-conductivity ea to reference curve files."""
    if not args.curves:
        args.parser.print_usage(sys.stderr)
        return _fail("fit needs at least one curve file", EXIT_USAGE)

    try:
        config = build_config(args)
        if args.dump_config:
            print(config.dump(), end="")
            return EXIT_OK
        config.validate(require_transmitter=False)
        search = SearchConfig(
            c_min=args.c_range[0],
            c_max=args.c_range[1],
            e_min=args.e_range[0],
            e_max=args.e_range[1],
            n_jobs=config.n_jobs,
        )
    except _INPUT_ERRORS as e:
        return _fail(str(e), EXIT_USAGE)
    except ValueError as e:
        return _fail(f"Invalid search bounds: {e}", EXIT_USAGE)

    curves = []
    for path in args.curves:
        try:
            curves.append(load_curve(path))
        except (ParseError, FileNotFoundError) as e:
            return _fail(f"{path}: {e}", EXIT_USAGE)

    out_dir = Path(config.output_dir)
    try:
        if args.fixed_params:
            params = resolve_params(config)
            table = fit_ea_table(curves, params)
            sse = profile_sse(curves, params)
        else:
            result = fit_global(curves, search)
    except (NoCurvesError, DegenerateCurveError, NonFiniteInputError, FitDivergedError) as e:
        label = getattr(e, "source_label", None)
        return _fail(f"Fit failed{f' for {label}' if label else ''}: {e}", EXIT_FIT)
    except _INPUT_ERRORS as e:
        return _fail(str(e), EXIT_USAGE)
    except ValueError as e:
        return _fail(f"Fit failed: {e}", EXIT_FIT)

    if args.fixed_params:
        print(f"# C={params.c_dbuvm} e={params.e_exponent} sse={sse:.6g}")
        print(table.to_text(), end="")
        try:
            save_ea_table(table, out_dir / "ea_table.txt")
        except OSError as e:
            return _fail(f"Cannot write fit outputs: {e}", EXIT_EXPORT)
        return EXIT_OK

    print(result.report(), end="")
    try:
        save_fit_result(result, out_dir / "fit_result.yaml")
        save_fit_report(result, out_dir / "fit_report.txt")
        try:
            save_ea_table(result.to_ea_table(), out_dir / "ea_table.txt")
        except ValueError as e:
            logger.warning(f"No ea_table.txt written: {e}")
        if args.plot_dir:
            from rmode.fitting.plotting import plot_fit_comparison

            for curve, (_, ea) in zip(curves, result.ea_by_sigma):
                plot_fit_comparison(
                    curve,
                    result.params,
                    ea,
                    Path(args.plot_dir) / f"fit_sigma_{curve.sigma_s_per_m:g}.png",
                )
    except OSError as e:
        return _fail(f"Cannot write fit outputs: {e}", EXIT_EXPORT)
    return EXIT_OK


def cmd_point(args) -> int:
    """Predict field strength at one receiver."""
    try:
        config = build_config(args)
        if args.dump_config:
            print(config.dump(), end="")
            return EXIT_OK
        config.validate(require_transmitter=True)
        tx = config.transmitter()

        if args.range is not None:
            if args.bearing is None:
                raise ConfigError("--range needs --bearing")
            rx = destination_point(tx.location, args.bearing, parse_distance(args.range))
        elif args.rx_lat is not None and args.rx_lon is not None:
            rx = GeoPoint(args.rx_lat, args.rx_lon)
        else:
            raise ConfigError("Give --rx-lat/--rx-lon or --range/--bearing")

        raster = load_ground(config)
        table = load_table(config)
        params = resolve_params(config)
        tracer = PathTracer(
            raster,
            table,
            policy=config.ea_policy,
            max_step_m=config.max_step_m,
            fallback_sigma=config.fallback_sigma,
        )
    except _INPUT_ERRORS as e:
        return _fail(str(e), EXIT_USAGE)
    except ValueError as e:
        return _fail(str(e), EXIT_USAGE)

    try:
        prediction = tracer.predict(tx, rx, params)
    except _PROPAGATION_ERRORS as e:
        return _fail(f"{type(e).__name__}: {e}", EXIT_PROPAGATION)

    if prediction.near_field:
        logger.warning(f"Receiver is {prediction.r_m:.1f} m from the transmitter; near-field result is advisory")
    print(
        f"r_m={prediction.r_m:.3f} "
        f"extra_atten_dB={prediction.extra_atten_db:.6f} "
        f"field_dBuVm={prediction.field_dbuvm:.6f} "
        f"fallback_cells={prediction.fallback_cells} "
        f"fallback_steps={prediction.fallback_steps}"
    )
    return EXIT_OK


def cmd_coverage(args) -> int:
    """Sweep a coverage grid and export it."""
    try:
        config = build_config(args)
        if args.dump_config:
            print(config.dump(), end="")
            return EXIT_OK
        config.validate(require_transmitter=True, require_grid=True)
        tx = config.transmitter()
        spec = config.grid_spec()
        raster = load_ground(config)
        table = load_table(config)
        params = resolve_params(config)
    except _INPUT_ERRORS as e:
        return _fail(str(e), EXIT_USAGE)
    except ValueError as e:
        return _fail(str(e), EXIT_USAGE)

    started = time.perf_counter()
    try:
        grid = compute_coverage(
            tx,
            raster,
            table,
            params,
            spec,
            max_step_m=config.max_step_m,
            policy=config.ea_policy,
            fallback_sigma=config.fallback_sigma,
            n_jobs=config.n_jobs,
        )
    except _PROPAGATION_ERRORS as e:
        return _fail(f"{type(e).__name__}: {e}", EXIT_PROPAGATION)
    elapsed = time.perf_counter() - started

    try:
        written = write_grid_files(
            grid,
            config.output_dir,
            config.output_stem,
            config.output_formats,
            vmin=config.png_vmin,
            vmax=config.png_vmax,
        )
        if args.map:
            from rmode.coverage.plotting import render_coverage_map

            written["map"] = render_coverage_map(
                grid,
                Path(config.output_dir) / f"{config.output_stem}_map.png",
                vmin=config.png_vmin,
                vmax=config.png_vmax,
            )
    except GridEncodingError as e:
        return _fail(str(e), EXIT_EXPORT)
    except OSError as e:
        return _fail(f"Export failed: {e}", EXIT_EXPORT)

    summary = grid.summary()
    logger.info(f"Coverage wall time: {elapsed:.2f} s")
    print(
        f"cells={summary['cells']} "
        f"min_field_dBuVm={summary['min_field_dbuvm']} "
        f"max_field_dBuVm={summary['max_field_dbuvm']} "
        f"failed={summary['failed_cells']} "
        f"fallback_cells={summary['fallback_cells']}"
    )
    for name, path in written.items():
        print(f"{name}: {path}")
    return EXIT_OK


def cmd_ea_table(args) -> int:
    """Print ea for conductivities under the active policy."""
    try:
        config = build_config(args)
        if args.dump_config:
            print(config.dump(), end="")
            return EXIT_OK
        config.validate(require_transmitter=False)
        table = load_table(config)
    except _INPUT_ERRORS as e:
        return _fail(str(e), EXIT_USAGE)

    if not args.sigmas:
        print(table.to_text(), end="")
        return EXIT_OK

    lines = []
    for text in args.sigmas:
        try:
            sigma = float(text)
        except ValueError:
            return _fail(f"Invalid conductivity {text!r}", EXIT_USAGE)
        try:
            lookup = lookup_ea(sigma, table, config.ea_policy)
        except InvalidSigmaError as e:
            return _fail(str(e), EXIT_USAGE)
        except InterpolationError as e:
            return _fail(str(e), EXIT_PROPAGATION)
        flag = "" if lookup.source.value == "table" else f"  ({lookup.source.value})"
        lines.append(f"{sigma:g} {lookup.ea_db_per_m:.6e}{flag}")

    print("\n".join(lines))
    return EXIT_OK


# ============================================================================
# Argument parsing
# ============================================================================

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Run config YAML file")
    common.add_argument("--params", help="Saved fit result (YAML) providing C and e")
    common.add_argument("--preset", choices=sorted(PARAM_PRESETS), help="Built-in C/e preset")
    common.add_argument("--ea-table", help="ea table file or saved fit result")
    common.add_argument("--policy", choices=["exact_only", "loglin_interp", "nearest"], help="ea lookup policy")
    common.add_argument("--step-m", help="Path sampling step in meters (or with a km suffix)")
    common.add_argument("--raster", help="Conductivity raster file")
    common.add_argument("--uniform-sigma", type=float, help="Uniform ground conductivity in S/m")
    common.add_argument("--fallback-sigma", type=float, help="Conductivity outside the raster / on NoData cells")
    common.add_argument("--no-fallback", action="store_true", help="Fail on steps outside the raster")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--format", nargs="+", choices=["csv", "esri_ascii", "png"], help="Output format(s)")
    common.add_argument("--n-jobs", type=int, help="Parallel workers (joblib)")
    common.add_argument("--dump-config", action="store_true", help="Print the effective config and exit")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable debug logging")
    return common


def _add_transmitter_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tx-id", help="Transmitter identifier")
    parser.add_argument("--tx-lat", type=float, help="Transmitter latitude (deg)")
    parser.add_argument("--tx-lon", type=float, help="Transmitter longitude (deg)")
    parser.add_argument("--power-offset", type=float, help="Power offset added to C (dB)")


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        description="MF R-Mode ground-wave signal strength simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", help="Command to execute")
    common = _common_parser()

    # Fit command
    fit_parser = subparsers.add_parser("fit", parents=[common], help="Fit model constants to reference curves")
    fit_parser.add_argument("curves", nargs="*", help="Reference curve files")
    fit_parser.add_argument("--c-range", nargs=2, type=float, default=[150.0, 250.0], metavar=("MIN", "MAX"))
    fit_parser.add_argument("--e-range", nargs=2, type=float, default=[1.5, 3.0], metavar=("MIN", "MAX"))
    fit_parser.add_argument("--fixed-params", action="store_true", help="Only fit ea at fixed C and e; prints the table and writes ea_table.txt to --out")
    fit_parser.add_argument("--plot-dir", help="Write reference-vs-model figures here")
    fit_parser.set_defaults(parser=fit_parser)

    # Point command
    point_parser = subparsers.add_parser("point", parents=[common], help="Field strength at one receiver")
    _add_transmitter_args(point_parser)
    point_parser.add_argument("--rx-lat", type=float, help="Receiver latitude (deg)")
    point_parser.add_argument("--rx-lon", type=float, help="Receiver longitude (deg)")
    point_parser.add_argument("--range", help="Receiver range from the transmitter (m or km suffix)")
    point_parser.add_argument("--bearing", type=float, help="Receiver bearing from the transmitter (deg)")

    # Coverage command
    coverage_parser = subparsers.add_parser("coverage", parents=[common], help="Coverage grid sweep")
    _add_transmitter_args(coverage_parser)
    coverage_parser.add_argument("--map", action="store_true", help="Also render an annotated map figure")

    # ea-table command
    ea_parser = subparsers.add_parser("ea-table", parents=[common], help="Extra attenuation per conductivity")
    ea_parser.add_argument("sigmas", nargs="*", help="Conductivities in S/m")

    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    setup_logging(verbose=getattr(args, "verbose", False))

    if args.command == "fit":
        return cmd_fit(args)
    elif args.command == "point":
        return cmd_point(args)
    elif args.command == "coverage":
        return cmd_coverage(args)
    elif args.command == "ea-table":
        return cmd_ea_table(args)
    else:
        print("No command specified. Use --help for usage.", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
