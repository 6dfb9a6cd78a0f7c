"""Command-line surface: simulate, reconstruct, and corpus generation.

The CLI is a thin shell over the library; every behavior here is
reachable through the package API. Exit codes: 0 success, 1 runtime or
data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys

import numpy as np

from .beamform import (
    DEFAULT_SPEED_MPS,
    BeamformerConfig,
    ImagingGrid,
    export_png,
    reconstruct,
    write_image_array,
)
from .errors import ConfigurationError
from .forward_sim import (
    CorpusPlan,
    ScenarioSpec,
    SimulationConfig,
    _simulate_scenario_pair,
    corpus_generate,
    gen3_like_scenarios,
    split_corpus,
)
from .metrics import compute_quality, report_row, write_report_csv
from .scan_data import FrequencyAxis, ScanGeometry, calibrate, load_scan, write_scan

PRESETS = ("gen3-like",)
ALGO_CHOICES = ("das", "dmas", "ff")


###############################################################################
# Argument helpers
###############################################################################


def _split_ratio(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(
            "split ratio must lie strictly between 0 and 1"
        )
    return value


def _grid_spec(text):
    """Parse "H,N" (square, [-H, H], NxN) or "xmin,xmax,nx,ymin,ymax,ny"."""
    if text == "auto":
        return None
    parts = text.split(",")
    try:
        if len(parts) == 2:
            return ImagingGrid.square(float(parts[0]), int(parts[1]))
        if len(parts) == 6:
            return ImagingGrid(
                float(parts[0]), float(parts[1]),
                float(parts[3]), float(parts[4]),
                int(parts[2]), int(parts[5]),
            )
    except (ValueError, ConfigurationError) as exc:
        raise argparse.ArgumentTypeError(f"bad grid spec {text!r}: {exc}") from None
    raise argparse.ArgumentTypeError(
        f"bad grid spec {text!r}: expected 'H,N' or 'xmin,xmax,nx,ymin,ymax,ny'"
    )


def _add_geometry_args(sub):
    sub.add_argument("--antennas", type=int, default=72)
    sub.add_argument("--radius", type=float, default=0.15,
                     help="scan circle radius in meters")
    sub.add_argument("--span", type=float, default=355.0,
                     help="angular coverage in degrees")
    sub.add_argument("--f-start", type=float, default=1e9)
    sub.add_argument("--f-stop", type=float, default=9e9)
    sub.add_argument("--n-freq", type=int, default=1001)
    sub.add_argument("--speed", type=float, default=DEFAULT_SPEED_MPS,
                     help="assumed propagation speed in m/s")


def _add_scenario_source(sub):
    src = sub.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenarios", help="scenario spec file")
    src.add_argument("--preset", choices=PRESETS)


def _geometry_from_args(args):
    return (ScanGeometry.evenly_spaced(args.antennas, args.radius, args.span),
            FrequencyAxis(args.f_start, args.f_stop, args.n_freq))


###############################################################################
# Scenario files
###############################################################################


def load_scenario_file(path):
    """Parse a scenario spec file into ScenarioSpec objects.

    The file uses key/value sections; the optional [defaults] section
    supplies fall-back values, and each [scenario:<id>] section describes
    one scan. A file without scenario sections is a valid empty list.
    """
    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh, source=path)
    except FileNotFoundError:
        raise ConfigurationError(f"scenario file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigurationError(f"scenario parse error: {exc}") from None

    defaults = dict(parser["defaults"]) if parser.has_section("defaults") else {}
    specs = []
    for section in parser.sections():
        if not section.startswith("scenario:"):
            if section != "defaults":
                raise ConfigurationError(
                    f"{path}: unexpected section [{section}]"
                )
            continue
        merged = {**defaults, **dict(parser[section])}
        try:
            diameter = merged.get("tumor_diameter_mm")
            center = None
            if "tumor_x_m" in merged and "tumor_y_m" in merged:
                center = (float(merged["tumor_x_m"]), float(merged["tumor_y_m"]))
            specs.append(ScenarioSpec(
                phantom_id=merged.get("phantom_id", section.split(":", 1)[1]),
                tumor_diameter_mm=float(diameter) if diameter is not None else None,
                tumor_center_m=center,
                n_background=int(merged.get("n_background", 3)),
                background_reflectivity=float(
                    merged.get("background_reflectivity", 0.1)
                ),
            ))
        except (ValueError, ConfigurationError) as exc:
            raise ConfigurationError(f"{path}: [{section}]: {exc}") from None
    return specs


def _resolve_scenarios(args):
    if args.preset == "gen3-like":
        return gen3_like_scenarios(radius_m=args.radius, master_seed=args.seed)
    return load_scenario_file(args.scenarios)


###############################################################################
# Subcommands
###############################################################################


def cmd_simulate(args):
    geometry, freq = _geometry_from_args(args)
    scenarios = _resolve_scenarios(args)
    sim = SimulationConfig(noise_sigma=args.noise, rng_seed=args.seed)
    plan = CorpusPlan(geometry=geometry, freq=freq, sim=sim,
                      speed_mps=args.speed)
    os.makedirs(args.out, exist_ok=True)
    written_refs = set()
    for spec in scenarios:
        target, reference = _simulate_scenario_pair(spec, plan)
        diam = (f"d{int(spec.tumor_diameter_mm):02d}"
                if spec.has_tumor else "healthy")
        write_scan(target, os.path.join(args.out, f"{spec.phantom_id}_{diam}"))
        if spec.phantom_id not in written_refs:
            write_scan(reference, os.path.join(args.out, f"{spec.phantom_id}_ref"))
            written_refs.add(spec.phantom_id)
    print(f"wrote {len(scenarios)} target scans and {len(written_refs)} "
          f"references to {args.out}")
    return 0


def cmd_reconstruct(args):
    scan = load_scan(args.input)
    if args.reference:
        scan = calibrate(scan, load_scan(args.reference))
    grid = args.grid or ImagingGrid.square(
        scan.geometry.radius_m,
        max(2, int(np.ceil(2 * scan.geometry.radius_m / 0.002))),
    )
    cfg = BeamformerConfig(speed_mps=args.speed, window_samples=args.window,
                           channel=args.channel)
    image = reconstruct(args.algo, scan, grid, cfg,
                        window=args.spectral_window,
                        pad_factor=args.pad_factor,
                        pairing=args.pairing,
                        n_workers=args.workers)

    out = args.out or f"{args.input}_{args.algo}"
    norm, norm_value = args.normalization, None
    if norm.startswith("fixed:"):
        norm, norm_value = "fixed-range", float(norm.split(":", 1)[1])
    png_path = out + ".png"
    export_png(image, png_path, norm, norm_value)
    write_image_array(image, out)

    label = scan.label
    radius = (label.tumor_diameter_mm / 2e3
              if label.tumor_diameter_mm else 0.01)
    report = compute_quality(image, true_center_m=label.tumor_center_m,
                             signal_radius_m=radius)
    row = report_row(report, file=os.path.basename(png_path))
    write_report_csv([row], out + "_metrics.csv")
    print(",".join(str(row[c]) for c in row))
    return 0


def cmd_corpus(args):
    geometry, freq = _geometry_from_args(args)
    scenarios = _resolve_scenarios(args)
    grid = args.grid or ImagingGrid.square(
        geometry.radius_m, max(2, int(np.ceil(2 * geometry.radius_m / 0.002)))
    )
    plan = CorpusPlan(
        geometry=geometry,
        freq=freq,
        sim=SimulationConfig(noise_sigma=args.noise, rng_seed=args.seed),
        grid=grid,
        beam=BeamformerConfig(speed_mps=args.speed, channel=args.channel),
        algorithms=tuple(args.algos.split(",")),
        pad_factor=args.pad_factor,
        write_scans=not args.no_scans,
    )
    rows = corpus_generate(scenarios, args.out, plan)
    print(f"wrote {len(rows)} corpus images to {args.out}")
    if args.split is not None:
        train, val = split_corpus(rows, args.split, seed=args.seed)
        for name, files in (("train.txt", train), ("val.txt", val)):
            with open(os.path.join(args.out, name), "w", encoding="utf-8") as fh:
                fh.write("\n".join(files) + ("\n" if files else ""))
        print(f"split {len(train)}/{len(val)} into train.txt/val.txt")
    return 0


###############################################################################
# Entry point
###############################################################################


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bmsrecon",
        description="Breast microwave sensing: simulate scans, reconstruct "
                    "images, and generate labeled corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="write synthetic scan pairs")
    _add_scenario_source(p_sim)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--noise", type=float, default=0.0)
    _add_geometry_args(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_rec = sub.add_parser("reconstruct", help="reconstruct one scan")
    p_rec.add_argument("--input", required=True, help="scan file stem")
    p_rec.add_argument("--reference", help="reference scan stem for calibration")
    p_rec.add_argument("--algo", required=True, choices=ALGO_CHOICES)
    p_rec.add_argument("--grid", type=_grid_spec, default=None,
                       help="'H,N' or 'xmin,xmax,nx,ymin,ymax,ny' (default: auto)")
    p_rec.add_argument("--speed", type=float, default=DEFAULT_SPEED_MPS)
    p_rec.add_argument("--window", type=int, default=0,
                       help="integration window in samples (0 = auto)")
    p_rec.add_argument("--pad-factor", type=int, default=4)
    p_rec.add_argument("--spectral-window", default="rectangular")
    p_rec.add_argument("--pairing", default="signed-sqrt",
                       choices=("signed-sqrt", "raw-product"))
    p_rec.add_argument("--channel", default="S11")
    p_rec.add_argument("--normalization", default="global-max",
                       help="'global-max' or 'fixed:<value>'")
    p_rec.add_argument("--workers", type=int, default=1)
    p_rec.add_argument("--out", help="output path prefix")
    p_rec.set_defaults(func=cmd_reconstruct)

    p_cor = sub.add_parser("corpus", help="generate a labeled image corpus")
    _add_scenario_source(p_cor)
    p_cor.add_argument("--out", required=True)
    p_cor.add_argument("--algos", default="das,dmas,ff")
    p_cor.add_argument("--seed", type=int, default=0)
    p_cor.add_argument("--noise", type=float, default=0.0)
    p_cor.add_argument("--split", type=_split_ratio, default=None,
                       help="train fraction in (0, 1)")
    p_cor.add_argument("--grid", type=_grid_spec, default=None)
    p_cor.add_argument("--pad-factor", type=int, default=4)
    p_cor.add_argument("--channel", default="S11")
    p_cor.add_argument("--no-scans", action="store_true",
                       help="skip writing the scan file pairs")
    _add_geometry_args(p_cor)
    p_cor.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
