"""Shared builders for the test suite."""

import numpy as np

from bmsrecon import (
    DEFAULT_SPEED_MPS,
    FrequencyAxis,
    FrequencySweepScan,
    Phantom,
    ScanGeometry,
    ScanLabel,
    Scatterer,
    SimulationConfig,
    simulate_scan,
)


def gen3_axis(n_points=1001):
    return FrequencyAxis(1e9, 9e9, n_points)


def small_axis(n_points=64, f_start=1e9, f_stop=5e9):
    return FrequencyAxis(f_start, f_stop, n_points)


def small_geometry(n_antennas=8, radius_m=0.1, span_deg=355.0):
    return ScanGeometry.evenly_spaced(n_antennas, radius_m, span_deg)


def full_circle_geometry(n_antennas=8, radius_m=0.1):
    # span chosen so the antennas tile the full circle evenly
    return ScanGeometry.evenly_spaced(
        n_antennas, radius_m, 360.0 * (n_antennas - 1) / n_antennas
    )


def random_scan(rng, n_antennas=6, n_freq=12, channels=("S11",),
                radius_m=0.1, span_deg=355.0, label=None):
    geometry = ScanGeometry.evenly_spaced(n_antennas, radius_m, span_deg)
    freq = FrequencyAxis(1e9, 9e9, n_freq)
    mats = {
        name: rng.standard_normal((n_antennas, n_freq))
        + 1j * rng.standard_normal((n_antennas, n_freq))
        for name in channels
    }
    return FrequencySweepScan(geometry, freq, mats, label or ScanLabel())


def point_scene(center_m, geometry, freq, reflectivity=1.0, radius_m=0.0,
                speed_mps=DEFAULT_SPEED_MPS, spreading_exponent=2.0,
                noise_sigma=0.0, seed=0, is_tumor=True):
    """Simulate a single-scatterer scan; the standard oracle scene."""
    phantom = Phantom(
        (Scatterer(center_m, reflectivity, radius_m, is_tumor=is_tumor),),
        background_speed_mps=speed_mps,
    )
    cfg = SimulationConfig(spreading_exponent=spreading_exponent,
                           noise_sigma=noise_sigma, rng_seed=seed)
    return simulate_scan(phantom, geometry, freq, cfg)
