"""Physics-based forward model producing synthetic labeled scans.

The scattering model is deliberately the same single-bounce straight-path
idealization the beamformers invert: each scatterer contributes
``amp * exp(-j*2*pi*f*tau)`` per antenna and frequency, with the round-trip
delay ``tau = 2*d/v`` and an amplitude that decays as a power of distance.
That makes the simulator an independent oracle for peak-location tests,
and the batch driver turns scenario lists into labeled image corpora.
"""

from __future__ import annotations

import csv
import os
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError
from .scan_data import (
    FrequencyAxis,
    FrequencySweepScan,
    ScanGeometry,
    ScanLabel,
    calibrate,
    to_time_domain,
    write_scan,
)

# guards the amplitude singularity when a scatterer sits on an antenna
D_FLOOR_M = 1e-3

# sub-points used to approximate a finite-radius scatterer: center plus a
# ring of 8 equally weighted points, total reflectivity preserved
_RING_POINTS = 8

CORPUS_MANIFEST_NAME = "labels.csv"
CORPUS_COLUMNS = ("filename", "algorithm", "tumor_present", "diameter_mm",
                  "x_m", "y_m", "phantom_id")


@dataclass(frozen=True)
class Scatterer:
    """A circular reflector; radius 0 is an ideal point."""

    center_m: tuple[float, float]
    reflectivity: float
    radius_m: float = 0.0
    is_tumor: bool = False

    def __post_init__(self):
        if not np.isfinite(self.reflectivity):
            raise ConfigurationError("reflectivity must be finite")
        if self.radius_m < 0:
            raise ConfigurationError("scatterer radius must be >= 0")
        object.__setattr__(
            self, "center_m", (float(self.center_m[0]), float(self.center_m[1]))
        )


@dataclass(frozen=True)
class Phantom:
    """Scatterer list plus the background propagation speed."""

    scatterers: tuple[Scatterer, ...]
    background_speed_mps: float
    phantom_id: str = ""

    def __post_init__(self):
        if not (1e7 < self.background_speed_mps <= 3e8):
            raise ConfigurationError(
                "background speed must lie in (1e7, 3e8] m/s"
            )
        object.__setattr__(self, "scatterers", tuple(self.scatterers))

    def tumor_scatterers(self):
        return [s for s in self.scatterers if s.is_tumor]

    def without_tumor(self):
        return replace(
            self, scatterers=tuple(s for s in self.scatterers if not s.is_tumor)
        )


@dataclass(frozen=True)
class SimulationConfig:
    """Knobs of the forward model.

    ``spreading_exponent`` controls the 1/d^e amplitude decay;
    ``noise_sigma`` is the standard deviation of the additive complex
    white noise per frequency bin (E|n|^2 == noise_sigma^2).
    """

    spreading_exponent: float = 2.0
    noise_sigma: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.spreading_exponent < 0:
            raise ConfigurationError("spreading exponent must be >= 0")
        if self.noise_sigma < 0:
            raise ConfigurationError("noise sigma must be >= 0")


def _check_phantom_fits(phantom, geometry):
    for s in phantom.scatterers:
        rho = float(np.hypot(*s.center_m))
        if rho >= geometry.radius_m:
            raise ConfigurationError(
                f"scatterer at {s.center_m} not strictly inside the scan circle"
            )
        if s.radius_m >= geometry.radius_m:
            raise ConfigurationError("scatterer radius exceeds the scan radius")


def _sub_points(scatterer):
    """Expand a finite-radius scatterer into (x, y, reflectivity) points."""
    x0, y0 = scatterer.center_m
    if scatterer.radius_m == 0.0:
        return [(x0, y0, scatterer.reflectivity)]
    w = scatterer.reflectivity / (_RING_POINTS + 1)
    pts = [(x0, y0, w)]
    for k in range(_RING_POINTS):
        ang = 2.0 * np.pi * k / _RING_POINTS
        pts.append((x0 + scatterer.radius_m * np.cos(ang),
                    y0 + scatterer.radius_m * np.sin(ang), w))
    return pts


def _label_from_phantom(phantom, tumor_present=None):
    tumors = phantom.tumor_scatterers()
    if tumor_present is None:
        tumor_present = bool(tumors)
    if not tumor_present or not tumors:
        return ScanLabel(tumor_present=False, phantom_id=phantom.phantom_id)
    t = tumors[0]
    return ScanLabel(
        tumor_present=True,
        tumor_diameter_mm=2e3 * t.radius_m,
        tumor_center_m=t.center_m,
        phantom_id=phantom.phantom_id,
    )


def simulate_scan(phantom, geometry, freq, cfg, channels=("S11",), noise_stream=0):
    """Simulate one stepped-frequency scan of a phantom.

    The monostatic channel is
    ``S11(a, f) = sum_i amp_i(a) * exp(-j*2*pi*f*tau_i(a)) + noise`` with
    ``amp_i(a) = reflectivity_i / max(d(a, i), d_floor)**spreading_exponent``
    and ``tau_i(a) = 2*d(a, i) / background_speed``. The bistatic channel
    S21, when requested, receives on the antenna half a turn further
    along the trajectory, with the delay ``(d_tx + d_rx) / v`` and one-way
    spreading per leg.

    Parameters
    ----------
    phantom : Phantom
    geometry : ScanGeometry
    freq : FrequencyAxis
    cfg : SimulationConfig
    channels : sequence of str
        Subset of {"S11", "S21"}; S11 is always produced.
    noise_stream : int
        Substream index so related scans can draw independent noise from
        the same seed.

    Returns
    -------
    FrequencySweepScan
        Label fields filled from the phantom; deterministic given
        cfg.rng_seed and noise_stream.
    """
    _check_phantom_fits(phantom, geometry)
    names = list(dict.fromkeys(["S11", *channels]))
    for name in names:
        if name not in ("S11", "S21"):
            raise ConfigurationError(f"unknown channel {name!r}")

    ant = geometry.antenna_xy()
    freqs = freq.frequencies()
    v = phantom.background_speed_mps
    e = cfg.spreading_exponent

    pts = [p for s in phantom.scatterers for p in _sub_points(s)]
    out = {}
    for name in names:
        mat = np.zeros((geometry.n_antennas, freq.n_points), dtype=np.complex128)
        if name == "S11":
            rx = ant
        else:
            # opposite-side receiver: transmit antenna a, receive a + n//2
            shift = geometry.n_antennas // 2
            rx = np.roll(ant, -shift, axis=0)
        for (x, y, refl) in pts:
            d_tx = np.hypot(ant[:, 0] - x, ant[:, 1] - y)
            d_rx = np.hypot(rx[:, 0] - x, rx[:, 1] - y)
            amp = refl / (np.maximum(d_tx, D_FLOOR_M)
                          * np.maximum(d_rx, D_FLOOR_M)) ** (e / 2.0)
            tau = (d_tx + d_rx) / v
            mat += amp[:, None] * np.exp(-2j * np.pi * tau[:, None] * freqs[None, :])
        out[name] = mat

    if cfg.noise_sigma > 0:
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=cfg.rng_seed, spawn_key=(noise_stream,))
        )
        scale = cfg.noise_sigma / np.sqrt(2.0)
        for name in names:
            shape = out[name].shape
            out[name] = out[name] + scale * (
                rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            )

    return FrequencySweepScan(geometry, freq, out, _label_from_phantom(phantom))


def make_reference_pair(phantom, geometry, freq, cfg, channels=("S11",)):
    """Simulate a (target, reference) scan pair for calibration.

    The target is the full phantom; the reference is the phantom with its
    tumor scatterer removed. The two scans draw independent noise streams
    derived from the same seed, so calibration does not cancel noise.

    The phantom must contain exactly one scatterer flagged as tumor.
    """
    tumors = phantom.tumor_scatterers()
    if len(tumors) != 1:
        raise ConfigurationError(
            f"reference pair needs exactly one tumor scatterer, got {len(tumors)}"
        )
    target = simulate_scan(phantom, geometry, freq, cfg, channels, noise_stream=0)
    reference = simulate_scan(
        phantom.without_tumor(), geometry, freq, cfg, channels, noise_stream=1
    )
    return target, reference


###############################################################################
# Scenario-driven corpus generation
###############################################################################


@dataclass(frozen=True)
class ScenarioSpec:
    """One corpus entry: a phantom geometry with an optional tumor."""

    phantom_id: str
    tumor_diameter_mm: float | None = None
    tumor_center_m: tuple[float, float] | None = None
    n_background: int = 3
    background_reflectivity: float = 0.1

    def __post_init__(self):
        if not self.phantom_id:
            raise ConfigurationError("scenario needs a phantom_id")
        if self.tumor_diameter_mm is not None:
            if self.tumor_diameter_mm <= 0:
                raise ConfigurationError("tumor diameter must be positive")
            if self.tumor_center_m is None:
                raise ConfigurationError("tumor scenario needs a tumor position")
        if self.n_background < 0:
            raise ConfigurationError("n_background must be >= 0")

    @property
    def has_tumor(self):
        return self.tumor_diameter_mm is not None


def scenario_seed(master_seed, phantom_id, salt=0):
    """Stable per-scenario seed so batch output is order-independent."""
    return np.random.SeedSequence(
        entropy=master_seed,
        spawn_key=(zlib.crc32(phantom_id.encode("utf-8")), salt),
    )


def build_phantom(spec, geometry, speed_mps, master_seed=0):
    """Materialize a scenario: seeded background clutter plus the tumor."""
    rng = np.random.default_rng(scenario_seed(master_seed, spec.phantom_id))
    scatterers = []
    limit = 0.8 * geometry.radius_m
    for _ in range(spec.n_background):
        while True:
            xy = rng.uniform(-limit, limit, size=2)
            if np.hypot(*xy) < limit:
                break
        scatterers.append(
            Scatterer(tuple(xy), spec.background_reflectivity, radius_m=0.0)
        )
    if spec.has_tumor:
        scatterers.append(
            Scatterer(
                spec.tumor_center_m,
                reflectivity=1.0,
                radius_m=spec.tumor_diameter_mm / 2e3,
                is_tumor=True,
            )
        )
    return Phantom(tuple(scatterers), speed_mps, phantom_id=spec.phantom_id)


def gen3_like_scenarios(n_geometries=20, diameters=(10, 15, 20, 25, 30),
                        radius_m=0.15, master_seed=0, n_background=3):
    """Scenario grid mirroring a third-generation style corpus.

    Each phantom geometry is scanned once per tumor diameter with the
    tumor kept at the same (seeded) location across its diameters.
    """
    specs = []
    for g in range(n_geometries):
        pid = f"geom{g:02d}"
        rng = np.random.default_rng(scenario_seed(master_seed, pid, salt=1))
        while True:
            xy = rng.uniform(-0.6 * radius_m, 0.6 * radius_m, size=2)
            if np.hypot(*xy) < 0.6 * radius_m:
                break
        for d in diameters:
            specs.append(ScenarioSpec(
                phantom_id=pid,
                tumor_diameter_mm=float(d),
                tumor_center_m=(float(xy[0]), float(xy[1])),
                n_background=n_background,
            ))
    return specs


@dataclass(frozen=True)
class CorpusPlan:
    """Everything corpus generation needs besides the scenario list.

    ``grid`` and ``beam`` may stay None for simulate-only use.
    """

    geometry: ScanGeometry
    freq: FrequencyAxis
    sim: SimulationConfig
    grid: "ImagingGrid | None" = None
    beam: "BeamformerConfig | None" = None
    algorithms: tuple[str, ...] = ("das", "dmas", "ff")
    window: str = "rectangular"
    pad_factor: int = 4
    speed_mps: float | None = None
    write_scans: bool = True


def _simulate_scenario_pair(spec, plan):
    speed = plan.speed_mps or plan.beam.speed_mps
    scenario_entropy = scenario_seed(
        plan.sim.rng_seed, spec.phantom_id,
        salt=int(spec.tumor_diameter_mm or 0),
    ).generate_state(1)[0]
    cfg = replace(plan.sim, rng_seed=int(scenario_entropy))
    if spec.has_tumor:
        phantom = build_phantom(spec, plan.geometry, speed, plan.sim.rng_seed)
        return make_reference_pair(phantom, plan.geometry, plan.freq, cfg)
    healthy = build_phantom(spec, plan.geometry, speed, plan.sim.rng_seed)
    target = simulate_scan(healthy, plan.geometry, plan.freq, cfg, noise_stream=0)
    reference = simulate_scan(healthy, plan.geometry, plan.freq, cfg, noise_stream=1)
    return target, reference


def corpus_generate(scenarios, out_dir, plan):
    """Write scan pairs, reconstructed PNGs, and the labels manifest.

    For every scenario the calibrated scan is reconstructed once per
    algorithm in ``plan.algorithms`` and exported as an 8-bit grayscale
    PNG. The manifest CSV (one row per PNG) has the columns
    filename, algorithm, tumor_present, diameter_mm, x_m, y_m, phantom_id.

    Returns the list of manifest rows.
    """
    from .beamform import export_png, reconstruct  # deferred: avoids cycle

    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for spec in scenarios:
        target, reference = _simulate_scenario_pair(spec, plan)
        diam = f"d{int(spec.tumor_diameter_mm):02d}" if spec.has_tumor else "healthy"
        stem = f"{spec.phantom_id}_{diam}"
        if plan.write_scans:
            write_scan(target, os.path.join(out_dir, stem))
            write_scan(reference, os.path.join(out_dir, f"{spec.phantom_id}_ref"))
        calibrated = calibrate(target, reference)
        signals = None
        for algo in plan.algorithms:
            if algo in ("das", "dmas") and signals is None:
                signals = to_time_domain(
                    calibrated, plan.beam.channel, plan.window, plan.pad_factor
                )
            image = reconstruct(
                algo, calibrated, plan.grid, plan.beam, signals=signals
            )
            png_name = f"{stem}_{algo}.png"
            export_png(image, os.path.join(out_dir, png_name))
            rows.append({
                "filename": png_name,
                "algorithm": algo,
                "tumor_present": 1 if spec.has_tumor else 0,
                "diameter_mm": spec.tumor_diameter_mm if spec.has_tumor else "",
                "x_m": spec.tumor_center_m[0] if spec.has_tumor else "",
                "y_m": spec.tumor_center_m[1] if spec.has_tumor else "",
                "phantom_id": spec.phantom_id,
            })

    with open(os.path.join(out_dir, CORPUS_MANIFEST_NAME), "w",
              encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CORPUS_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    return rows


def split_corpus(rows, ratio, seed=0):
    """Seeded shuffle-and-split of manifest rows into train/val filename lists."""
    if not 0.0 < ratio < 1.0:
        raise ConfigurationError("split ratio must lie strictly between 0 and 1")
    names = [r["filename"] for r in rows]
    order = np.random.default_rng(seed).permutation(len(names))
    shuffled = [names[i] for i in order]
    n_train = int(round(ratio * len(names)))
    return shuffled[:n_train], shuffled[n_train:]
