"""Scan containers, the on-disk format, calibration, and time conversion.

A breast microwave sensing scan is a stepped-frequency sweep: complex
S-parameters sampled at many discrete frequencies while the antenna is
rotated around the object. This module defines the in-memory containers,
a bit-exact two-file disk format (text manifest + raw float64 blob),
reference-scan calibration, and the inverse-DFT conversion to synthetic
time-domain pulse responses that the beamformers sample.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionError, IncompatibleScanError, ScanFormatError

KNOWN_CHANNELS = ("S11", "S21")

MANIFEST_SUFFIX = ".manifest"
BLOB_SUFFIX = ".blob"

_FORMAT_VERSION = 1

# bytes per complex sample: two little-endian float64 (re, im)
_BYTES_PER_SAMPLE = 16


def _readonly(arr):
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out


###############################################################################
# Domain types
###############################################################################


@dataclass(frozen=True, eq=False)
class ScanGeometry:
    """Antenna positions of one circular scan.

    Angles are azimuths in degrees, measured counter-clockwise from the
    positive x axis; antenna k sits at
    ``radius_m * (cos(angle_k), sin(angle_k))``.
    """

    n_antennas: int
    angles_deg: np.ndarray
    radius_m: float
    rotation_span_deg: float = 355.0

    def __post_init__(self):
        angles = np.asarray(self.angles_deg, dtype=float)
        if angles.ndim != 1 or angles.size != self.n_antennas:
            raise ConfigurationError(
                f"expected {self.n_antennas} angles, got {angles.size}"
            )
        if self.n_antennas < 1:
            raise ConfigurationError("geometry needs at least one antenna")
        if not self.radius_m > 0:
            raise ConfigurationError("scan radius must be positive")
        if np.any(np.diff(angles) <= 0):
            raise ConfigurationError("antenna angles must be strictly increasing")
        if angles[0] < 0 or angles[-1] > self.rotation_span_deg:
            raise ConfigurationError(
                "antenna angles must lie within [0, rotation_span_deg]"
            )
        object.__setattr__(self, "angles_deg", _readonly(angles))

    @classmethod
    def evenly_spaced(cls, n_antennas=72, radius_m=0.15, rotation_span_deg=355.0):
        """Default builder: n antennas evenly spaced over the span."""
        if n_antennas < 2:
            raise ConfigurationError("evenly spaced geometry needs >= 2 antennas")
        k = np.arange(n_antennas, dtype=float)
        angles = rotation_span_deg * k / (n_antennas - 1)
        return cls(n_antennas, angles, radius_m, rotation_span_deg)

    def antenna_xy(self):
        """(n_antennas, 2) Cartesian antenna positions in meters."""
        rad = np.deg2rad(self.angles_deg)
        return np.column_stack((self.radius_m * np.cos(rad),
                                self.radius_m * np.sin(rad)))

    def __eq__(self, other):
        if not isinstance(other, ScanGeometry):
            return NotImplemented
        return (self.n_antennas == other.n_antennas
                and self.radius_m == other.radius_m
                and self.rotation_span_deg == other.rotation_span_deg
                and np.array_equal(self.angles_deg, other.angles_deg))


@dataclass(frozen=True)
class FrequencyAxis:
    """Uniform stepped-frequency axis in hertz."""

    f_start_hz: float
    f_stop_hz: float
    n_points: int = 1001

    def __post_init__(self):
        if not (self.f_stop_hz > self.f_start_hz > 0):
            raise ConfigurationError("need f_stop > f_start > 0")
        if self.n_points < 2:
            raise ConfigurationError("need at least two frequency points")

    @property
    def delta_f_hz(self):
        return (self.f_stop_hz - self.f_start_hz) / (self.n_points - 1)

    @property
    def bandwidth_hz(self):
        return self.f_stop_hz - self.f_start_hz

    def frequencies(self):
        return np.linspace(self.f_start_hz, self.f_stop_hz, self.n_points)


@dataclass(frozen=True)
class ScanLabel:
    """Ground-truth annotation attached to a scan."""

    tumor_present: bool = False
    tumor_diameter_mm: float | None = None
    tumor_center_m: tuple[float, float] | None = None
    phantom_id: str = ""

    def __post_init__(self):
        if not self.tumor_present:
            if self.tumor_diameter_mm is not None or self.tumor_center_m is not None:
                raise ConfigurationError(
                    "tumor-free label must not carry diameter or center"
                )
        if self.tumor_center_m is not None:
            object.__setattr__(
                self, "tumor_center_m",
                (float(self.tumor_center_m[0]), float(self.tumor_center_m[1])),
            )


@dataclass(frozen=True, eq=False)
class FrequencySweepScan:
    """One multistatic stepped-frequency scan.

    ``channels`` maps channel name ("S11", optionally "S21") to a complex
    matrix of shape (n_antennas, n_points). The monostatic reflection
    channel S11 is always present.
    """

    geometry: ScanGeometry
    freq: FrequencyAxis
    channels: dict[str, np.ndarray]
    label: ScanLabel = field(default_factory=ScanLabel)

    def __post_init__(self):
        if "S11" not in self.channels:
            raise ScanFormatError("scan must carry an S11 channel")
        clean = {}
        for name, mat in self.channels.items():
            if name not in KNOWN_CHANNELS:
                raise ScanFormatError(f"unknown channel name {name!r}")
            arr = np.asarray(mat, dtype=np.complex128)
            expected = (self.geometry.n_antennas, self.freq.n_points)
            if arr.shape != expected:
                raise DimensionError(
                    f"channel {name}: shape {arr.shape} != {expected}"
                )
            clean[name] = _readonly(arr)
        object.__setattr__(self, "channels", clean)

    def channel(self, name):
        try:
            return self.channels[name]
        except KeyError:
            raise ConfigurationError(
                f"scan has no channel {name!r} (has {sorted(self.channels)})"
            ) from None

    def __eq__(self, other):
        if not isinstance(other, FrequencySweepScan):
            return NotImplemented
        return (self.geometry == other.geometry
                and self.freq == other.freq
                and self.label == other.label
                and sorted(self.channels) == sorted(other.channels)
                and all(np.array_equal(self.channels[c], other.channels[c])
                        for c in self.channels))


@dataclass(frozen=True, eq=False)
class TimeDomainSignalSet:
    """Real per-antenna time traces derived from a calibrated sweep.

    ``bandwidth_hz`` records the sweep bandwidth of the source scan so
    beamformers can derive their integration window width from it.
    """

    dt_s: float
    n_samples: int
    traces: np.ndarray
    t0_s: float = 0.0
    bandwidth_hz: float | None = None

    def __post_init__(self):
        if not self.dt_s > 0:
            raise ConfigurationError("dt must be positive")
        arr = np.asarray(self.traces, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != self.n_samples:
            raise DimensionError(
                f"traces shape {arr.shape} inconsistent with n_samples={self.n_samples}"
            )
        object.__setattr__(self, "traces", _readonly(arr))

    @property
    def n_antennas(self):
        return self.traces.shape[0]

    def time_axis(self):
        return self.t0_s + self.dt_s * np.arange(self.n_samples)


###############################################################################
# Spectral windows
###############################################################################


def spectral_window(spec, n_points):
    """Resolve a window spec to a length-n weight vector.

    Accepts the names "rectangular" and "raised-cosine", or an explicit
    1-D array of length n_points.
    """
    if isinstance(spec, str):
        name = spec.lower()
        if name == "rectangular":
            return np.ones(n_points)
        if name == "raised-cosine":
            return np.hanning(n_points)
        raise ConfigurationError(f"unknown spectral window {spec!r}")
    win = np.asarray(spec, dtype=float)
    if win.shape != (n_points,):
        raise ConfigurationError(
            f"window array must have shape ({n_points},), got {win.shape}"
        )
    return win


###############################################################################
# Operations
###############################################################################


def calibrate(target, reference):
    """Subtract a reference scan to isolate the target response.

    The reference is a tumor-free scan of the same phantom geometry; the
    returned scan holds ``target - reference`` per channel and keeps the
    target's label.

    Parameters
    ----------
    target, reference : FrequencySweepScan
        Must share geometry, frequency axis, and channel set.

    Returns
    -------
    FrequencySweepScan
    """
    if target.geometry != reference.geometry:
        raise IncompatibleScanError("calibrate: scan geometries differ")
    if target.freq != reference.freq:
        raise IncompatibleScanError("calibrate: frequency axes differ")
    if sorted(target.channels) != sorted(reference.channels):
        raise IncompatibleScanError(
            f"calibrate: channel sets differ "
            f"({sorted(target.channels)} vs {sorted(reference.channels)})"
        )
    diff = {name: target.channels[name] - reference.channels[name]
            for name in target.channels}
    return FrequencySweepScan(target.geometry, target.freq, diff, target.label)


def to_time_domain(scan, channel="S11", window="rectangular", pad_factor=4):
    """Convert one channel of a sweep to real time-domain traces.

    Each antenna row is multiplied by the spectral window, zero-padded to
    ``pad_factor * n_points`` bins, and inverse-DFT'd with the band kept at
    its physical carrier (bin m of the sweep is the response at
    ``f_start + m * delta_f``); the real part is returned. A reflector at
    round-trip delay tau therefore produces the same band-pass pulse on
    every antenna, centered at ``t = tau``, with sample step
    ``dt = 1 / (n_samples * delta_f)`` - the alignment the time-domain
    beamformers rely on when they sum time-shifted replicas.

    Parameters
    ----------
    scan : FrequencySweepScan
    channel : str
        Channel to convert.
    window : str or ndarray
        Spectral window spec, see :func:`spectral_window`.
    pad_factor : int
        Zero-padding factor (>= 1); larger values refine the time grid.

    Returns
    -------
    TimeDomainSignalSet
    """
    if pad_factor < 1 or int(pad_factor) != pad_factor:
        raise ConfigurationError("pad_factor must be a positive integer")
    pad_factor = int(pad_factor)
    mat = scan.channel(channel)
    n_points = scan.freq.n_points
    win = spectral_window(window, n_points)
    n_samples = pad_factor * n_points
    padded = np.zeros((mat.shape[0], n_samples), dtype=np.complex128)
    padded[:, :n_points] = mat * win
    baseband = np.fft.ifft(padded, axis=1)
    dt = 1.0 / (n_samples * scan.freq.delta_f_hz)
    # restore the carrier: the baseband IDFT alone would leave an
    # antenna-dependent phase on the pulses and break coherent summation
    t = dt * np.arange(n_samples)
    carrier = np.exp(2j * np.pi * scan.freq.f_start_hz * t)
    traces = (carrier[None, :] * baseband).real
    return TimeDomainSignalSet(
        dt_s=dt,
        n_samples=n_samples,
        traces=traces,
        bandwidth_hz=scan.freq.bandwidth_hz,
    )


###############################################################################
# On-disk format: <stem>.manifest + <stem>.blob
###############################################################################
#
# manifest: UTF-8 text, one "key = value" per line.
# blob: little-endian float64; for each channel in manifest order, row-major
#       (antenna-major) interleaved (re, im) pairs. Total bytes are
#       16 * n_channels * n_antennas * n_frequencies.


def _resolve_stem(path):
    path = os.fspath(path)
    for suffix in (MANIFEST_SUFFIX, BLOB_SUFFIX):
        if path.endswith(suffix):
            return path[: -len(suffix)]
    return path


def write_scan(scan, path):
    """Write a scan as the canonical manifest + blob file pair.

    ``path`` may be the bare stem or either of the two file names.
    Returns the stem actually used.
    """
    stem = _resolve_stem(path)
    lines = [
        f"format_version = {_FORMAT_VERSION}",
        f"n_antennas = {scan.geometry.n_antennas}",
        f"n_frequencies = {scan.freq.n_points}",
        f"f_start_hz = {scan.freq.f_start_hz!r}",
        f"f_stop_hz = {scan.freq.f_stop_hz!r}",
        f"radius_m = {scan.geometry.radius_m!r}",
        f"rotation_span_deg = {scan.geometry.rotation_span_deg!r}",
        f"channels = {','.join(scan.channels)}",
        f"tumor_present = {1 if scan.label.tumor_present else 0}",
    ]
    if scan.label.tumor_diameter_mm is not None:
        lines.append(f"tumor_diameter_mm = {scan.label.tumor_diameter_mm!r}")
    if scan.label.tumor_center_m is not None:
        lines.append(f"tumor_x_m = {scan.label.tumor_center_m[0]!r}")
        lines.append(f"tumor_y_m = {scan.label.tumor_center_m[1]!r}")
    if scan.label.phantom_id:
        lines.append(f"phantom_id = {scan.label.phantom_id}")
    with open(stem + MANIFEST_SUFFIX, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

    blocks = []
    for name in scan.channels:
        mat = scan.channels[name]
        inter = np.empty((mat.shape[0], mat.shape[1], 2), dtype="<f8")
        inter[:, :, 0] = mat.real
        inter[:, :, 1] = mat.imag
        blocks.append(inter.tobytes())
    with open(stem + BLOB_SUFFIX, "wb") as fh:
        fh.write(b"".join(blocks))
    return stem


def _parse_manifest(text, path):
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ScanFormatError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    return entries


def load_scan(path):
    """Load a scan written by :func:`write_scan`, bit-exactly.

    Raises ScanFormatError for malformed manifests, missing or truncated
    blobs (the message names the expected byte count), and unknown channel
    names; raises DimensionError when the blob size corresponds to a
    different antenna count than the manifest declares.
    """
    stem = _resolve_stem(path)
    manifest_path = stem + MANIFEST_SUFFIX
    blob_path = stem + BLOB_SUFFIX
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            entries = _parse_manifest(fh.read(), manifest_path)
    except FileNotFoundError:
        raise ScanFormatError(f"manifest not found: {manifest_path}") from None

    required = ("format_version", "n_antennas", "n_frequencies", "f_start_hz",
                "f_stop_hz", "radius_m", "rotation_span_deg", "channels",
                "tumor_present")
    for key in required:
        if key not in entries:
            raise ScanFormatError(f"{manifest_path}: missing key {key!r}")
    if entries["format_version"] != str(_FORMAT_VERSION):
        raise ScanFormatError(
            f"{manifest_path}: unsupported format_version {entries['format_version']!r}"
        )

    try:
        n_antennas = int(entries["n_antennas"])
        n_frequencies = int(entries["n_frequencies"])
        f_start = float(entries["f_start_hz"])
        f_stop = float(entries["f_stop_hz"])
        radius = float(entries["radius_m"])
        span = float(entries["rotation_span_deg"])
        tumor_present = bool(int(entries["tumor_present"]))
    except ValueError as exc:
        raise ScanFormatError(f"{manifest_path}: bad numeric value ({exc})") from None

    channel_names = [c.strip() for c in entries["channels"].split(",") if c.strip()]
    if not channel_names:
        raise ScanFormatError(f"{manifest_path}: empty channel list")
    for name in channel_names:
        if name not in KNOWN_CHANNELS:
            raise ScanFormatError(f"{manifest_path}: unknown channel name {name!r}")

    diameter = entries.get("tumor_diameter_mm")
    tumor_x = entries.get("tumor_x_m")
    tumor_y = entries.get("tumor_y_m")
    label = ScanLabel(
        tumor_present=tumor_present,
        tumor_diameter_mm=float(diameter) if diameter is not None else None,
        tumor_center_m=(float(tumor_x), float(tumor_y))
        if tumor_x is not None and tumor_y is not None else None,
        phantom_id=entries.get("phantom_id", ""),
    )

    expected = _BYTES_PER_SAMPLE * len(channel_names) * n_antennas * n_frequencies
    try:
        with open(blob_path, "rb") as fh:
            payload = fh.read()
    except FileNotFoundError:
        raise ScanFormatError(
            f"blob not found: {blob_path} (expected {expected} bytes)"
        ) from None
    if len(payload) != expected:
        per_antenna = _BYTES_PER_SAMPLE * len(channel_names) * n_frequencies
        if len(payload) % per_antenna == 0:
            raise DimensionError(
                f"{blob_path}: manifest declares {n_antennas} antennas, "
                f"blob holds {len(payload) // per_antenna}"
            )
        raise ScanFormatError(
            f"{blob_path}: expected {expected} bytes, got {len(payload)}"
        )

    flat = np.frombuffer(payload, dtype="<f8")
    flat = flat.reshape(len(channel_names), n_antennas, n_frequencies, 2)
    channels = {
        name: flat[i, :, :, 0] + 1j * flat[i, :, :, 1]
        for i, name in enumerate(channel_names)
    }
    geometry = ScanGeometry.evenly_spaced(n_antennas, radius, span)
    freq = FrequencyAxis(f_start, f_stop, n_frequencies)
    return FrequencySweepScan(geometry, freq, channels, label)
