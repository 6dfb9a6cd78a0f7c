"""Image reconstruction: delay-and-sum, delay-multiply-and-sum, far-field.

All three algorithms scan a fixed lattice of focal points. The time-domain
beamformers compensate each antenna's round-trip delay to the focal point,
combine the delayed samples across antennas (coherent sum for DAS, pairwise
products for DMAS), square, and integrate over a bandwidth-derived window.
The far-field method applies the matched phase compensation directly to the
frequency sweep, with no intermediate time step.

Reductions run in a fixed order (ascending antenna index, then ascending
window offset), so images are bit-identical across runs and across worker
counts.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from ._kernels import freq_phase_sum
from .errors import ConfigurationError, DimensionError, IncompatibleInputError, ScanFormatError
from .scan_data import to_time_domain

SPEED_OF_LIGHT_MPS = 299792458.0

# c / sqrt(7): adipose-dominant average permittivity; always configurable
DEFAULT_SPEED_MPS = SPEED_OF_LIGHT_MPS / np.sqrt(7.0)

ALGORITHMS = ("das", "dmas", "ff")

_IMAGE_MANIFEST_SUFFIX = ".manifest"
_IMAGE_BLOB_SUFFIX = ".blob"


def _readonly(arr):
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out


###############################################################################
# Domain types
###############################################################################


@dataclass(frozen=True)
class ImagingGrid:
    """Physical 2-D pixel lattice.

    Pixel centers sit at ``x_k = x_min + (k + 0.5) * (x_max - x_min) / nx``
    (same along y); intensity row i corresponds to y index i.
    """

    x_min_m: float
    x_max_m: float
    y_min_m: float
    y_max_m: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.x_max_m > self.x_min_m and self.y_max_m > self.y_min_m):
            raise ConfigurationError("grid extents must be non-empty")
        if self.nx < 2 or self.ny < 2:
            raise ConfigurationError("grid needs at least 2x2 pixels")

    @classmethod
    def square(cls, half_extent_m, n_pixels):
        """Symmetric square grid spanning [-h, h] in both axes."""
        h = float(half_extent_m)
        return cls(-h, h, -h, h, int(n_pixels), int(n_pixels))

    @property
    def dx_m(self):
        return (self.x_max_m - self.x_min_m) / self.nx

    @property
    def dy_m(self):
        return (self.y_max_m - self.y_min_m) / self.ny

    def x_centers(self):
        return self.x_min_m + (np.arange(self.nx) + 0.5) * self.dx_m

    def y_centers(self):
        return self.y_min_m + (np.arange(self.ny) + 0.5) * self.dy_m

    def pixel_xy(self):
        """Flat pixel-center coordinates, row-major: two (ny*nx,) arrays."""
        xs, ys = np.meshgrid(self.x_centers(), self.y_centers())
        return xs.ravel(), ys.ravel()

    def index_of(self, x_m, y_m):
        """(row, col) of the pixel containing the point, clipped to the grid."""
        col = int(np.clip(np.floor((x_m - self.x_min_m) / self.dx_m), 0, self.nx - 1))
        row = int(np.clip(np.floor((y_m - self.y_min_m) / self.dy_m), 0, self.ny - 1))
        return row, col

    def center_of(self, row, col):
        return (float(self.x_min_m + (col + 0.5) * self.dx_m),
                float(self.y_min_m + (row + 0.5) * self.dy_m))


@dataclass(frozen=True, eq=False)
class BeamformerConfig:
    """Reconstruction parameters shared by the three algorithms.

    ``window_samples == 0`` resolves the integration window width from the
    sweep bandwidth as ``max(1, round((1/B)/dt))``. ``apodization`` is the
    per-antenna weight vector; None means uniform weights.
    """

    speed_mps: float = DEFAULT_SPEED_MPS
    window_samples: int = 0
    apodization: np.ndarray | None = None
    channel: str = "S11"

    def __post_init__(self):
        if not self.speed_mps > 0:
            raise ConfigurationError("propagation speed must be positive")
        if self.window_samples < 0 or int(self.window_samples) != self.window_samples:
            raise ConfigurationError("window_samples must be a nonnegative integer")
        if self.apodization is not None:
            w = np.asarray(self.apodization, dtype=float)
            if w.ndim != 1 or not np.all(np.isfinite(w)):
                raise ConfigurationError("apodization must be a finite 1-D vector")
            object.__setattr__(self, "apodization", _readonly(w))

    def weights(self, n_antennas):
        if self.apodization is None:
            return np.ones(n_antennas)
        if self.apodization.size != n_antennas:
            raise ConfigurationError(
                f"apodization length {self.apodization.size} != {n_antennas} antennas"
            )
        return np.asarray(self.apodization)


@dataclass(frozen=True, eq=False)
class ReconstructedImage:
    """Nonnegative intensity map over an imaging grid."""

    grid: ImagingGrid
    intensity: np.ndarray
    algorithm: str
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.intensity, dtype=np.float64)
        if arr.shape != (self.grid.ny, self.grid.nx):
            raise DimensionError(
                f"intensity shape {arr.shape} != grid ({self.grid.ny}, {self.grid.nx})"
            )
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("intensity must be finite")
        if np.any(arr < 0):
            raise ConfigurationError("intensity must be nonnegative")
        object.__setattr__(self, "intensity", _readonly(arr))
        object.__setattr__(self, "provenance", dict(self.provenance))


###############################################################################
# Delay primitives
###############################################################################


def round_trip_delay(antenna_xy, pixel_xy, speed_mps):
    """Monostatic round-trip delay: ``2 * ||antenna - pixel|| / speed``."""
    ax, ay = antenna_xy
    px, py = pixel_xy
    return 2.0 * np.hypot(ax - px, ay - py) / speed_mps


def sample_delayed(trace, t, dt_s, t0_s=0.0):
    """Linearly interpolated sample of one trace at time t.

    Times outside ``[t0, t0 + (n-1)*dt]`` return 0. Accepts scalar or
    array t.
    """
    trace = np.asarray(trace, dtype=np.float64)
    pos = (np.asarray(t, dtype=np.float64) - t0_s) / dt_s
    out = _sample_at_positions(trace, pos)
    return float(out) if np.isscalar(t) else out


def _sample_at_positions(trace, pos):
    # uniform-grid linear interpolation, 0 outside [0, n-1]
    n = trace.size
    valid = (pos >= 0.0) & (pos <= n - 1.0)
    k = np.clip(np.floor(pos).astype(np.int64), 0, n - 2)
    frac = pos - k
    val = trace[k] * (1.0 - frac) + trace[k + 1] * frac
    return np.where(valid, val, 0.0)


def _delay_positions(signals, geometry, grid, speed_mps):
    """Round-trip delays to every pixel in units of the sample step."""
    ant = geometry.antenna_xy()
    px, py = grid.pixel_xy()
    dist = np.hypot(ant[:, 0][:, None] - px[None, :],
                    ant[:, 1][:, None] - py[None, :])
    tau = 2.0 * dist / speed_mps
    return (tau - signals.t0_s) / signals.dt_s


def delayed_samples(signals, geometry, grid, cfg, offset=0):
    """Apodized delayed samples for every antenna and pixel.

    Returns an (n_antennas, ny, nx) array whose element (a, i, j) is
    ``w_a * sample_delayed(trace_a, tau_a(pixel) + offset * dt)``. This is
    the quantity both time-domain beamformers combine.
    """
    _check_signal_geometry(signals, geometry)
    weights = cfg.weights(geometry.n_antennas)
    pos = _delay_positions(signals, geometry, grid, cfg.speed_mps)
    out = np.empty((geometry.n_antennas, grid.ny * grid.nx))
    for a in range(geometry.n_antennas):
        out[a] = weights[a] * _sample_at_positions(signals.traces[a], pos[a] + offset)
    return out.reshape(geometry.n_antennas, grid.ny, grid.nx)


def _check_signal_geometry(signals, geometry):
    if signals.n_antennas != geometry.n_antennas:
        raise IncompatibleInputError(
            f"signal set has {signals.n_antennas} antennas, "
            f"geometry has {geometry.n_antennas}"
        )


def _resolve_window_samples(cfg, signals):
    if cfg.window_samples > 0:
        return int(cfg.window_samples)
    if signals.bandwidth_hz is None:
        raise ConfigurationError(
            "window_samples=0 requires the signal set to carry bandwidth_hz"
        )
    return max(1, int(round((1.0 / signals.bandwidth_hz) / signals.dt_s)))


def _map_ordered(fn, items, n_workers):
    if n_workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, items))


###############################################################################
# Reconstruction algorithms
###############################################################################


def das_reconstruct(signals, geometry, grid, cfg, n_workers=1):
    """Delay-and-sum reconstruction.

    For each pixel p and window offset m in 0..W-1 the coherent sum
    ``b_m(p) = sum_a w_a * sample_delayed(trace_a, tau_a(p) + m*dt)`` is
    squared and integrated: ``intensity(p) = sum_m b_m(p)^2``.

    Parameters
    ----------
    signals : TimeDomainSignalSet
    geometry : ScanGeometry
    grid : ImagingGrid
    cfg : BeamformerConfig
    n_workers : int
        Worker threads for the per-antenna sampling; any value produces
        bit-identical output.

    Returns
    -------
    ReconstructedImage
    """
    _check_signal_geometry(signals, geometry)
    weights = cfg.weights(geometry.n_antennas)
    w_len = _resolve_window_samples(cfg, signals)
    pos = _delay_positions(signals, geometry, grid, cfg.speed_mps)

    def per_antenna(a):
        trace = signals.traces[a]
        out = np.empty((w_len, pos.shape[1]))
        for m in range(w_len):
            out[m] = _sample_at_positions(trace, pos[a] + m)
        return weights[a] * out

    parts = _map_ordered(per_antenna, range(geometry.n_antennas), n_workers)
    b = parts[0].copy()
    for part in parts[1:]:
        b += part
    intensity = np.zeros(pos.shape[1])
    for m in range(w_len):
        intensity += b[m] * b[m]
    return ReconstructedImage(
        grid, intensity.reshape(grid.ny, grid.nx), "DAS",
        provenance=_provenance(cfg, window_samples=w_len),
    )


def dmas_reconstruct(signals, geometry, grid, cfg, pairing="signed-sqrt", n_workers=1):
    """Delay-multiply-and-sum reconstruction.

    With ``s_a = w_a * sample_delayed(trace_a, tau_a(p) + m*dt)``, each
    window offset contributes the pairwise combination
    ``c_m(p) = sum_{a<b} sign(s_a s_b) * sqrt(|s_a s_b|)`` and
    ``intensity(p) = sum_m c_m(p)^2``. The pair sum is computed through
    the identity ``sum_{a<b} r_a r_b = ((sum_a r_a)^2 - sum_a r_a^2) / 2``
    with ``r = sign(s) * sqrt(|s|)``, which equals the O(n^2) definition.

    ``pairing="raw-product"`` skips the square root (``r = s``), keeping
    the variant whose pair sum relates DMAS to DAS algebraically.
    """
    if geometry.n_antennas < 2:
        raise ConfigurationError("DMAS needs at least two antennas")
    if pairing not in ("signed-sqrt", "raw-product"):
        raise ConfigurationError(f"unknown DMAS pairing {pairing!r}")
    _check_signal_geometry(signals, geometry)
    weights = cfg.weights(geometry.n_antennas)
    w_len = _resolve_window_samples(cfg, signals)
    pos = _delay_positions(signals, geometry, grid, cfg.speed_mps)

    def per_antenna(a):
        trace = signals.traces[a]
        out = np.empty((w_len, pos.shape[1]))
        for m in range(w_len):
            s = weights[a] * _sample_at_positions(trace, pos[a] + m)
            if pairing == "signed-sqrt":
                s = np.sign(s) * np.sqrt(np.abs(s))
            out[m] = s
        return out

    parts = _map_ordered(per_antenna, range(geometry.n_antennas), n_workers)
    sum_r = parts[0].copy()
    sum_r2 = parts[0] * parts[0]
    for part in parts[1:]:
        sum_r += part
        sum_r2 += part * part
    intensity = np.zeros(pos.shape[1])
    for m in range(w_len):
        c = 0.5 * (sum_r[m] * sum_r[m] - sum_r2[m])
        intensity += c * c
    return ReconstructedImage(
        grid, intensity.reshape(grid.ny, grid.nx), "DMAS",
        provenance=_provenance(cfg, window_samples=w_len, pairing=pairing),
    )


def farfield_reconstruct(scan, grid, cfg, n_workers=1):
    """Frequency-domain far-field reconstruction (matched filtering).

    ``intensity(p) = |sum_a w_a sum_f S(a, f) exp(+j*2*pi*f*tau_a(p))|^2``
    with the complex sum divided by ``n_antennas * n_points`` before
    squaring. Operates directly on the (calibrated) sweep.
    """
    mat = scan.channel(cfg.channel)
    geometry = scan.geometry
    weights = cfg.weights(geometry.n_antennas)
    ant = geometry.antenna_xy()
    px, py = grid.pixel_xy()
    f0 = scan.freq.f_start_hz
    df = scan.freq.delta_f_hz

    def per_antenna(a):
        tau = 2.0 * np.hypot(ant[a, 0] - px, ant[a, 1] - py) / cfg.speed_mps
        return freq_phase_sum(mat[a], tau, f0, df)

    parts = _map_ordered(per_antenna, range(geometry.n_antennas), n_workers)
    acc = weights[0] * parts[0]
    for a in range(1, geometry.n_antennas):
        acc += weights[a] * parts[a]
    acc /= geometry.n_antennas * scan.freq.n_points
    intensity = acc.real ** 2 + acc.imag ** 2
    return ReconstructedImage(
        grid, intensity.reshape(grid.ny, grid.nx), "FARFIELD",
        provenance=_provenance(cfg),
    )


def reconstruct(algorithm, scan, grid, cfg, signals=None,
                window="rectangular", pad_factor=4, pairing="signed-sqrt",
                n_workers=1):
    """Dispatch on algorithm name ("das", "dmas", "ff").

    The time-domain beamformers convert the scan on demand when no
    prepared signal set is passed.
    """
    algo = algorithm.lower()
    if algo in ("das", "dmas"):
        if signals is None:
            signals = to_time_domain(scan, cfg.channel, window, pad_factor)
        if algo == "das":
            return das_reconstruct(signals, scan.geometry, grid, cfg, n_workers)
        return dmas_reconstruct(signals, scan.geometry, grid, cfg, pairing, n_workers)
    if algo in ("ff", "farfield"):
        return farfield_reconstruct(scan, grid, cfg, n_workers)
    raise ConfigurationError(f"unknown algorithm {algorithm!r}")


def _provenance(cfg, **extra):
    prov = {
        "speed_mps": cfg.speed_mps,
        "channel": cfg.channel,
        "apodization": "uniform" if cfg.apodization is None
        else [float(w) for w in cfg.apodization],
    }
    prov.update(extra)
    return prov


###############################################################################
# Export
###############################################################################


def export_png(image, path, normalization="global-max", norm_value=None):
    """Write an 8-bit grayscale PNG, ny rows by nx columns.

    Pixel values are ``round(255 * I / I_norm)`` (round half up) clamped
    to [0, 255]; ``I_norm`` is the global maximum or, with
    ``normalization="fixed-range"``, the supplied constant. An all-zero
    image produces an all-zero PNG. Row 0 of the intensity matrix (lowest
    y) is the top PNG row.
    """
    if normalization == "global-max":
        i_norm = float(image.intensity.max())
    elif normalization == "fixed-range":
        if norm_value is None or not norm_value > 0:
            raise ConfigurationError("fixed-range normalization needs norm_value > 0")
        i_norm = float(norm_value)
    else:
        raise ConfigurationError(f"unknown normalization {normalization!r}")
    if i_norm == 0.0:
        quantized = np.zeros_like(image.intensity, dtype=np.uint8)
    else:
        quantized = np.clip(
            np.floor(255.0 * image.intensity / i_norm + 0.5), 0, 255
        ).astype(np.uint8)
    Image.fromarray(quantized, mode="L").save(path, format="PNG")
    return path


def write_image_array(image, path):
    """Lossless manifest + blob image file pair (float64 intensity)."""
    stem = _image_stem(path)
    lines = [
        "format_version = 1",
        "kind = image",
        f"ny = {image.grid.ny}",
        f"nx = {image.grid.nx}",
        f"x_min_m = {image.grid.x_min_m!r}",
        f"x_max_m = {image.grid.x_max_m!r}",
        f"y_min_m = {image.grid.y_min_m!r}",
        f"y_max_m = {image.grid.y_max_m!r}",
        f"algorithm = {image.algorithm}",
        "channels = INTENSITY",
    ]
    with open(stem + _IMAGE_MANIFEST_SUFFIX, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(stem + _IMAGE_BLOB_SUFFIX, "wb") as fh:
        fh.write(np.ascontiguousarray(image.intensity, dtype="<f8").tobytes())
    return stem


def load_image_array(path):
    """Load an image written by :func:`write_image_array`, bit-exactly."""
    from .scan_data import _parse_manifest  # same manifest micro-format

    stem = _image_stem(path)
    manifest_path = stem + _IMAGE_MANIFEST_SUFFIX
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            entries = _parse_manifest(fh.read(), manifest_path)
    except FileNotFoundError:
        raise ScanFormatError(f"manifest not found: {manifest_path}") from None
    if entries.get("kind") != "image":
        raise ScanFormatError(f"{manifest_path}: not an image manifest")
    ny, nx = int(entries["ny"]), int(entries["nx"])
    expected = 8 * ny * nx
    with open(stem + _IMAGE_BLOB_SUFFIX, "rb") as fh:
        payload = fh.read()
    if len(payload) != expected:
        raise ScanFormatError(
            f"{stem + _IMAGE_BLOB_SUFFIX}: expected {expected} bytes, got {len(payload)}"
        )
    intensity = np.frombuffer(payload, dtype="<f8").reshape(ny, nx)
    grid = ImagingGrid(
        float(entries["x_min_m"]), float(entries["x_max_m"]),
        float(entries["y_min_m"]), float(entries["y_max_m"]), nx, ny,
    )
    return ReconstructedImage(grid, intensity, entries.get("algorithm", ""),
                              provenance={"loaded_from": stem})


def _image_stem(path):
    path = os.fspath(path)
    for suffix in (_IMAGE_MANIFEST_SUFFIX, _IMAGE_BLOB_SUFFIX):
        if path.endswith(suffix):
            return path[: -len(suffix)]
    return path
