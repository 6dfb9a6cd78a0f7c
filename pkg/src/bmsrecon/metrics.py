"""Image-quality and localization measures for reconstructed images.

All metrics treat the image as a squared-magnitude intensity map, are
invariant under positive scaling, and are pure functions of their inputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import UndefinedMetricError

# dB value reported when the clutter region is identically zero
SCR_CAP_DB = 300.0

# default clutter exclusion margin beyond the signal radius
DEFAULT_EXCLUSION_MARGIN_M = 0.010

REPORT_COLUMNS = ("file", "peak_x_m", "peak_y_m", "loc_err_m", "scr_db",
                  "fwhm_x_m", "fwhm_y_m", "clipped")


@dataclass(frozen=True)
class QualityReport:
    """Per-image quality summary."""

    peak_xy_m: tuple[float, float]
    localization_error_m: float | None
    scr_db: float
    fwhm_x_m: float
    fwhm_y_m: float
    clipped: bool


def peak_location(image):
    """Pixel-center coordinates of the global intensity maximum.

    Ties break toward the lowest row index, then the lowest column index.
    """
    flat = int(np.argmax(image.intensity))
    row, col = np.unravel_index(flat, image.intensity.shape)
    return image.grid.center_of(row, col)


def signal_to_clutter(image, signal_center_m, signal_radius_m,
                      exclusion_radius_m=None):
    """Signal-to-clutter ratio in dB.

    ``10 * log10`` of the ratio between the maximum intensity inside the
    signal disc and the maximum intensity outside the exclusion disc
    around the same center. Intensities are squared magnitudes, hence the
    factor 10. The exclusion radius defaults to the signal radius plus
    10 mm.

    Raises UndefinedMetricError when either region contains no pixel.
    """
    if exclusion_radius_m is None:
        exclusion_radius_m = signal_radius_m + DEFAULT_EXCLUSION_MARGIN_M
    xs, ys = image.grid.pixel_xy()
    dist = np.hypot(xs - signal_center_m[0], ys - signal_center_m[1])
    intensity = image.intensity.ravel()
    signal_mask = dist <= signal_radius_m
    clutter_mask = dist > exclusion_radius_m
    if not signal_mask.any():
        raise UndefinedMetricError("signal disc contains no pixel")
    if not clutter_mask.any():
        raise UndefinedMetricError("clutter region is empty")
    signal_max = float(intensity[signal_mask].max())
    clutter_max = float(intensity[clutter_mask].max())
    if clutter_max == 0.0:
        return SCR_CAP_DB if signal_max > 0 else 0.0
    return 10.0 * np.log10(signal_max / clutter_max)


def fwhm(image, axis="x"):
    """Full width at half maximum through the peak along one axis.

    The profile through the global peak is scanned outward from the peak;
    half-maximum crossings are located by linear interpolation between
    the bracketing samples. When a side never drops below half maximum
    before the grid edge the width is clipped at the edge pixel center
    and the flag is set.

    Returns
    -------
    (width_m, clipped) : tuple of float and bool
    """
    if axis not in ("x", "y"):
        raise UndefinedMetricError(f"unknown axis {axis!r}")
    flat = int(np.argmax(image.intensity))
    row, col = np.unravel_index(flat, image.intensity.shape)
    if axis == "x":
        profile = image.intensity[row, :]
        coords = image.grid.x_centers()
        peak_idx = col
    else:
        profile = image.intensity[:, col]
        coords = image.grid.y_centers()
        peak_idx = row
    half = profile[peak_idx] / 2.0
    if profile[peak_idx] == 0.0:
        raise UndefinedMetricError("image has no positive peak")

    def crossing(direction):
        idx = peak_idx
        while True:
            nxt = idx + direction
            if nxt < 0 or nxt >= profile.size:
                return coords[idx], True  # clipped at the edge
            if profile[nxt] < half:
                # interpolate between (idx, >= half) and (nxt, < half)
                t = (profile[idx] - half) / (profile[idx] - profile[nxt])
                return coords[idx] + t * (coords[nxt] - coords[idx]), False
            idx = nxt

    left, clip_l = crossing(-1)
    right, clip_r = crossing(+1)
    return float(abs(right - left)), bool(clip_l or clip_r)


def compute_quality(image, true_center_m=None, signal_radius_m=0.01,
                    exclusion_radius_m=None):
    """Assemble the QualityReport for one image.

    The signal disc is centered on the ground-truth position when given,
    otherwise on the image peak.
    """
    peak = peak_location(image)
    loc_err = None
    center = true_center_m if true_center_m is not None else peak
    if true_center_m is not None:
        loc_err = float(np.hypot(peak[0] - true_center_m[0],
                                 peak[1] - true_center_m[1]))
    scr = signal_to_clutter(image, center, signal_radius_m, exclusion_radius_m)
    w_x, clip_x = fwhm(image, "x")
    w_y, clip_y = fwhm(image, "y")
    return QualityReport(
        peak_xy_m=peak,
        localization_error_m=loc_err,
        scr_db=float(scr),
        fwhm_x_m=w_x,
        fwhm_y_m=w_y,
        clipped=clip_x or clip_y,
    )


def report_row(report, file=""):
    """One CSV row (dict keyed by REPORT_COLUMNS) for a report."""
    return {
        "file": file,
        "peak_x_m": repr(report.peak_xy_m[0]),
        "peak_y_m": repr(report.peak_xy_m[1]),
        "loc_err_m": "" if report.localization_error_m is None
        else repr(report.localization_error_m),
        "scr_db": repr(report.scr_db),
        "fwhm_x_m": repr(report.fwhm_x_m),
        "fwhm_y_m": repr(report.fwhm_y_m),
        "clipped": 1 if report.clipped else 0,
    }


def write_report_csv(rows, path):
    """Write report rows with the fixed column order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    return path
