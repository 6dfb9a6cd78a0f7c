"""Scikit-learn style transformers wrapping the reconstruction pipeline.

These let scans flow through standard estimator composition
(``Pipeline([("calibrate", ScanCalibrator(ref)), ("image", DelayAndSumImager(...))])``)
while the functional API in :mod:`bmsrecon.beamform` stays the primary
surface. All transformers are stateless: ``fit`` only validates.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .beamform import (
    BeamformerConfig,
    das_reconstruct,
    dmas_reconstruct,
    farfield_reconstruct,
)
from .errors import ConfigurationError
from .scan_data import FrequencySweepScan, calibrate, to_time_domain


def _as_scan_list(X):
    if isinstance(X, FrequencySweepScan):
        return [X], True
    return list(X), False


def intensity_stack(images):
    """Stack ReconstructedImage intensities into an (n, ny, nx) array."""
    return np.stack([img.intensity for img in images])


class ScanCalibrator(BaseEstimator, TransformerMixin):
    """Subtracts a fixed reference scan from every input scan."""

    def __init__(self, reference=None):
        self.reference = reference

    def fit(self, X, y=None):
        if self.reference is None:
            raise ConfigurationError("ScanCalibrator needs a reference scan")
        return self

    def transform(self, X):
        self.fit(X)
        scans, single = _as_scan_list(X)
        out = [calibrate(scan, self.reference) for scan in scans]
        return out[0] if single else out


class _BaseImager(BaseEstimator, TransformerMixin):
    """Shared plumbing: config resolution and scan iteration."""

    def fit(self, X, y=None):
        self._config()  # parameter validation
        return self

    def transform(self, X):
        cfg = self._config()
        scans, single = _as_scan_list(X)
        out = [self._reconstruct(scan, cfg) for scan in scans]
        return out[0] if single else out

    def _config(self):
        kwargs = {"window_samples": self.window_samples,
                  "apodization": self.apodization,
                  "channel": self.channel}
        if self.speed_mps is not None:
            kwargs["speed_mps"] = self.speed_mps
        return BeamformerConfig(**kwargs)


class DelayAndSumImager(_BaseImager):
    """Delay-and-sum reconstruction as a transformer.

    Parameters mirror BeamformerConfig plus the time-domain conversion
    knobs (spectral window and pad factor).
    """

    def __init__(self, grid=None, speed_mps=None, window_samples=0,
                 apodization=None, channel="S11",
                 spectral_window="rectangular", pad_factor=4, n_workers=1):
        self.grid = grid
        self.speed_mps = speed_mps
        self.window_samples = window_samples
        self.apodization = apodization
        self.channel = channel
        self.spectral_window = spectral_window
        self.pad_factor = pad_factor
        self.n_workers = n_workers

    def _reconstruct(self, scan, cfg):
        signals = to_time_domain(scan, self.channel, self.spectral_window,
                                 self.pad_factor)
        return das_reconstruct(signals, scan.geometry, self._grid(), cfg,
                               n_workers=self.n_workers)

    def _grid(self):
        if self.grid is None:
            raise ConfigurationError("imager needs an ImagingGrid")
        return self.grid


class DelayMultiplyAndSumImager(DelayAndSumImager):
    """Delay-multiply-and-sum reconstruction as a transformer."""

    def __init__(self, grid=None, speed_mps=None, window_samples=0,
                 apodization=None, channel="S11",
                 spectral_window="rectangular", pad_factor=4,
                 pairing="signed-sqrt", n_workers=1):
        super().__init__(grid=grid, speed_mps=speed_mps,
                         window_samples=window_samples,
                         apodization=apodization, channel=channel,
                         spectral_window=spectral_window,
                         pad_factor=pad_factor, n_workers=n_workers)
        self.pairing = pairing

    def _reconstruct(self, scan, cfg):
        signals = to_time_domain(scan, self.channel, self.spectral_window,
                                 self.pad_factor)
        return dmas_reconstruct(signals, scan.geometry, self._grid(), cfg,
                                pairing=self.pairing, n_workers=self.n_workers)


class FarFieldImager(_BaseImager):
    """Frequency-domain far-field reconstruction as a transformer."""

    def __init__(self, grid=None, speed_mps=None, window_samples=0,
                 apodization=None, channel="S11", n_workers=1):
        self.grid = grid
        self.speed_mps = speed_mps
        self.window_samples = window_samples
        self.apodization = apodization
        self.channel = channel
        self.n_workers = n_workers

    def _reconstruct(self, scan, cfg):
        if self.grid is None:
            raise ConfigurationError("imager needs an ImagingGrid")
        return farfield_reconstruct(scan, self.grid, cfg,
                                    n_workers=self.n_workers)
