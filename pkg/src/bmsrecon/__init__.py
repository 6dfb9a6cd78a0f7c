"""Radar image reconstruction toolkit for breast microwave sensing.

Calibrated stepped-frequency S-parameter scans are reconstructed into
intensity images with delay-and-sum, delay-multiply-and-sum, or a
frequency-domain far-field method; a point-scatterer forward simulator
generates labeled synthetic scans and corpora for downstream detection
models.
"""

from .beamform import (
    ALGORITHMS,
    DEFAULT_SPEED_MPS,
    BeamformerConfig,
    ImagingGrid,
    ReconstructedImage,
    das_reconstruct,
    delayed_samples,
    dmas_reconstruct,
    export_png,
    farfield_reconstruct,
    load_image_array,
    reconstruct,
    round_trip_delay,
    sample_delayed,
    write_image_array,
)
from .errors import (
    ConfigurationError,
    DimensionError,
    IncompatibleInputError,
    IncompatibleScanError,
    ScanFormatError,
    UndefinedMetricError,
)
from .estimators import (
    DelayAndSumImager,
    DelayMultiplyAndSumImager,
    FarFieldImager,
    ScanCalibrator,
    intensity_stack,
)
from .forward_sim import (
    CorpusPlan,
    Phantom,
    Scatterer,
    ScenarioSpec,
    SimulationConfig,
    build_phantom,
    corpus_generate,
    gen3_like_scenarios,
    make_reference_pair,
    simulate_scan,
    split_corpus,
)
from .metrics import (
    QualityReport,
    compute_quality,
    fwhm,
    peak_location,
    signal_to_clutter,
)
from .scan_data import (
    FrequencyAxis,
    FrequencySweepScan,
    ScanGeometry,
    ScanLabel,
    TimeDomainSignalSet,
    calibrate,
    load_scan,
    spectral_window,
    to_time_domain,
    write_scan,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
