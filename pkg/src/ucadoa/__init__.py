"""2-D direction-of-arrival estimation for massive uniform circular arrays."""

from .config import ExperimentConfig, load_config, parse_config_text
from .covariance import PairCovariance, exact_covariance, principal_argument, sample_covariance
from .errors import (
    ConfigurationError,
    DegenerateGeometryError,
    DegenerateInputError,
    NumericalError,
    SnapshotFormatError,
)
from .experiments import SweepRow, derive_run_seed, estimate_pipeline, run_sweep
from .metrics import CrlbPoint, ErrorStats, accumulate_errors, crlb_bound, crlb_curve, wrapped_difference
from .ml import MLConfig, SubsetMatrices, build_subset_matrices, ml_gradient, ml_objective, refine_ml, step_bound
from .model import (
    ArrayConfig,
    NoiseModel,
    SnapshotSet,
    SourceTruth,
    Waveform,
    phase_at_sensor,
    sensor_polar_angle,
    sensor_phases,
    synthesize_snapshots,
)
from .quantized import (
    AngleEstimate,
    AzimuthBranch,
    EstimateDiagnostics,
    EstimationMethod,
    antipodal_pair_scan,
    estimate_quantized,
    resolve_azimuth,
    resolve_elevation,
)
from .service import create_app

__version__ = "0.1.0"

__all__ = [
    "AngleEstimate",
    "ArrayConfig",
    "AzimuthBranch",
    "ConfigurationError",
    "CrlbPoint",
    "DegenerateGeometryError",
    "DegenerateInputError",
    "ErrorStats",
    "EstimateDiagnostics",
    "EstimationMethod",
    "ExperimentConfig",
    "MLConfig",
    "NoiseModel",
    "NumericalError",
    "PairCovariance",
    "SnapshotFormatError",
    "SnapshotSet",
    "SourceTruth",
    "SubsetMatrices",
    "SweepRow",
    "Waveform",
    "accumulate_errors",
    "antipodal_pair_scan",
    "build_subset_matrices",
    "create_app",
    "crlb_bound",
    "crlb_curve",
    "derive_run_seed",
    "estimate_pipeline",
    "estimate_quantized",
    "exact_covariance",
    "load_config",
    "ml_gradient",
    "ml_objective",
    "parse_config_text",
    "phase_at_sensor",
    "principal_argument",
    "refine_ml",
    "resolve_azimuth",
    "resolve_elevation",
    "run_sweep",
    "sample_covariance",
    "sensor_phases",
    "sensor_polar_angle",
    "step_bound",
    "synthesize_snapshots",
    "wrapped_difference",
]
