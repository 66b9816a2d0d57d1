"""Estimation-error statistics and a numerical CRLB reference curve."""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, DegenerateGeometryError
from .model import ArrayConfig, NoiseModel, SourceTruth, TAU, sensor_polar_angles


@dataclass(frozen=True)
class ErrorStats:
    """Aggregated Monte Carlo errors; failed runs are excluded from the means."""

    mse_azimuth: float
    mse_elevation: float
    bias_azimuth: float
    bias_elevation: float
    n_runs: int
    n_failures: int


@dataclass(frozen=True)
class CrlbPoint:
    power_db: float
    crlb_azimuth: float
    crlb_elevation: float


def wrapped_difference(a: float, b: float) -> float:
    """Signed difference a - b wrapped into (-pi, pi]."""
    return math.pi - (math.pi - (a - b)) % TAU


def accumulate_errors(estimates, truth: SourceTruth) -> ErrorStats:
    """Fold a list of estimates (None marks a failed run) into ErrorStats.

    Azimuth errors are computed on the circle via wrapped_difference;
    elevation errors as plain differences. With no successful run the MSE
    and bias fields are NaN.
    """
    estimates = list(estimates)
    if not estimates:
        raise ValueError("estimates must be non-empty")
    az_errors = []
    el_errors = []
    n_failures = 0
    for est in estimates:
        if est is None:
            n_failures += 1
            continue
        az_errors.append(wrapped_difference(est.azimuth, truth.azimuth))
        el_errors.append(est.elevation - truth.elevation)
    if az_errors:
        az = np.asarray(az_errors)
        el = np.asarray(el_errors)
        stats = (float(np.mean(az * az)), float(np.mean(el * el)), float(az.mean()), float(el.mean()))
    else:
        stats = (math.nan, math.nan, math.nan, math.nan)
    return ErrorStats(*stats, n_runs=len(estimates), n_failures=n_failures)


def _steering_and_jacobian(cfg: ArrayConfig, src: SourceTruth, sensors: np.ndarray):
    thetas = sensor_polar_angles(cfg)[sensors - 1]
    sin_el = np.sin(src.elevation)
    cos_el = np.cos(src.elevation)
    phases = -cfg.zeta * sin_el * np.cos(src.azimuth - thetas)
    a = np.exp(1j * phases)
    d_az = cfg.zeta * sin_el * np.sin(src.azimuth - thetas)
    d_el = -cfg.zeta * cos_el * np.cos(src.azimuth - thetas)
    jacobian = np.column_stack([1j * d_az * a, 1j * d_el * a])
    return a, jacobian


def _validate_subset(cfg: ArrayConfig, subset) -> np.ndarray:
    if subset is None:
        return np.arange(1, cfg.n_sensors + 1)
    sensors = np.asarray([int(i) for i in subset])
    if sensors.size == 0:
        raise ConfigurationError("crlb.subset: must contain at least one sensor index")
    if len(set(sensors.tolist())) != sensors.size:
        raise ConfigurationError("crlb.subset: sensor indices must be distinct")
    if sensors.min() < 1 or sensors.max() > cfg.n_sensors:
        raise ConfigurationError(f"crlb.subset: indices must lie in [1, {cfg.n_sensors}]")
    return sensors


def crlb_bound(
    cfg: ArrayConfig,
    src: SourceTruth,
    n_snapshots: int,
    noise: NoiseModel,
    subset=None,
):
    """Deterministic single-source CRLB diagonal (azimuth, elevation) in rad^2.

    Treats the unknown waveform as a nuisance: with steering vector a and
    its Jacobian D, the 2x2 bound is
    ``sigma^2 / (2*L*P) * inv(Re[D^H (I - a a^H/||a||^2) D])``.
    Requires uniform noise; a singular information matrix (degenerate
    geometry, e.g. too few sensors) raises.
    """
    if n_snapshots < 1:
        raise ConfigurationError("snapshots: must be at least 1")
    if len(noise.variances) != cfg.n_sensors:
        raise ConfigurationError(
            f"noise.variances: length {len(noise.variances)} must equal array.n_sensors {cfg.n_sensors}"
        )
    if not noise.is_uniform:
        raise ConfigurationError("noise.variances: the CRLB reference requires uniform noise")
    sensors = _validate_subset(cfg, subset)
    a, jacobian = _steering_and_jacobian(cfg, src, sensors)
    k = a.size
    projector = np.eye(k) - np.outer(a, a.conj()) / float(np.vdot(a, a).real)
    fim = (jacobian.conj().T @ projector @ jacobian).real
    f00, f01, f11 = float(fim[0, 0]), float(fim[0, 1]), float(fim[1, 1])
    det = f00 * f11 - f01 * f01
    if not (det > 1e-12 * max(f00 * f11, 1e-300) and f00 > 0.0 and f11 > 0.0):
        raise DegenerateGeometryError(
            "information matrix is singular for this geometry (angles not jointly identifiable)"
        )
    scale = noise.variances[0] / (2.0 * n_snapshots * src.power)
    return scale * f11 / det, scale * f00 / det


def crlb_curve(
    cfg: ArrayConfig,
    src: SourceTruth,
    n_snapshots: int,
    noise: NoiseModel,
    powers_db,
    subset=None,
):
    """CRLB reference over a power grid; src supplies the angles, the grid the powers."""
    points = []
    for power_db in powers_db:
        at_power = replace(src, power=10.0 ** (float(power_db) / 10.0))
        crlb_az, crlb_el = crlb_bound(cfg, at_power, n_snapshots, noise, subset)
        points.append(CrlbPoint(float(power_db), crlb_az, crlb_el))
    return points
