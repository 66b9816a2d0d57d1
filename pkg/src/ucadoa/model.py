"""Uniform circular array geometry and the narrow-band single-source snapshot model."""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

TAU = 2.0 * math.pi
HALF_PI = 0.5 * math.pi


class Waveform(str, enum.Enum):
    """Source waveform mode used by the snapshot synthesizer."""

    CONSTANT_AMPLITUDE = "constant"
    RANDOM_PHASE = "random_phase"


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform circular array of N sensors on a circle of radius R.

    Parameters
    ----------
    n_sensors : int
        Sensor count N. Must be a multiple of 4 (so that every sensor has
        both an antipodal and a quadrature partner) and at least 8.
    radius_over_wavelength : float
        R/lambda, constrained to (0, 1/4] so pairwise phase differences
        stay inside (-pi, pi] and carry no ambiguity.

    The electrical radius ``zeta = 2*pi*R/lambda`` is derived on
    construction and lies in (0, pi/2].
    """

    n_sensors: int
    radius_over_wavelength: float
    zeta: float = field(init=False)

    def __post_init__(self):
        n = self.n_sensors
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
            raise ConfigurationError("array.n_sensors: must be an integer")
        if n < 8:
            raise ConfigurationError("array.n_sensors: must be at least 8")
        if n % 4 != 0:
            raise ConfigurationError("array.n_sensors: must be a multiple of 4")
        r = self.radius_over_wavelength
        if not (isinstance(r, (int, float, np.floating)) and math.isfinite(r)):
            raise ConfigurationError("array.radius_over_wavelength: must be a finite number")
        if not (0.0 < r <= 0.25):
            raise ConfigurationError("array.radius_over_wavelength: must be in (0, 1/4]")
        object.__setattr__(self, "n_sensors", int(n))
        object.__setattr__(self, "zeta", TAU * float(r))


@dataclass(frozen=True)
class SourceTruth:
    """Ground-truth source: azimuth in [0, 2*pi), elevation in (0, pi/2), linear power P > 0."""

    azimuth: float
    elevation: float
    power: float
    waveform: Waveform = Waveform.CONSTANT_AMPLITUDE

    def __post_init__(self):
        if not (0.0 <= self.azimuth < TAU):
            raise ConfigurationError("source.azimuth: must be in [0, 2*pi) radians")
        if not (0.0 < self.elevation < HALF_PI):
            raise ConfigurationError("source.elevation: must be strictly inside (0, pi/2) radians")
        if not (self.power > 0.0 and math.isfinite(self.power)):
            raise ConfigurationError("source.power: must be a finite positive linear power")
        if not isinstance(self.waveform, Waveform):
            raise ConfigurationError("source.waveform: must be a Waveform value")


@dataclass(frozen=True)
class NoiseModel:
    """Per-sensor noise variances sigma_n^2 >= 0; the uniform case has all entries equal."""

    variances: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.variances)
        if len(values) == 0:
            raise ConfigurationError("noise.variances: must not be empty")
        for v in values:
            if not (math.isfinite(v) and v >= 0.0):
                raise ConfigurationError("noise.variances: entries must be finite and >= 0")
        object.__setattr__(self, "variances", values)

    @classmethod
    def uniform(cls, variance: float, n_sensors: int) -> "NoiseModel":
        return cls((float(variance),) * int(n_sensors))

    @property
    def is_uniform(self) -> bool:
        return all(v == self.variances[0] for v in self.variances)


@dataclass(frozen=True)
class SnapshotSet:
    """Immutable N x L complex observation matrix (sensors along rows)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.complex128, order="C")
        if data.ndim != 2:
            raise ValueError("snapshot data must be a 2-D matrix (sensors x snapshots)")
        if data.shape[1] < 1:
            raise ValueError("snapshot data must contain at least one snapshot")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_sensors(self) -> int:
        return self.data.shape[0]

    @property
    def n_snapshots(self) -> int:
        return self.data.shape[1]


def wrap_to_two_pi(angle: float) -> float:
    """Wrap an angle into [0, 2*pi) via ``angle - 2*pi*floor(angle/2*pi)``."""
    wrapped = angle - TAU * math.floor(angle / TAU)
    if wrapped >= TAU:
        wrapped -= TAU
    elif wrapped < 0.0:
        wrapped += TAU
    return wrapped


def sensor_polar_angles(cfg: ArrayConfig) -> np.ndarray:
    """Polar angles theta_n = 2*pi*(n-1)/N of all N sensors, n = 1..N."""
    return TAU * np.arange(cfg.n_sensors) / cfg.n_sensors


def sensor_polar_angle(n: int, cfg: ArrayConfig) -> float:
    """Polar angle of the n-th sensor (1-based), in [0, 2*pi)."""
    if not 1 <= n <= cfg.n_sensors:
        raise ValueError(f"sensor index {n} out of range [1, {cfg.n_sensors}]")
    return TAU * (n - 1) / cfg.n_sensors


def sensor_phases(src: SourceTruth, cfg: ArrayConfig) -> np.ndarray:
    """Phase of the plane wave at every sensor relative to the array origin.

    Entry n-1 holds ``psi_n = -zeta * sin(elevation) * cos(azimuth - theta_n)``,
    so ``|psi_n| <= zeta * sin(elevation) <= zeta``.
    """
    thetas = sensor_polar_angles(cfg)
    return -cfg.zeta * np.sin(src.elevation) * np.cos(src.azimuth - thetas)


def phase_at_sensor(n: int, src: SourceTruth, cfg: ArrayConfig) -> float:
    """Phase psi_n at the n-th sensor (1-based)."""
    if not 1 <= n <= cfg.n_sensors:
        raise ValueError(f"sensor index {n} out of range [1, {cfg.n_sensors}]")
    return float(sensor_phases(src, cfg)[n - 1])


def synthesize_snapshots(
    src: SourceTruth,
    cfg: ArrayConfig,
    noise: NoiseModel,
    n_snapshots: int,
    seed: int,
) -> SnapshotSet:
    """Draw L noisy snapshots ``x_n(l) = exp(j*psi_n) * s(l) + w_n(l)``.

    The source sample is ``s(l) = sqrt(P)`` in constant-amplitude mode, or
    ``sqrt(P) * exp(j*u(l))`` with u(l) uniform on [0, 2*pi) in random-phase
    mode. Noise is circularly symmetric complex Gaussian with per-sensor
    variance sigma_n^2, split evenly between real and imaginary parts.
    Identical (seed, arguments) produce a bit-identical matrix.

    Parameters
    ----------
    src, cfg, noise : model objects
    n_snapshots : int
        Snapshot count L >= 1.
    seed : int
        RNG seed; snapshots are statistically independent across l.
    """
    if n_snapshots < 1:
        raise ConfigurationError("snapshots: must be at least 1")
    if len(noise.variances) != cfg.n_sensors:
        raise ConfigurationError(
            f"noise.variances: length {len(noise.variances)} must equal array.n_sensors {cfg.n_sensors}"
        )
    rng = np.random.default_rng(seed)
    amplitude = math.sqrt(src.power)
    if src.waveform is Waveform.RANDOM_PHASE:
        s = amplitude * np.exp(1j * rng.uniform(0.0, TAU, size=n_snapshots))
    else:
        s = amplitude * np.ones(n_snapshots)
    shape = (cfg.n_sensors, n_snapshots)
    w = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    w *= np.sqrt(np.asarray(noise.variances) / 2.0)[:, None]
    data = np.exp(1j * sensor_phases(src, cfg))[:, None] * s[None, :] + w
    return SnapshotSet(data)
