"""Angle-quantization 2-D estimator built on N/2 antipodal-pair covariances.

The azimuth candidate set is the N-point grid {theta_i +/- pi/2}: for each of
the N/2 antipodal sensor pairs (i, i+N/2) the pair covariance is real exactly
when the source azimuth sits a quarter turn from theta_i, so the pair whose
covariance is closest to real selects the quantized azimuth, one extra sign
test resolves the half-turn ambiguity, and the argument of that same
disambiguation covariance yields the elevation through an arcsine.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .covariance import principal_argument
from .errors import DegenerateInputError, NumericalError
from .model import HALF_PI, ArrayConfig, SnapshotSet, sensor_polar_angle, wrap_to_two_pi


class EstimationMethod(str, enum.Enum):
    QUANTIZED = "quantized"
    ML = "ml"


class AzimuthBranch(str, enum.Enum):
    """Which candidate the disambiguation sign test selected."""

    PLUS_HALF_PI = "plus_half_pi"
    PLUS_THREE_HALVES_PI = "plus_three_halves_pi"
    MINUS_HALF_PI = "minus_half_pi"


@dataclass(frozen=True)
class EstimateDiagnostics:
    """Optional per-estimate bookkeeping surfaced to callers and reports."""

    i_star: int | None = None
    min_abs_imag: float | None = None
    branch: AzimuthBranch | None = None
    clamped: bool = False
    iterations: int | None = None
    halt_reason: str | None = None
    objective_trace: tuple = ()
    elevation_trace: tuple = ()


@dataclass(frozen=True)
class AngleEstimate:
    """Azimuth/elevation pair with the producing method and diagnostics.

    Azimuth lies in [0, 2*pi); elevation lies in [0, pi/2], the closed ends
    reachable only through noise-induced clamping (flagged in diagnostics).
    """

    azimuth: float
    elevation: float
    method: EstimationMethod
    diagnostics: EstimateDiagnostics | None = None

    def __post_init__(self):
        if not (0.0 <= self.azimuth < 2.0 * math.pi):
            raise ValueError("estimate azimuth must be in [0, 2*pi)")
        if not (0.0 <= self.elevation <= HALF_PI):
            raise ValueError("estimate elevation must be in [0, pi/2]")


def antipodal_pair_scan(snaps: SnapshotSet, cfg: ArrayConfig):
    """Scan the N/2 antipodal pair covariances for the one closest to real.

    Returns
    -------
    i_star : int
        1-based index in [1, N/2] minimizing |Im{r_hat_{i, i+N/2}}|; ties go
        to the smallest index.
    pair_covariances : np.ndarray
        All N/2 scanned covariances; entry k-1 is r_hat_{k, k+N/2}. The
        disambiguation step reuses entries at i_star +/- N/4, so no further
        covariance is ever computed.
    """
    n = cfg.n_sensors
    if snaps.n_sensors != n:
        raise ValueError(f"snapshot rows {snaps.n_sensors} do not match array.n_sensors {n}")
    half = n // 2
    data = snaps.data
    pair_covariances = (data[:half] * np.conj(data[half:])).mean(axis=1)
    if not np.all(np.isfinite(pair_covariances)):
        raise NumericalError("pair covariances are non-finite (bad snapshot data)")
    # np.argmin keeps the first occurrence of the minimum: smallest index wins ties.
    i_star = int(np.argmin(np.abs(pair_covariances.imag))) + 1
    return i_star, pair_covariances


def _disambiguation_covariance(i_star: int, pair_covariances, cfg: ArrayConfig) -> complex:
    quarter = cfg.n_sensors // 4
    if i_star <= quarter:
        return complex(pair_covariances[i_star + quarter - 1])
    return complex(pair_covariances[i_star - quarter - 1])


def resolve_azimuth(i_star: int, pair_covariances, cfg: ArrayConfig):
    """Pick the azimuth candidate theta_{i*} +/- pi/2 using one sign test.

    For i* <= N/4 the covariance of the pair a quarter turn ahead is
    inspected: a negative imaginary part puts the source at theta_{i*}+pi/2,
    otherwise at theta_{i*}+3*pi/2. For i* > N/4 the pair a quarter turn
    behind is inspected with the opposite sign convention. An exactly zero
    imaginary part with a nonzero covariance falls to the second candidate;
    an exactly zero covariance carries no direction information and raises.

    Returns ``(azimuth in [0, 2*pi), branch, disambiguation_covariance)``.
    """
    half = cfg.n_sensors // 2
    quarter = cfg.n_sensors // 4
    if not 1 <= i_star <= half:
        raise ValueError(f"i_star {i_star} out of range [1, {half}]")
    if len(pair_covariances) != half:
        raise ValueError(f"expected {half} pair covariances, got {len(pair_covariances)}")
    disambig = _disambiguation_covariance(i_star, pair_covariances, cfg)
    if not (math.isfinite(disambig.real) and math.isfinite(disambig.imag)):
        raise NumericalError("disambiguation covariance is non-finite")
    if disambig == 0:
        raise DegenerateInputError(
            "disambiguation covariance is exactly zero: no direction information"
        )
    theta_i = sensor_polar_angle(i_star, cfg)
    if i_star <= quarter:
        if disambig.imag < 0.0:
            branch = AzimuthBranch.PLUS_HALF_PI
            azimuth = theta_i + HALF_PI
        else:
            branch = AzimuthBranch.PLUS_THREE_HALVES_PI
            azimuth = theta_i + 3.0 * HALF_PI
    else:
        if disambig.imag > 0.0:
            branch = AzimuthBranch.PLUS_HALF_PI
            azimuth = theta_i + HALF_PI
        else:
            branch = AzimuthBranch.MINUS_HALF_PI
            azimuth = theta_i - HALF_PI
    return wrap_to_two_pi(azimuth), branch, disambig


def resolve_elevation(i_star: int, branch: AzimuthBranch, pair_covariances, cfg: ArrayConfig):
    """Elevation from the disambiguation covariance argument via arcsine.

    The argument of the disambiguation covariance approximates
    ``-/+ 2*zeta*sin(elevation)``, the sign fixed by the chosen azimuth
    branch, so elevation = arcsin(argument / (+/- 2*zeta)). Noise can push
    the operand outside [-1, 1] (when 2*zeta < pi) or below zero; both are
    clamped into the valid range and the clamp is flagged rather than raised.

    Returns ``(elevation in [0, pi/2], clamped)``.
    """
    quarter = cfg.n_sensors // 4
    disambig = _disambiguation_covariance(i_star, pair_covariances, cfg)
    if i_star <= quarter:
        negative_divisor = branch is AzimuthBranch.PLUS_HALF_PI
    else:
        negative_divisor = branch is AzimuthBranch.MINUS_HALF_PI
    divisor = -2.0 * cfg.zeta if negative_divisor else 2.0 * cfg.zeta
    operand = principal_argument(disambig) / divisor
    if not math.isfinite(operand):
        raise NumericalError(f"elevation arcsine operand is non-finite: {operand!r}")
    clamped = False
    if operand > 1.0:
        operand = 1.0
        clamped = True
    elif operand < -1.0:
        operand = -1.0
        clamped = True
    elevation = math.asin(operand)
    if elevation < 0.0:
        elevation = 0.0
        clamped = True
    return elevation, clamped


def estimate_quantized(snaps: SnapshotSet, cfg: ArrayConfig) -> AngleEstimate:
    """Run the full quantized estimator: scan, azimuth sign test, elevation.

    Exactly N/2 covariances are computed; the disambiguation covariance is
    reused from the scan.
    """
    i_star, pair_covariances = antipodal_pair_scan(snaps, cfg)
    azimuth, branch, _ = resolve_azimuth(i_star, pair_covariances, cfg)
    elevation, clamped = resolve_elevation(i_star, branch, pair_covariances, cfg)
    diagnostics = EstimateDiagnostics(
        i_star=i_star,
        min_abs_imag=float(abs(pair_covariances[i_star - 1].imag)),
        branch=branch,
        clamped=clamped,
    )
    return AngleEstimate(azimuth, elevation, EstimationMethod.QUANTIZED, diagnostics)
