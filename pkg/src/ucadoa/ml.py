"""Deterministic-ML refinement on a K-sensor subset via gradient descent.

The objective is the negative real trace of the product of the model matrix
A (unit-modulus phase structure at the candidate angles) with the sample
covariance matrix of the chosen subset. Descent uses the analytic gradient,
an elevation-feasible initial step, and Armijo backtracking; the quantized
estimate supplies the starting point.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, NumericalError
from .model import HALF_PI, ArrayConfig, SnapshotSet, TAU, wrap_to_two_pi
from .quantized import AngleEstimate, EstimateDiagnostics, EstimationMethod

_ELEVATION_NUDGE = 1e-6


@dataclass(frozen=True)
class MLConfig:
    """Subset choice and descent parameters.

    subset holds 1-based sensor indices; the initial step each iteration is
    the elevation-feasibility bound divided by m_divisor, and backtracking
    multiplies by backtrack_beta until the Armijo condition with slope
    fraction armijo_alpha holds. The outer loop stops when the gradient norm
    falls below grad_tolerance, when the elevation gradient is exactly zero,
    or at the iteration caps.
    """

    subset: tuple
    m_divisor: float = 10.0
    armijo_alpha: float = 0.3
    backtrack_beta: float = 0.5
    grad_tolerance: float = 0.03
    max_outer_iters: int = 500
    max_backtracks: int = 60

    def __post_init__(self):
        indices = tuple(int(i) for i in self.subset)
        if len(indices) < 1:
            raise ConfigurationError("ml.subset: must contain at least one sensor index")
        if len(set(indices)) != len(indices):
            raise ConfigurationError("ml.subset: sensor indices must be distinct")
        if any(i < 1 for i in indices):
            raise ConfigurationError("ml.subset: sensor indices are 1-based and must be >= 1")
        object.__setattr__(self, "subset", indices)
        if not self.m_divisor > 1.0:
            raise ConfigurationError("ml.m_divisor: must be greater than 1")
        if not 0.0 < self.armijo_alpha < 0.5:
            raise ConfigurationError("ml.alpha: must be in (0, 0.5)")
        if not 0.0 < self.backtrack_beta < 1.0:
            raise ConfigurationError("ml.beta: must be in (0, 1)")
        if not self.grad_tolerance > 0.0:
            raise ConfigurationError("ml.grad_tolerance: must be positive")
        if self.max_outer_iters < 1:
            raise ConfigurationError("ml.max_outer_iters: must be at least 1")
        if self.max_backtracks < 1:
            raise ConfigurationError("ml.max_backtracks: must be at least 1")


@dataclass(frozen=True)
class SubsetMatrices:
    """K x K Hermitian pair: model matrix A and sample covariance R_hat."""

    a_matrix: np.ndarray
    r_hat: np.ndarray


def _subset_indices(cfg: ArrayConfig, ml: MLConfig) -> np.ndarray:
    indices = np.asarray(ml.subset, dtype=int)
    if indices.max() > cfg.n_sensors:
        raise ConfigurationError(
            f"ml.subset: sensor index {int(indices.max())} exceeds array.n_sensors {cfg.n_sensors}"
        )
    return indices


def _subset_polar_angles(cfg: ArrayConfig, ml: MLConfig) -> np.ndarray:
    return TAU * (_subset_indices(cfg, ml) - 1) / cfg.n_sensors


def _model_matrix(thetas: np.ndarray, zeta: float, azimuth: float, elevation: float) -> np.ndarray:
    phases = -zeta * np.sin(elevation) * np.cos(azimuth - thetas)
    a = np.exp(1j * phases)
    return a[:, None] * np.conj(a)[None, :]


def _subset_covariance(snaps: SnapshotSet, indices: np.ndarray) -> np.ndarray:
    rows = snaps.data[indices - 1]
    return (rows @ rows.conj().T) / snaps.n_snapshots


def _trace_real(a_matrix: np.ndarray, r_hat: np.ndarray) -> float:
    trace = complex(np.trace(a_matrix @ r_hat))
    if math.isfinite(trace.real) and math.isfinite(trace.imag):
        # Trace of a product of Hermitian matrices is real; residue is float noise.
        assert abs(trace.imag) <= 1e-9 * max(1.0, abs(trace.real))
    return trace.real


def build_subset_matrices(snaps: SnapshotSet, cfg: ArrayConfig, ml: MLConfig, angles) -> SubsetMatrices:
    """Model matrix at the candidate angles plus the subset sample covariance.

    R_hat depends only on the snapshots (diagonal included) and is
    angle-independent; A carries the candidate (azimuth, elevation).
    """
    azimuth, elevation = angles
    if not 0.0 < elevation < HALF_PI:
        raise ValueError("candidate elevation must be strictly inside (0, pi/2)")
    if snaps.n_sensors != cfg.n_sensors:
        raise ValueError(f"snapshot rows {snaps.n_sensors} do not match array.n_sensors {cfg.n_sensors}")
    indices = _subset_indices(cfg, ml)
    thetas = TAU * (indices - 1) / cfg.n_sensors
    return SubsetMatrices(
        a_matrix=_model_matrix(thetas, cfg.zeta, azimuth, elevation),
        r_hat=_subset_covariance(snaps, indices),
    )


def ml_objective(matrices: SubsetMatrices) -> float:
    """Negative real trace of A * R_hat (lower is better)."""
    return -_trace_real(matrices.a_matrix, matrices.r_hat)


def _gradient(thetas, zeta, azimuth, elevation, a_matrix, r_hat):
    pair_imag = (a_matrix * r_hat.T).imag  # entry (p, q) = Im{a_pq * rhat_qp}
    sin_d = np.sin(azimuth - thetas)
    cos_d = np.cos(azimuth - thetas)
    k = len(thetas)
    sum_az = 0.0
    sum_el = 0.0
    for p in range(k - 1):
        for q in range(p + 1, k):
            sum_az += (-sin_d[p] + sin_d[q]) * pair_imag[p, q]
            sum_el += (cos_d[p] - cos_d[q]) * pair_imag[p, q]
    d_azimuth = -2.0 * zeta * np.sin(elevation) * sum_az
    d_elevation = -2.0 * zeta * np.cos(elevation) * sum_el
    return float(d_azimuth), float(d_elevation)


def ml_gradient(matrices: SubsetMatrices, angles, cfg: ArrayConfig, ml: MLConfig):
    """Analytic gradient (d/d_azimuth, d/d_elevation) of the objective."""
    azimuth, elevation = angles
    thetas = _subset_polar_angles(cfg, ml)
    return _gradient(thetas, cfg.zeta, azimuth, elevation, matrices.a_matrix, matrices.r_hat)


def step_bound(angles, gradient) -> float:
    """Largest step keeping the elevation update strictly inside (0, pi/2).

    Moving against the gradient, a negative elevation gradient walks toward
    pi/2 and a positive one toward 0; the returned bound is the distance to
    the approached boundary over the gradient magnitude. A zero elevation
    gradient leaves the step unbounded (math.inf); the descent loop halts in
    that case, so the caller never consumes the infinity.
    """
    _, elevation = angles
    if not 0.0 < elevation < HALF_PI:
        raise ValueError("elevation must be strictly inside (0, pi/2)")
    d_elevation = gradient[1]
    if d_elevation < 0.0:
        return (HALF_PI - elevation) / (-d_elevation)
    if d_elevation > 0.0:
        return elevation / d_elevation
    return math.inf


def refine_ml(snaps: SnapshotSet, cfg: ArrayConfig, ml: MLConfig, start: AngleEstimate) -> AngleEstimate:
    """Gradient descent from a quantized starting point.

    Each iteration takes the elevation-feasibility bound over m_divisor as
    the trial step and backtracks until the Armijo decrease holds, so the
    accepted objective sequence is non-increasing and every elevation
    iterate stays strictly inside (0, pi/2). Azimuth may leave [0, 2*pi)
    during descent; only the final value is wrapped back. A boundary start
    elevation (possible after clamping) is nudged inward before descending.

    Raises NumericalError when the objective or gradient turns non-finite.
    """
    indices = _subset_indices(cfg, ml)
    if snaps.n_sensors != cfg.n_sensors:
        raise ValueError(f"snapshot rows {snaps.n_sensors} do not match array.n_sensors {cfg.n_sensors}")
    thetas = TAU * (indices - 1) / cfg.n_sensors
    r_hat = _subset_covariance(snaps, indices)  # angle-independent: built once

    azimuth = float(start.azimuth)
    elevation = float(start.elevation)
    if elevation <= 0.0:
        elevation = _ELEVATION_NUDGE
    elif elevation >= HALF_PI:
        elevation = HALF_PI - _ELEVATION_NUDGE

    def objective_at(az, el):
        return -_trace_real(_model_matrix(thetas, cfg.zeta, az, el), r_hat)

    def gradient_at(az, el, iteration):
        g = _gradient(thetas, cfg.zeta, az, el, _model_matrix(thetas, cfg.zeta, az, el), r_hat)
        if not (math.isfinite(g[0]) and math.isfinite(g[1])):
            raise NumericalError(f"gradient became non-finite at iteration {iteration}")
        return g

    current = objective_at(azimuth, elevation)
    if not math.isfinite(current):
        raise NumericalError("objective is non-finite at the starting point")
    d_az, d_el = gradient_at(azimuth, elevation, 0)
    objective_trace = [current]
    elevation_trace = [elevation]
    iterations = 0
    halt_reason = None

    while True:
        norm = math.hypot(d_az, d_el)
        if norm <= ml.grad_tolerance:
            halt_reason = "gradient_below_tolerance"
            break
        if d_el == 0.0:
            halt_reason = "elevation_gradient_zero"
            break
        if iterations >= ml.max_outer_iters:
            halt_reason = "max_outer_iterations"
            break
        t = step_bound((azimuth, elevation), (d_az, d_el)) / ml.m_divisor
        norm_sq = d_az * d_az + d_el * d_el
        backtracks = 0
        exhausted = False
        while True:
            candidate = objective_at(azimuth - t * d_az, elevation - t * d_el)
            if not math.isfinite(candidate):
                raise NumericalError(f"objective became non-finite at iteration {iterations}")
            if candidate <= current - ml.armijo_alpha * t * norm_sq:
                break
            if backtracks >= ml.max_backtracks:
                exhausted = True
                break
            t *= ml.backtrack_beta
            backtracks += 1
        if exhausted:
            halt_reason = "backtracking_exhausted"
            break
        azimuth -= t * d_az
        elevation -= t * d_el
        assert 0.0 < elevation < HALF_PI  # guaranteed by t < step bound
        iterations += 1
        current = candidate
        objective_trace.append(current)
        elevation_trace.append(elevation)
        d_az, d_el = gradient_at(azimuth, elevation, iterations)

    start_diag = start.diagnostics or EstimateDiagnostics()
    diagnostics = replace(
        start_diag,
        iterations=iterations,
        halt_reason=halt_reason,
        objective_trace=tuple(objective_trace),
        elevation_trace=tuple(elevation_trace),
    )
    return AngleEstimate(wrap_to_two_pi(azimuth), elevation, EstimationMethod.ML, diagnostics)
