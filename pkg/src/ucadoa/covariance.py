"""Pairwise sensor covariances and the ambiguity-free principal argument."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError
from .model import ArrayConfig, SnapshotSet, SourceTruth, phase_at_sensor


@dataclass(frozen=True)
class PairCovariance:
    """Covariance between two distinct sensors i and j (1-based)."""

    i: int
    j: int
    value: complex

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("pair covariance requires two distinct sensors")


def exact_covariance(i: int, j: int, src: SourceTruth, cfg: ArrayConfig) -> complex:
    """Population covariance ``E{x_i x_j*} = P * exp(j*(psi_i - psi_j))`` for i != j.

    The identity holds only off the diagonal, where the noise terms are
    uncorrelated and drop out; it serves as the noiseless oracle for the
    sample estimator.
    """
    if i == j:
        raise ValueError("exact_covariance is undefined on the diagonal (noise power enters at i == j)")
    delta = phase_at_sensor(i, src, cfg) - phase_at_sensor(j, src, cfg)
    return complex(src.power * np.exp(1j * delta))


def sample_covariance(i: int, j: int, snaps: SnapshotSet) -> PairCovariance:
    """Snapshot average ``(1/L) * sum_l x_i(l) * conj(x_j(l))`` for i != j.

    Always evaluated in canonical index order and conjugated back, so the
    Hermitian symmetry r_hat_{i,j} = conj(r_hat_{j,i}) holds bit-exactly.
    """
    if i == j:
        raise ValueError("sample_covariance is undefined on the diagonal")
    n = snaps.n_sensors
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"sensor indices ({i}, {j}) out of range [1, {n}]")
    lo, hi = (i, j) if i < j else (j, i)
    value = complex((snaps.data[lo - 1] * np.conj(snaps.data[hi - 1])).mean())
    if i > j:
        value = value.conjugate()
    return PairCovariance(i, j, value)


def principal_argument(r: complex) -> float:
    """Angle of a nonzero complex number, resolved case by case into (-pi, pi].

    Uses arctan of the imaginary/real ratio shifted by +/-pi in the left
    half-plane, +/-pi/2 on the imaginary axis, and pi on the negative real
    axis (closing the remaining measure-zero case so the function is total).
    """
    re = float(np.real(r))
    im = float(np.imag(r))
    if re > 0.0:
        return math.atan(im / re)
    if re < 0.0:
        if im < 0.0:
            return math.atan(im / re) - math.pi
        if im > 0.0:
            return math.atan(im / re) + math.pi
        return math.pi
    if im > 0.0:
        return math.pi / 2.0
    if im < 0.0:
        return -math.pi / 2.0
    raise DegenerateInputError("argument of zero covariance is undefined")
