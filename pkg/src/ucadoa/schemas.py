"""Pydantic request/response models for the estimation service."""

from typing import Literal

from pydantic import BaseModel, Field


class ArraySpec(BaseModel):
    n_sensors: int
    radius_over_wavelength: float


class SourceSpec(BaseModel):
    azimuth_deg: float
    elevation_deg: float
    waveform: Literal["constant", "random_phase"] = "constant"


class NoiseSpec(BaseModel):
    variance: float | None = None
    variances: list[float] | None = None


class MLSpec(BaseModel):
    subset: list[int]
    m_divisor: float = 10.0
    alpha: float = 0.3
    beta: float = 0.5
    grad_tolerance: float = 0.03
    max_outer_iters: int = 500
    max_backtracks: int = 60


class SnapshotPayload(BaseModel):
    """One row per snapshot; each row interleaves x_1_re, x_1_im, ..., x_N_im."""

    n_sensors: int
    rows: list[list[float]]


class DiagnosticsModel(BaseModel):
    i_star: int | None = None
    min_abs_imag: float | None = None
    branch: str | None = None
    clamped: bool = False
    iterations: int | None = None
    halt_reason: str | None = None


class AngleEstimateModel(BaseModel):
    azimuth_rad: float
    elevation_rad: float
    method: Literal["quantized", "ml"]
    diagnostics: DiagnosticsModel | None = None


class EstimateRequest(BaseModel):
    array: ArraySpec
    snapshots: SnapshotPayload
    ml: MLSpec | None = None


class EstimateResponse(BaseModel):
    quantized: AngleEstimateModel
    ml: AngleEstimateModel | None = None


class SynthRequest(BaseModel):
    array: ArraySpec
    source: SourceSpec
    power_db: float = 0.0
    noise: NoiseSpec = NoiseSpec()
    n_snapshots: int = Field(ge=1)
    seed: int = Field(ge=0)


class SynthResponse(BaseModel):
    snapshots: SnapshotPayload


class SweepRequest(BaseModel):
    array: ArraySpec
    source: SourceSpec
    power_db_grid: list[float]
    noise: NoiseSpec = NoiseSpec()
    n_snapshots: int = Field(ge=1)
    runs: int = Field(ge=1)
    seed: int = Field(ge=0)
    ml: MLSpec | None = None
    crlb: bool = False
    workers: int = Field(default=1, ge=1)


class SweepRowModel(BaseModel):
    power_db: float
    mse_az_quant: float | None
    mse_el_quant: float | None
    mse_az_ml: float | None = None
    mse_el_ml: float | None = None
    crlb_az: float | None = None
    crlb_el: float | None = None
    n_failures_quant: int
    n_failures_ml: int | None = None


class SweepResponse(BaseModel):
    rows: list[SweepRowModel]


class CrlbRequest(BaseModel):
    array: ArraySpec
    source: SourceSpec
    powers_db: list[float]
    noise: NoiseSpec = NoiseSpec()
    n_snapshots: int = Field(ge=1)
    subset: list[int] | None = None


class CrlbPointModel(BaseModel):
    power_db: float
    crlb_az: float
    crlb_el: float


class CrlbResponse(BaseModel):
    points: list[CrlbPointModel]


class ErrorBody(BaseModel):
    category: Literal["config", "parse", "degenerate", "numerical"]
    message: str
