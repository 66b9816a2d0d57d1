"""FastAPI service wrapping the estimation core.

Endpoints mirror the CLI verbs: /synthesize, /estimate, /sweep, /crlb.
Domain errors map to a uniform JSON body ``{"category", "message"}`` whose
category drives the CLI exit code.
"""

import math

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import schemas
from .config import ExperimentConfig
from .errors import (
    ConfigurationError,
    DegenerateInputError,
    NumericalError,
    SnapshotFormatError,
)
from .experiments import estimate_pipeline, run_sweep
from .metrics import crlb_curve
from .ml import MLConfig
from .model import ArrayConfig, NoiseModel, SourceTruth, Waveform, synthesize_snapshots
from .quantized import AngleEstimate
from .snapshot_io import rows_to_snapshots, snapshots_to_rows

_ERROR_STATUS = {"config": 422, "parse": 400, "degenerate": 422, "numerical": 500}


def _array_from_spec(spec: schemas.ArraySpec) -> ArrayConfig:
    return ArrayConfig(spec.n_sensors, spec.radius_over_wavelength)


def _noise_from_spec(spec: schemas.NoiseSpec, array: ArrayConfig) -> NoiseModel:
    if spec.variance is not None and spec.variances is not None:
        raise ConfigurationError("noise.variance: give either variance or variances, not both")
    if spec.variances is not None:
        if len(spec.variances) != array.n_sensors:
            raise ConfigurationError(
                f"noise.variances: expected {array.n_sensors} entries, got {len(spec.variances)}"
            )
        return NoiseModel(tuple(spec.variances))
    return NoiseModel.uniform(1.0 if spec.variance is None else spec.variance, array.n_sensors)


def _source_from_spec(spec: schemas.SourceSpec, power_db: float) -> SourceTruth:
    if not 0.0 <= spec.azimuth_deg < 360.0:
        raise ConfigurationError("source.azimuth_deg: must be in [0, 360)")
    if not 0.0 < spec.elevation_deg < 90.0:
        raise ConfigurationError("source.elevation_deg: must be strictly between 0 and 90")
    return SourceTruth(
        azimuth=math.radians(spec.azimuth_deg),
        elevation=math.radians(spec.elevation_deg),
        power=10.0 ** (power_db / 10.0),
        waveform=Waveform(spec.waveform),
    )


def _ml_from_spec(spec: schemas.MLSpec | None) -> MLConfig | None:
    if spec is None:
        return None
    return MLConfig(
        subset=tuple(spec.subset),
        m_divisor=spec.m_divisor,
        armijo_alpha=spec.alpha,
        backtrack_beta=spec.beta,
        grad_tolerance=spec.grad_tolerance,
        max_outer_iters=spec.max_outer_iters,
        max_backtracks=spec.max_backtracks,
    )


def _estimate_model(estimate: AngleEstimate) -> schemas.AngleEstimateModel:
    diag = None
    if estimate.diagnostics is not None:
        d = estimate.diagnostics
        diag = schemas.DiagnosticsModel(
            i_star=d.i_star,
            min_abs_imag=d.min_abs_imag,
            branch=None if d.branch is None else d.branch.value,
            clamped=d.clamped,
            iterations=d.iterations,
            halt_reason=d.halt_reason,
        )
    return schemas.AngleEstimateModel(
        azimuth_rad=estimate.azimuth,
        elevation_rad=estimate.elevation,
        method=estimate.method.value,
        diagnostics=diag,
    )


def _finite_or_none(value):
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def create_app() -> FastAPI:
    app = FastAPI(
        title="ucadoa",
        description="2-D direction-of-arrival estimation service for massive uniform circular arrays",
        version="0.1.0",
    )

    def _error_response(category: str, exc: Exception) -> JSONResponse:
        body = schemas.ErrorBody(category=category, message=str(exc))
        return JSONResponse(status_code=_ERROR_STATUS[category], content=body.model_dump())

    @app.exception_handler(ConfigurationError)
    async def _config_error(request: Request, exc: ConfigurationError):
        return _error_response("config", exc)

    @app.exception_handler(SnapshotFormatError)
    async def _parse_error(request: Request, exc: SnapshotFormatError):
        return _error_response("parse", exc)

    @app.exception_handler(DegenerateInputError)
    async def _degenerate_error(request: Request, exc: DegenerateInputError):
        return _error_response("degenerate", exc)

    @app.exception_handler(NumericalError)
    async def _numerical_error(request: Request, exc: NumericalError):
        return _error_response("numerical", exc)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return _error_response("config", exc)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return _error_response("config", exc)

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/synthesize", response_model=schemas.SynthResponse)
    def synthesize(request: schemas.SynthRequest) -> schemas.SynthResponse:
        array = _array_from_spec(request.array)
        source = _source_from_spec(request.source, request.power_db)
        noise = _noise_from_spec(request.noise, array)
        snaps = synthesize_snapshots(source, array, noise, request.n_snapshots, request.seed)
        payload = schemas.SnapshotPayload(n_sensors=array.n_sensors, rows=snapshots_to_rows(snaps))
        return schemas.SynthResponse(snapshots=payload)

    @app.post("/estimate", response_model=schemas.EstimateResponse)
    def estimate(request: schemas.EstimateRequest) -> schemas.EstimateResponse:
        array = _array_from_spec(request.array)
        if request.snapshots.n_sensors != array.n_sensors:
            raise ConfigurationError(
                f"snapshots.n_sensors: payload has {request.snapshots.n_sensors} sensors "
                f"but the array has {array.n_sensors}"
            )
        snaps = rows_to_snapshots(request.snapshots.rows, request.snapshots.n_sensors)
        quant, refined = estimate_pipeline(snaps, array, _ml_from_spec(request.ml))
        return schemas.EstimateResponse(
            quantized=_estimate_model(quant),
            ml=None if refined is None else _estimate_model(refined),
        )

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(request: schemas.SweepRequest) -> schemas.SweepResponse:
        array = _array_from_spec(request.array)
        if not 0.0 <= request.source.azimuth_deg < 360.0:
            raise ConfigurationError("source.azimuth_deg: must be in [0, 360)")
        if not 0.0 < request.source.elevation_deg < 90.0:
            raise ConfigurationError("source.elevation_deg: must be strictly between 0 and 90")
        if not request.power_db_grid:
            raise ConfigurationError("source.power_db_grid: must not be empty")
        if any(b <= a for a, b in zip(request.power_db_grid, request.power_db_grid[1:])):
            raise ConfigurationError("source.power_db_grid: must be sorted strictly ascending")
        config = ExperimentConfig(
            array=array,
            noise=_noise_from_spec(request.noise, array),
            azimuth_deg=request.source.azimuth_deg,
            elevation_deg=request.source.elevation_deg,
            waveform=Waveform(request.source.waveform),
            power_db_grid=tuple(request.power_db_grid),
            n_snapshots=request.n_snapshots,
            runs=request.runs,
            seed=request.seed,
            ml=_ml_from_spec(request.ml),
            crlb_enabled=request.crlb,
        )
        rows = run_sweep(config, workers=request.workers)
        models = []
        for row in rows:
            cells = row.as_dict()
            for key in ("mse_az_quant", "mse_el_quant", "mse_az_ml", "mse_el_ml"):
                cells[key] = _finite_or_none(cells[key])
            models.append(schemas.SweepRowModel(**cells))
        return schemas.SweepResponse(rows=models)

    @app.post("/crlb", response_model=schemas.CrlbResponse)
    def crlb(request: schemas.CrlbRequest) -> schemas.CrlbResponse:
        array = _array_from_spec(request.array)
        if not request.powers_db:
            raise ConfigurationError("source.power_db_grid: must not be empty")
        source = _source_from_spec(request.source, request.powers_db[0])
        noise = _noise_from_spec(request.noise, array)
        points = crlb_curve(array, source, request.n_snapshots, noise, request.powers_db, request.subset)
        return schemas.CrlbResponse(
            points=[
                schemas.CrlbPointModel(
                    power_db=p.power_db, crlb_az=p.crlb_azimuth, crlb_el=p.crlb_elevation
                )
                for p in points
            ]
        )

    return app
