"""Seeded Monte Carlo sweeps over a power grid, with optional parallel workers.

Run r at grid point g uses a seed derived from sha256(base_seed, g, r), so
per-run work is a pure function of (config, grid index, run index): reruns
and any worker count produce identical results, and the result table is
assembled in grid order regardless of completion order.
"""

import hashlib
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .config import ExperimentConfig
from .errors import DegenerateInputError, NumericalError
from .metrics import ErrorStats, accumulate_errors, crlb_bound
from .ml import MLConfig, refine_ml
from .model import ArrayConfig, SnapshotSet, synthesize_snapshots
from .quantized import estimate_quantized

SWEEP_CSV_COMMENT = (
    "# mse_* and crlb_* columns in rad^2; power_db in dB; "
    "ml/crlb columns empty when disabled"
)
SWEEP_CSV_COLUMNS = (
    "power_db",
    "mse_az_quant",
    "mse_el_quant",
    "mse_az_ml",
    "mse_el_ml",
    "crlb_az",
    "crlb_el",
    "n_failures_quant",
    "n_failures_ml",
)
CRLB_CSV_COMMENT = "# crlb_az and crlb_el in rad^2; power_db in dB"
CRLB_CSV_COLUMNS = ("power_db", "crlb_az", "crlb_el")


@dataclass(frozen=True)
class SweepRow:
    power_db: float
    quant: ErrorStats
    ml: ErrorStats | None
    crlb_azimuth: float | None
    crlb_elevation: float | None

    def as_dict(self) -> dict:
        """Flatten to the sweep CSV column schema (None for disabled columns)."""
        return {
            "power_db": self.power_db,
            "mse_az_quant": self.quant.mse_azimuth,
            "mse_el_quant": self.quant.mse_elevation,
            "mse_az_ml": None if self.ml is None else self.ml.mse_azimuth,
            "mse_el_ml": None if self.ml is None else self.ml.mse_elevation,
            "crlb_az": self.crlb_azimuth,
            "crlb_el": self.crlb_elevation,
            "n_failures_quant": self.quant.n_failures,
            "n_failures_ml": None if self.ml is None else self.ml.n_failures,
        }


def derive_run_seed(base_seed: int, grid_index: int, run_index: int) -> int:
    """Deterministic 64-bit seed for run r at grid point g."""
    digest = hashlib.sha256(f"{base_seed}:{grid_index}:{run_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def estimate_pipeline(snaps: SnapshotSet, cfg: ArrayConfig, ml: MLConfig | None = None):
    """Quantized estimate plus, when configured, the ML refinement seeded from it."""
    quant = estimate_quantized(snaps, cfg)
    refined = refine_ml(snaps, cfg, ml, quant) if ml is not None else None
    return quant, refined


def _sweep_run(config: ExperimentConfig, power_db: float, seed: int):
    """One Monte Carlo run; estimator failures become None entries."""
    src = config.source(power_db)
    snaps = synthesize_snapshots(src, config.array, config.noise, config.n_snapshots, seed)
    try:
        quant = estimate_quantized(snaps, config.array)
    except (DegenerateInputError, NumericalError):
        return None, None
    if config.ml is None:
        return quant, None
    try:
        refined = refine_ml(snaps, config.array, config.ml, quant)
    except (DegenerateInputError, NumericalError):
        return quant, None
    return quant, refined


def _sweep_worker(task):
    config, power_db, seed = task
    return _sweep_run(config, power_db, seed)


def run_sweep(config: ExperimentConfig, workers: int = 1):
    """Monte Carlo MSE sweep over the power grid; returns one SweepRow per point."""
    config.require(
        **{
            "source.power_db_grid": config.power_db_grid,
            "source.azimuth_deg": config.azimuth_deg,
            "source.elevation_deg": config.elevation_deg,
            "snapshots": config.n_snapshots,
            "runs": config.runs,
            "seed": config.seed,
        }
    )
    if workers < 1:
        raise ValueError("workers must be at least 1")

    tasks = [
        (config, power_db, derive_run_seed(config.seed, g, r))
        for g, power_db in enumerate(config.power_db_grid)
        for r in range(config.runs)
    ]
    if workers == 1:
        results = [_sweep_worker(task) for task in tasks]
    else:
        # spawn avoids inheriting any thread/lock state from server contexts
        context = multiprocessing.get_context("spawn")
        chunksize = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers, mp_context=context) as pool:
            results = list(pool.map(_sweep_worker, tasks, chunksize=chunksize))

    rows = []
    for g, power_db in enumerate(config.power_db_grid):
        chunk = results[g * config.runs : (g + 1) * config.runs]
        src = config.source(power_db)
        quant_stats = accumulate_errors([quant for quant, _ in chunk], src)
        ml_stats = None
        if config.ml is not None:
            ml_stats = accumulate_errors([refined for _, refined in chunk], src)
        crlb_az = crlb_el = None
        if config.crlb_enabled:
            crlb_az, crlb_el = crlb_bound(
                config.array, src, config.n_snapshots, config.noise,
                subset=config.ml.subset if config.ml is not None else None,
            )
        rows.append(SweepRow(float(power_db), quant_stats, ml_stats, crlb_az, crlb_el))
    return rows


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def render_sweep_csv(row_dicts) -> str:
    """Render sweep rows (dicts keyed by SWEEP_CSV_COLUMNS) as a stable CSV text."""
    lines = [SWEEP_CSV_COMMENT, ",".join(SWEEP_CSV_COLUMNS)]
    for row in row_dicts:
        lines.append(",".join(_format_cell(row[col]) for col in SWEEP_CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def render_crlb_csv(point_dicts) -> str:
    lines = [CRLB_CSV_COMMENT, ",".join(CRLB_CSV_COLUMNS)]
    for point in point_dicts:
        lines.append(",".join(_format_cell(point[col]) for col in CRLB_CSV_COLUMNS))
    return "\n".join(lines) + "\n"
