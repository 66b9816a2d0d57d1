"""Flat key=value experiment configuration: parsing and validation.

Format: one ``key = value`` pair per line, dotted keys for nesting, ``#``
starts a comment. Angles are configured in degrees (converted to radians
internally), powers in dB.
"""

import math
from dataclasses import dataclass

from .errors import ConfigurationError
from .ml import MLConfig
from .model import ArrayConfig, NoiseModel, SourceTruth, Waveform

_WAVEFORMS = {
    "constant": Waveform.CONSTANT_AMPLITUDE,
    "random_phase": Waveform.RANDOM_PHASE,
}
_BOOLEANS = {"true": True, "false": False}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated sweep definition; optional pieces stay None until required."""

    array: ArrayConfig
    noise: NoiseModel
    azimuth_deg: float | None = None
    elevation_deg: float | None = None
    waveform: Waveform = Waveform.CONSTANT_AMPLITUDE
    power_db_grid: tuple | None = None
    n_snapshots: int | None = None
    runs: int | None = None
    seed: int | None = None
    ml: MLConfig | None = None
    crlb_enabled: bool = False

    def source(self, power_db: float) -> SourceTruth:
        """Ground truth at one grid power; requires the source angles."""
        if self.azimuth_deg is None:
            raise ConfigurationError("source.azimuth_deg: required for this operation")
        if self.elevation_deg is None:
            raise ConfigurationError("source.elevation_deg: required for this operation")
        return SourceTruth(
            azimuth=math.radians(self.azimuth_deg),
            elevation=math.radians(self.elevation_deg),
            power=10.0 ** (float(power_db) / 10.0),
            waveform=self.waveform,
        )

    def require(self, **fields):
        """Raise naming the first config key in ``fields`` whose value is None."""
        for key, value in fields.items():
            if value is None:
                raise ConfigurationError(f"{key}: required for this operation")


def _parse_lines(text: str) -> dict:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {line!r}")
        if key in entries:
            raise ConfigurationError(f"line {lineno}: duplicate key '{key}'")
        entries[key] = value
    return entries


def _take_float(entries, key, default=None):
    if key not in entries:
        return default
    raw = entries.pop(key)
    try:
        value = float(raw)
    except ValueError:
        raise ConfigurationError(f"{key}: expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigurationError(f"{key}: must be finite")
    return value


def _take_int(entries, key, default=None):
    if key not in entries:
        return default
    raw = entries.pop(key)
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{key}: expected an integer, got {raw!r}") from None


def _take_bool(entries, key, default=False):
    if key not in entries:
        return default
    raw = entries.pop(key).lower()
    if raw not in _BOOLEANS:
        raise ConfigurationError(f"{key}: expected true or false, got {raw!r}")
    return _BOOLEANS[raw]


def _take_float_list(entries, key):
    if key not in entries:
        return None
    raw = entries.pop(key)
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigurationError(f"{key}: expected a comma-separated list of numbers")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigurationError(f"{key}: expected numbers, got {raw!r}") from None


def _take_int_list(entries, key):
    values = _take_float_list(entries, key)
    if values is None:
        return None
    for v in values:
        if v != int(v):
            raise ConfigurationError(f"{key}: expected integers")
    return tuple(int(v) for v in values)


def parse_config_text(text: str) -> ExperimentConfig:
    entries = _parse_lines(text)

    n_sensors = _take_int(entries, "array.n_sensors")
    if n_sensors is None:
        raise ConfigurationError("array.n_sensors: required")
    ratio = _take_float(entries, "array.radius_over_wavelength")
    if ratio is None:
        raise ConfigurationError("array.radius_over_wavelength: required")
    array = ArrayConfig(n_sensors, ratio)

    azimuth_deg = _take_float(entries, "source.azimuth_deg")
    if azimuth_deg is not None and not 0.0 <= azimuth_deg < 360.0:
        raise ConfigurationError("source.azimuth_deg: must be in [0, 360)")
    elevation_deg = _take_float(entries, "source.elevation_deg")
    if elevation_deg is not None and not 0.0 < elevation_deg < 90.0:
        raise ConfigurationError("source.elevation_deg: must be strictly between 0 and 90")
    waveform_raw = entries.pop("source.waveform", "constant")
    if waveform_raw not in _WAVEFORMS:
        raise ConfigurationError(
            f"source.waveform: expected one of {sorted(_WAVEFORMS)}, got {waveform_raw!r}"
        )
    power_db_grid = _take_float_list(entries, "source.power_db_grid")
    if power_db_grid is not None:
        if any(b <= a for a, b in zip(power_db_grid, power_db_grid[1:])):
            raise ConfigurationError("source.power_db_grid: must be sorted strictly ascending")

    variance = _take_float(entries, "noise.variance")
    variances = _take_float_list(entries, "noise.variances")
    if variance is not None and variances is not None:
        raise ConfigurationError("noise.variance: give either noise.variance or noise.variances, not both")
    if variances is not None:
        if len(variances) != array.n_sensors:
            raise ConfigurationError(
                f"noise.variances: expected {array.n_sensors} entries, got {len(variances)}"
            )
        noise = NoiseModel(variances)
    else:
        noise = NoiseModel.uniform(1.0 if variance is None else variance, array.n_sensors)

    n_snapshots = _take_int(entries, "snapshots")
    if n_snapshots is not None and n_snapshots < 1:
        raise ConfigurationError("snapshots: must be at least 1")
    runs = _take_int(entries, "runs")
    if runs is not None and runs < 1:
        raise ConfigurationError("runs: must be at least 1")
    seed = _take_int(entries, "seed")
    if seed is not None and seed < 0:
        raise ConfigurationError("seed: must be non-negative")

    ml_enabled = _take_bool(entries, "ml.enable", default=False)
    subset = _take_int_list(entries, "ml.subset")
    ml_kwargs = {
        "m_divisor": _take_float(entries, "ml.m_divisor", 10.0),
        "armijo_alpha": _take_float(entries, "ml.alpha", 0.3),
        "backtrack_beta": _take_float(entries, "ml.beta", 0.5),
        "grad_tolerance": _take_float(entries, "ml.grad_tolerance", 0.03),
        "max_outer_iters": _take_int(entries, "ml.max_outer_iters", 500),
        "max_backtracks": _take_int(entries, "ml.max_backtracks", 60),
    }
    ml = None
    if ml_enabled:
        if subset is None:
            raise ConfigurationError("ml.subset: required when ml.enable is true")
        ml = MLConfig(subset=subset, **ml_kwargs)
        if max(ml.subset) > array.n_sensors:
            raise ConfigurationError(
                f"ml.subset: sensor index {max(ml.subset)} exceeds array.n_sensors {array.n_sensors}"
            )

    crlb_enabled = _take_bool(entries, "crlb.enable", default=False)

    if entries:
        unknown = sorted(entries)[0]
        raise ConfigurationError(f"unknown config key '{unknown}'")

    return ExperimentConfig(
        array=array,
        noise=noise,
        azimuth_deg=azimuth_deg,
        elevation_deg=elevation_deg,
        waveform=_WAVEFORMS[waveform_raw],
        power_db_grid=power_db_grid,
        n_snapshots=n_snapshots,
        runs=runs,
        seed=seed,
        ml=ml,
        crlb_enabled=crlb_enabled,
    )


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config_text(handle.read())
