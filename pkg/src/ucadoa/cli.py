"""Command-line client for the estimation service.

Each subcommand builds a request from the config file, sends it to the
service (an in-process app by default, or a remote server via --server),
and writes/prints the result. File handling stays on the client side.

Exit codes: 0 success, 2 config validation error, 3 input parse error,
4 numerical failure.
"""

import argparse
import asyncio
import math
import sys

import httpx

from .config import ExperimentConfig, load_config
from .errors import ConfigurationError, SnapshotFormatError
from .experiments import render_crlb_csv, render_sweep_csv
from .service import create_app
from .snapshot_io import read_snapshot_csv, rows_to_snapshots, snapshots_to_rows, write_snapshot_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_NUMERICAL = 4

_CATEGORY_EXIT = {"config": EXIT_CONFIG, "parse": EXIT_PARSE, "degenerate": EXIT_NUMERICAL, "numerical": EXIT_NUMERICAL}


class _CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _post(path: str, payload: dict, server: str | None) -> dict:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            response = client.post(path, json=payload)
    else:
        async def _run():
            transport = httpx.ASGITransport(app=create_app())
            async with httpx.AsyncClient(
                transport=transport, base_url="http://ucadoa.local", timeout=None
            ) as client:
                return await client.post(path, json=payload)

        response = asyncio.run(_run())
    body = response.json()
    if response.status_code != 200:
        category = body.get("category", "config") if isinstance(body, dict) else "config"
        message = body.get("message", str(body)) if isinstance(body, dict) else str(body)
        raise _CliError(message, _CATEGORY_EXIT.get(category, EXIT_CONFIG))
    return body


def _array_payload(config: ExperimentConfig) -> dict:
    return {
        "n_sensors": config.array.n_sensors,
        "radius_over_wavelength": config.array.radius_over_wavelength,
    }


def _source_payload(config: ExperimentConfig) -> dict:
    config.require(
        **{
            "source.azimuth_deg": config.azimuth_deg,
            "source.elevation_deg": config.elevation_deg,
        }
    )
    return {
        "azimuth_deg": config.azimuth_deg,
        "elevation_deg": config.elevation_deg,
        "waveform": config.waveform.value,
    }


def _noise_payload(config: ExperimentConfig) -> dict:
    return {"variances": list(config.noise.variances)}


def _ml_payload(config: ExperimentConfig) -> dict | None:
    if config.ml is None:
        return None
    return {
        "subset": list(config.ml.subset),
        "m_divisor": config.ml.m_divisor,
        "alpha": config.ml.armijo_alpha,
        "beta": config.ml.backtrack_beta,
        "grad_tolerance": config.ml.grad_tolerance,
        "max_outer_iters": config.ml.max_outer_iters,
        "max_backtracks": config.ml.max_backtracks,
    }


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    config.require(
        **{
            "source.power_db_grid": config.power_db_grid,
            "snapshots": config.n_snapshots,
            "runs": config.runs,
            "seed": config.seed,
        }
    )
    payload = {
        "array": _array_payload(config),
        "source": _source_payload(config),
        "power_db_grid": list(config.power_db_grid),
        "noise": _noise_payload(config),
        "n_snapshots": config.n_snapshots,
        "runs": config.runs,
        "seed": config.seed,
        "ml": _ml_payload(config),
        "crlb": config.crlb_enabled,
        "workers": args.workers,
    }
    body = _post("/sweep", payload, args.server)
    _write_text(args.out, render_sweep_csv(body["rows"]))
    return EXIT_OK


def _cmd_crlb(args) -> int:
    config = load_config(args.config)
    config.require(
        **{
            "source.power_db_grid": config.power_db_grid,
            "snapshots": config.n_snapshots,
        }
    )
    payload = {
        "array": _array_payload(config),
        "source": _source_payload(config),
        "powers_db": list(config.power_db_grid),
        "noise": _noise_payload(config),
        "n_snapshots": config.n_snapshots,
        "subset": list(config.ml.subset) if config.ml is not None else None,
    }
    body = _post("/crlb", payload, args.server)
    _write_text(args.out, render_crlb_csv(body["points"]))
    return EXIT_OK


def _cmd_synth(args) -> int:
    config = load_config(args.config)
    config.require(**{"snapshots": config.n_snapshots})
    if config.power_db_grid is not None and len(config.power_db_grid) != 1:
        raise ConfigurationError(
            "source.power_db_grid: synth uses a single power; give exactly one grid value"
        )
    power_db = config.power_db_grid[0] if config.power_db_grid else 0.0
    payload = {
        "array": _array_payload(config),
        "source": _source_payload(config),
        "power_db": power_db,
        "noise": _noise_payload(config),
        "n_snapshots": config.n_snapshots,
        "seed": args.seed,
    }
    body = _post("/synthesize", payload, args.server)
    snaps = rows_to_snapshots(body["snapshots"]["rows"], body["snapshots"]["n_sensors"])
    write_snapshot_csv(args.out, snaps)
    return EXIT_OK


def _print_estimate(label: str, estimate: dict) -> None:
    azimuth = estimate["azimuth_rad"]
    elevation = estimate["elevation_rad"]
    print(f"{label}:")
    print(f"  azimuth   = {azimuth!r} rad ({math.degrees(azimuth):.6f} deg)")
    print(f"  elevation = {elevation!r} rad ({math.degrees(elevation):.6f} deg)")
    diag = estimate.get("diagnostics") or {}
    parts = []
    if diag.get("i_star") is not None:
        parts.append(f"i* = {diag['i_star']}")
    if diag.get("min_abs_imag") is not None:
        parts.append(f"min |Im| = {diag['min_abs_imag']:.3e}")
    if diag.get("branch") is not None:
        parts.append(f"branch = {diag['branch']}")
    parts.append(f"clamped = {'yes' if diag.get('clamped') else 'no'}")
    if diag.get("iterations") is not None:
        parts.append(f"iterations = {diag['iterations']}")
    if diag.get("halt_reason") is not None:
        parts.append(f"halt = {diag['halt_reason']}")
    print("  " + ", ".join(parts))


def _cmd_estimate(args) -> int:
    config = load_config(args.config)
    snaps = read_snapshot_csv(args.input, expected_sensors=config.array.n_sensors)
    payload = {
        "array": _array_payload(config),
        "snapshots": {"n_sensors": snaps.n_sensors, "rows": snapshots_to_rows(snaps)},
        "ml": _ml_payload(config),
    }
    body = _post("/estimate", payload, args.server)
    _print_estimate("quantized estimate", body["quantized"])
    if body.get("ml") is not None:
        _print_estimate("ml estimate", body["ml"])
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ucadoa",
        description="2-D direction-of-arrival estimation for massive uniform circular arrays",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="Monte Carlo MSE sweep over a power grid, CSV out")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--workers", type=int, default=1)
    sweep.set_defaults(func=_cmd_sweep)

    estimate = sub.add_parser("estimate", help="estimate angles from a snapshot CSV file")
    estimate.add_argument("--config", required=True)
    estimate.add_argument("--input", required=True)
    estimate.set_defaults(func=_cmd_estimate)

    crlb = sub.add_parser("crlb", help="CRLB reference curve over a power grid, CSV out")
    crlb.add_argument("--config", required=True)
    crlb.add_argument("--out", required=True)
    crlb.set_defaults(func=_cmd_crlb)

    synth = sub.add_parser("synth", help="synthesize a snapshot CSV from the configured model")
    synth.add_argument("--config", required=True)
    synth.add_argument("--out", required=True)
    synth.add_argument("--seed", type=int, required=True)
    synth.set_defaults(func=_cmd_synth)

    serve = sub.add_parser("serve", help="run the estimation service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=_cmd_serve)

    for name, command in sub.choices.items():
        if name != "serve":
            command.add_argument("--server", default=None, help="base URL of a running service (default: in-process)")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SnapshotFormatError as exc:
        print(f"input parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"input parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
