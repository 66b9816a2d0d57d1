"""Snapshot CSV format: one row per snapshot, interleaved re/im sensor columns.

Header row is ``x_1_re,x_1_im,...,x_N_re,x_N_im``; values are decimal floats
written with full round-trip precision, so write -> read recovers the exact
matrix. The same row layout is used as the wire format of the service.
"""

import numpy as np

from .errors import SnapshotFormatError
from .model import SnapshotSet


def snapshot_header(n_sensors: int) -> list:
    names = []
    for n in range(1, n_sensors + 1):
        names.append(f"x_{n}_re")
        names.append(f"x_{n}_im")
    return names


def snapshots_to_rows(snaps: SnapshotSet) -> list:
    """Interleave the N x L matrix into L rows of 2N floats."""
    stacked = np.empty((snaps.n_snapshots, 2 * snaps.n_sensors))
    stacked[:, 0::2] = snaps.data.real.T
    stacked[:, 1::2] = snaps.data.imag.T
    return [[float(v) for v in row] for row in stacked]


def rows_to_snapshots(rows, n_sensors: int) -> SnapshotSet:
    """Rebuild the N x L matrix from interleaved rows (exact inverse of snapshots_to_rows)."""
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 * n_sensors:
        raise SnapshotFormatError(
            f"expected rows of {2 * n_sensors} values for {n_sensors} sensors"
        )
    data = (arr[:, 0::2] + 1j * arr[:, 1::2]).T
    return SnapshotSet(data)


def snapshot_csv_text(snaps: SnapshotSet) -> str:
    lines = [",".join(snapshot_header(snaps.n_sensors))]
    for row in snapshots_to_rows(snaps):
        lines.append(",".join(repr(v) for v in row))
    return "\n".join(lines) + "\n"


def write_snapshot_csv(path, snaps: SnapshotSet) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(snapshot_csv_text(snaps))


def parse_snapshot_csv_text(text: str, expected_sensors: int | None = None) -> SnapshotSet:
    lines = text.splitlines()
    if not lines:
        raise SnapshotFormatError("empty snapshot file")
    header = [cell.strip() for cell in lines[0].split(",")]
    n_columns = len(header)
    if n_columns % 2 != 0:
        raise SnapshotFormatError(
            f"got {n_columns} columns; expected an even count (re/im pairs)", line=1
        )
    n_sensors = n_columns // 2
    if header != snapshot_header(n_sensors):
        raise SnapshotFormatError(
            "expected header x_1_re,x_1_im,...,x_N_re,x_N_im", line=1
        )
    if expected_sensors is not None and n_sensors != expected_sensors:
        raise SnapshotFormatError(
            f"file has {n_sensors} sensors ({n_columns} columns) but the "
            f"configured array has {expected_sensors}",
            line=1,
        )
    rows = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cells = raw.split(",")
        if len(cells) != n_columns:
            raise SnapshotFormatError(
                f"expected {n_columns} columns, got {len(cells)}", line=lineno
            )
        row = []
        for colno, cell in enumerate(cells, start=1):
            try:
                row.append(float(cell))
            except ValueError:
                raise SnapshotFormatError(
                    f"non-numeric value {cell.strip()!r}", line=lineno, column=colno
                ) from None
        rows.append(row)
    if not rows:
        raise SnapshotFormatError("no snapshot rows after the header")
    return rows_to_snapshots(rows, n_sensors)


def read_snapshot_csv(path, expected_sensors: int | None = None) -> SnapshotSet:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_snapshot_csv_text(handle.read(), expected_sensors)
