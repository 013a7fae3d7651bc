"""Strict readers for the simulator's output file formats.

Each file starts with two comment lines (``# format_version=…`` and
``# config=…``) followed by an exact header row.  Any deviation raises
``SchemaError`` — the renderer refuses rather than guesses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1

SERIES_COLUMNS = [
    "t", "vbar", "vbar_sq", "unparked_cars", "vacant_spots",
    "frac_spot_unvisited", "frac_closer_spot", "frac_closer_car", "frac_tie",
]

SWEEP_COLUMNS = [
    "kind", "p", "replica", "seed", "t_end", "absorption_time", "vbar",
    "frac_cars_parked", "frac_spots_parked_in", "vbar_mean", "vbar_se",
    "n_absorbed", "n_excluded",
]

SNAPSHOT_TAIL = ["role", "spot_status", "unparked_count", "nearest_label"]

SUMMARY_KEYS = {"format_version", "config", "seed", "absorption_time",
                "frac_cars_parked", "frac_spots_parked_in", "fit", "checks"}

NEAREST_LABELS = {"closer_to_car", "closer_to_spot", "tie", "non_empty"}


class SchemaError(ValueError):
    """An input file does not match the simulator's documented schema."""


def _read_table(path: str | Path, expected_header: list[str] | None) -> tuple[dict, list[str], list[list[str]]]:
    lines = Path(path).read_text().splitlines()
    if len(lines) < 3:
        raise SchemaError(f"{path}: too short to be a simulator table")
    if not lines[0].startswith("# format_version="):
        raise SchemaError(f"{path}: missing format_version comment line")
    version = lines[0].split("=", 1)[1]
    if version != str(FORMAT_VERSION):
        raise SchemaError(f"{path}: unsupported format_version {version}")
    if not lines[1].startswith("# config="):
        raise SchemaError(f"{path}: missing config comment line")
    try:
        config = json.loads(lines[1].split("=", 1)[1])
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: embedded config is not valid JSON: {exc}") from exc
    header = lines[2].split(",")
    if expected_header is not None and header != expected_header:
        raise SchemaError(
            f"{path}: header mismatch\n  expected {expected_header}\n  found    {header}"
        )
    rows = [line.split(",") for line in lines[3:] if line]
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise SchemaError(f"{path}: row {i} has {len(row)} cells, header has {len(header)}")
    return config, header, rows


def _floats(rows: list[list[str]], col: int) -> np.ndarray:
    return np.array([float(r[col]) if r[col] else np.nan for r in rows])


@dataclass(frozen=True)
class SeriesData:
    config: dict
    t: np.ndarray
    vbar: np.ndarray
    frac_spot_unvisited: np.ndarray
    frac_closer_spot: np.ndarray
    frac_closer_car: np.ndarray
    frac_tie: np.ndarray


def read_series(path: str | Path) -> SeriesData:
    config, _, rows = _read_table(path, SERIES_COLUMNS)
    return SeriesData(
        config=config,
        t=_floats(rows, 0).astype(int),
        vbar=_floats(rows, 1),
        frac_spot_unvisited=_floats(rows, 5),
        frac_closer_spot=_floats(rows, 6),
        frac_closer_car=_floats(rows, 7),
        frac_tie=_floats(rows, 8),
    )


@dataclass(frozen=True)
class SnapshotData:
    config: dict
    coords: np.ndarray  # (n, d)
    role: np.ndarray  # "car" / "spot"
    spot_status: np.ndarray
    unparked_count: np.ndarray
    nearest_label: np.ndarray

    @property
    def ndim(self) -> int:
        return self.coords.shape[1]

    def side(self, axis: int) -> int:
        return int(self.coords[:, axis].max()) + 1


def read_snapshot(path: str | Path) -> SnapshotData:
    config, header, rows = _read_table(path, None)
    if header[0] != "vertex_index" or header[-4:] != SNAPSHOT_TAIL:
        raise SchemaError(f"{path}: not a snapshot table (header {header})")
    coord_cols = header[1:-4]
    if not coord_cols or coord_cols != [f"coord_{i}" for i in range(len(coord_cols))]:
        raise SchemaError(f"{path}: malformed coordinate columns {coord_cols}")
    d = len(coord_cols)
    coords = np.stack([_floats(rows, 1 + i).astype(int) for i in range(d)], axis=1)
    labels = np.array([r[-1] for r in rows], dtype=object)
    bad = set(labels) - NEAREST_LABELS
    if bad:
        raise SchemaError(f"{path}: unknown nearest labels {sorted(bad)}")
    status = np.array([r[-3] for r in rows], dtype=object)
    for s in set(status):
        if s not in ("not_a_spot", "vacant") and not s.startswith("occupied:"):
            raise SchemaError(f"{path}: unknown spot_status {s!r}")
    return SnapshotData(
        config=config,
        coords=coords,
        role=np.array([r[-4] for r in rows], dtype=object),
        spot_status=status,
        unparked_count=_floats(rows, len(header) - 2).astype(int),
        nearest_label=labels,
    )


@dataclass(frozen=True)
class SweepData:
    config: dict
    p: np.ndarray  # aggregate rows
    vbar_mean: np.ndarray
    vbar_se: np.ndarray
    replica_p: np.ndarray
    replica_vbar: np.ndarray


def read_sweep(path: str | Path) -> SweepData:
    config, _, rows = _read_table(path, SWEEP_COLUMNS)
    agg = [r for r in rows if r[0] == "aggregate"]
    rep = [r for r in rows if r[0] == "replica"]
    if not agg:
        raise SchemaError(f"{path}: sweep table has no aggregate rows")
    return SweepData(
        config=config,
        p=_floats(agg, 1),
        vbar_mean=_floats(agg, 9),
        vbar_se=_floats(agg, 10),
        replica_p=_floats(rep, 1),
        replica_vbar=_floats(rep, 6),
    )


def read_summary(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    missing = SUMMARY_KEYS - set(data)
    if missing:
        raise SchemaError(f"{path}: summary is missing keys {sorted(missing)}")
    if data["format_version"] != FORMAT_VERSION:
        raise SchemaError(f"{path}: unsupported format_version {data['format_version']}")
    return data
