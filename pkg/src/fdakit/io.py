"""CSV and JSON ingestion and emission for the batch pipelines.

Curve data travels in long (tidy) form with one row per observation, so
per-curve time grids are free to differ. All emitted files start with a
provenance comment block (command, parameters, seed, toolkit version);
comment lines start with '#' and every reader here skips them. Floats
are written with repr, which round-trips exactly, so re-ingesting an
emitted dataset reproduces coefficients bitwise.
"""

import csv
import json
from pathlib import Path

import numpy as np

from . import __version__
from .basis import BSPLINE, FOURIER, bspline_basis, fourier_basis
from .exceptions import DataError
from .smoothing import FunctionalDataSet, RawCurve


def provenance_lines(command: str, params: dict, seed) -> list[str]:
    """Comment block recording how an output file was produced."""
    return [
        f"# fdakit-version: {__version__}",
        f"# command: {command}",
        f"# seed: {seed}",
        f"# params: {json.dumps(params, sort_keys=True)}",
    ]


def parse_provenance(path) -> dict:
    """Recover the provenance block of an emitted file (CSV or JSON)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return json.loads(text)["provenance"]
    fields = {}
    for line in text.splitlines():
        if not line.startswith("# "):
            break
        key, _, value = line[2:].partition(": ")
        fields[key] = value
    if "command" not in fields:
        raise DataError(f"{path}: no provenance block found")
    return {
        "version": fields.get("fdakit-version"),
        "command": fields["command"],
        "seed": None if fields.get("seed") == "None" else int(fields["seed"]),
        "params": json.loads(fields.get("params", "{}")),
    }


def _data_rows(path):
    """Yield (line_number, row) for non-comment CSV rows, header included."""
    with open(path, newline="") as handle:
        for number, row in enumerate(csv.reader(handle), start=1):
            if not row or (row[0].startswith("#")):
                continue
            yield number, row


def ingest_curves(path) -> list[RawCurve]:
    """Read long-format curves (header ``id,t,value``) into RawCurves.

    Rows may arrive in any order; the result is canonical: curves sorted
    by id, observations sorted by time. Duplicate (id, t) pairs and
    malformed rows are rejected with their line number.
    """
    rows = _data_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise DataError(f"{path}: file has no header row") from None
    if [h.strip() for h in header] != ["id", "t", "value"]:
        raise DataError(f"{path}: expected header id,t,value, got {','.join(header)}")

    series: dict[str, dict[float, float]] = {}
    count = 0
    for number, row in rows:
        if len(row) != 3:
            raise DataError(f"{path}: row {number}: expected 3 fields, got {len(row)}")
        curve_id = row[0].strip()
        try:
            t = float(row[1])
            value = float(row[2])
        except ValueError:
            raise DataError(
                f"{path}: row {number}: non-numeric t or value ({row[1]!r}, {row[2]!r})"
            ) from None
        per_curve = series.setdefault(curve_id, {})
        if t in per_curve:
            raise DataError(
                f"{path}: row {number}: duplicate time {t!r} for curve {curve_id!r}"
            )
        per_curve[t] = value
        count += 1
    if count == 0:
        raise DataError(f"{path}: no data rows")

    curves = []
    for curve_id in sorted(series):
        times = np.array(sorted(series[curve_id]))
        values = np.array([series[curve_id][t] for t in times])
        curves.append(RawCurve(id=curve_id, times=times, values=values))
    return curves


def _fmt(x) -> str:
    # repr of a Python float is the shortest exactly round-tripping form.
    return repr(float(x))


def write_curves_csv(path, ids, times: np.ndarray, values: np.ndarray, provenance: list[str]):
    """Emit curves observed on a shared grid in long format."""
    lines = list(provenance)
    lines.append("id,t,value")
    for i, curve_id in enumerate(ids):
        for t, v in zip(times, values[i]):
            lines.append(f"{curve_id},{_fmt(t)},{_fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_dataset_csv(path, ds: FunctionalDataSet, provenance: list[str]):
    """Emit a coefficient dataset, embedding its basis in the header block."""
    lines = list(provenance)
    lines.append(f"# basis-kind: {ds.basis.kind}")
    lines.append(f"# basis-size: {ds.basis.n_basis}")
    lines.append(f"# basis-order: {ds.basis.order}")
    lines.append(f"# basis-domain: {_fmt(ds.basis.domain[0])}:{_fmt(ds.basis.domain[1])}")
    knots = ",".join(_fmt(k) for k in ds.basis.interior_knots)
    lines.append(f"# basis-knots: {knots}")
    header = ["id"] + [f"c{j + 1}" for j in range(ds.n_basis)]
    lines.append(",".join(header))
    for curve_id, row in zip(ds.ids, ds.coefficients):
        lines.append(",".join([curve_id] + [_fmt(x) for x in row]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_dataset_csv(path) -> FunctionalDataSet:
    """Read back a dataset emitted by :func:`write_dataset_csv`, bitwise."""
    meta = {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("# basis-"):
            key, _, value = line[2:].partition(": ")
            meta[key] = value
    required = {"basis-kind", "basis-size", "basis-domain"}
    if not required.issubset(meta):
        raise DataError(f"{path}: missing basis metadata {sorted(required - set(meta))}")
    lo, _, hi = meta["basis-domain"].partition(":")
    domain = (float(lo), float(hi))
    size = int(meta["basis-size"])
    if meta["basis-kind"] == FOURIER:
        basis = fourier_basis(size, domain)
    elif meta["basis-kind"] == BSPLINE:
        knots_text = meta.get("basis-knots", "")
        knots = (
            np.array([float(x) for x in knots_text.split(",")]) if knots_text else None
        )
        basis = bspline_basis(size, domain, order=int(meta["basis-order"]), interior_knots=knots)
    else:
        raise DataError(f"{path}: unknown basis kind {meta['basis-kind']!r}")

    ids = []
    coeff_rows = []
    rows = _data_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise DataError(f"{path}: file has no header row") from None
    if header[0] != "id" or len(header) != size + 1:
        raise DataError(f"{path}: coefficient header does not match basis size {size}")
    for number, row in rows:
        if len(row) != size + 1:
            raise DataError(f"{path}: row {number}: expected {size + 1} fields")
        ids.append(row[0])
        coeff_rows.append([float(x) for x in row[1:]])
    if not ids:
        raise DataError(f"{path}: no coefficient rows")
    return FunctionalDataSet(basis=basis, coefficients=np.array(coeff_rows), ids=tuple(ids))


def read_keyed_columns(path, expected_ids, n_columns=None) -> np.ndarray:
    """Read a CSV of numeric columns keyed by curve id (header ``id,...``).

    Returns the rows aligned to `expected_ids`. Every expected id must be
    present exactly once.
    """
    rows = _data_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise DataError(f"{path}: file has no header row") from None
    if header[0].strip() != "id":
        raise DataError(f"{path}: first column must be id, got {header[0]!r}")
    width = len(header) - 1
    if n_columns is not None and width != n_columns:
        raise DataError(f"{path}: expected {n_columns} value columns, got {width}")
    by_id = {}
    for number, row in rows:
        if len(row) != width + 1:
            raise DataError(f"{path}: row {number}: expected {width + 1} fields")
        curve_id = row[0].strip()
        if curve_id in by_id:
            raise DataError(f"{path}: row {number}: duplicate id {curve_id!r}")
        try:
            by_id[curve_id] = [float(x) for x in row[1:]]
        except ValueError:
            raise DataError(f"{path}: row {number}: non-numeric value") from None
    missing = [i for i in expected_ids if i not in by_id]
    if missing:
        raise DataError(f"{path}: missing rows for ids {missing[:5]}")
    return np.array([by_id[i] for i in expected_ids])


def write_table_csv(path, header: list[str], rows, provenance: list[str]):
    """Emit a small results table with full-precision floats."""
    lines = list(provenance)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(x) if isinstance(x, float) else str(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path, payload: dict, command: str, params: dict, seed):
    """Emit a structured result with an embedded provenance object."""
    document = {
        "provenance": {
            "version": __version__,
            "command": command,
            "seed": seed,
            "params": params,
        }
    }
    document.update(payload)
    Path(path).write_text(json.dumps(document, indent=2, default=_jsonify) + "\n")


def _jsonify(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer, np.floating)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
