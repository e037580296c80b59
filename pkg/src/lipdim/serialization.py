"""Deterministic file formats: point clouds, map files, profiles, reports.

Every artifact is reproducible byte-for-byte from its inputs: floats are
written with ``repr`` (shortest round-trip form), JSON keys are sorted, and
no timestamps are embedded. A point cloud is a CSV of rows plus a JSON
sidecar describing how to interpret the columns; the loader verifies the CSV
against the sidecar and fails with :class:`~lipdim.errors.SchemaError` on any
mismatch.
"""

from __future__ import annotations

import csv
import io
import json
import os
from typing import Any

import numpy as np

from .constructions import build_map
from .errors import SchemaError, SpecError
from .generators import SpaceSpec, build_space
from .lightness import LightnessProfile, SampledMap
from .metric import (
    EuclideanAmbient,
    ExplicitMatrix,
    FiniteMetricSpace,
    UltrametricWords,
)

__all__ = [
    "SCHEMA_VERSION",
    "dump_json",
    "load_json",
    "write_space",
    "load_space",
    "write_map_values",
    "load_map",
    "write_profile",
    "write_report",
]

SCHEMA_VERSION = "1"


# ---------------------------------------------------------------------------
# Primitive writers
# ---------------------------------------------------------------------------


def _fmt(value: Any) -> str:
    """Canonical cell text: shortest round-trip floats, plain ints."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def dump_json(obj: Any, path: str) -> None:
    """Write sorted-key, indented JSON with a trailing newline."""
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")


def load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc


def _write_csv(path: str, header: list[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(buf.getvalue())


def _read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path} is empty") from None
            return header, [row for row in reader if row]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Point clouds
# ---------------------------------------------------------------------------


def write_space(
    space: FiniteMetricSpace,
    out_dir: str,
    basename: str = "cloud",
    spec: SpaceSpec | dict[str, Any] | None = None,
) -> tuple[str, str]:
    """Write ``<basename>.csv`` + ``<basename>.json`` sidecar; return both paths.

    When ``spec`` is given, the sidecar records it and the loader rebuilds the
    space from the spec, verifying the CSV row-for-row (the strongest
    reproducibility check). Without a spec, only metrics whose data fit in
    the row format (Euclidean coords, ultrametric words, explicit matrices)
    can be round-tripped.
    """
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{basename}.csv")
    json_path = os.path.join(out_dir, f"{basename}.json")

    header = ["id"]
    columns: list[np.ndarray] = [space.ids]
    if space.coords is not None:
        for k in range(space.coords.shape[1]):
            header.append(f"x{k}")
            columns.append(space.coords[:, k])
    rule = space.metric
    matrix_rel: str | None = None
    if isinstance(rule, UltrametricWords):
        for k in range(rule.words.shape[1]):
            header.append(f"w{k}")
            columns.append(rule.words[:, k])
    elif isinstance(rule, ExplicitMatrix):
        matrix_rel = f"{basename}.matrix.csv"
        _write_csv(
            os.path.join(out_dir, matrix_rel),
            [f"d{k}" for k in range(space.n)],
            (row for row in rule.matrix),
        )
    _write_csv(csv_path, header, zip(*columns) if columns else [])

    sidecar: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "csv": f"{basename}.csv",
        "n": int(space.n),
        "columns": header,
        "metric": {"kind": rule.kind, "params": rule.params()},
        "resolution": None if space.resolution is None else float(space.resolution),
    }
    if matrix_rel is not None:
        sidecar["matrix_csv"] = matrix_rel
    if spec is not None:
        sidecar["spec"] = spec.to_dict() if isinstance(spec, SpaceSpec) else dict(spec)
    dump_json(sidecar, json_path)
    return csv_path, json_path


def _parse_rows(
    header: list[str], rows: list[list[str]], path: str
) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
    """Split CSV rows into (ids, coords, words) according to column names."""
    if not header or header[0] != "id":
        raise SchemaError(f"{path}: first column must be 'id', got {header[:1]}")
    x_cols = [i for i, name in enumerate(header) if name.startswith("x")]
    w_cols = [i for i, name in enumerate(header) if name.startswith("w")]
    try:
        ids = np.array([int(row[0]) for row in rows], dtype=np.intp)
        coords = (
            np.array([[float(row[i]) for i in x_cols] for row in rows], dtype=float)
            if x_cols
            else None
        )
        words = (
            np.array([[int(row[i]) for i in w_cols] for row in rows], dtype=np.int16)
            if w_cols
            else None
        )
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"{path}: malformed row ({exc})") from exc
    return ids, coords, words


def load_space(json_path: str) -> FiniteMetricSpace:
    """Rebuild a space from its sidecar, verifying the CSV against it."""
    sidecar = load_json(json_path)
    if not isinstance(sidecar, dict):
        raise SchemaError(f"{json_path}: sidecar must be a JSON object")
    if sidecar.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(
            f"{json_path}: unsupported schema_version {sidecar.get('schema_version')!r}"
        )
    base_dir = os.path.dirname(os.path.abspath(json_path))
    csv_path = os.path.join(base_dir, str(sidecar.get("csv", "")))
    header, rows = _read_csv(csv_path)
    if header != sidecar.get("columns"):
        raise SchemaError(f"{csv_path}: columns {header} differ from sidecar")
    ids, coords, words = _parse_rows(header, rows, csv_path)

    spec = sidecar.get("spec")
    if spec is not None:
        try:
            space = build_space(spec)
        except SpecError:
            raise
        if space.n != ids.size or not np.array_equal(space.ids, ids):
            raise SchemaError(f"{csv_path}: ids do not match the generating spec")
        if (space.coords is None) != (coords is None):
            raise SchemaError(f"{csv_path}: coordinate columns do not match the spec")
        if coords is not None and not np.array_equal(space.coords, coords):
            raise SchemaError(f"{csv_path}: coordinates do not match the generating spec")
        return space

    metric = sidecar.get("metric", {})
    kind = metric.get("kind")
    params = metric.get("params", {})
    resolution = sidecar.get("resolution")
    if kind == "euclidean":
        if coords is None:
            raise SchemaError(f"{csv_path}: euclidean cloud needs x* columns")
        return FiniteMetricSpace(
            EuclideanAmbient(), coords=coords, ids=ids, resolution=resolution
        )
    if kind == "ultrametric_words":
        if words is None:
            raise SchemaError(f"{csv_path}: word cloud needs w* columns")
        return FiniteMetricSpace(
            UltrametricWords(words, float(params.get("scale", 1.0))),
            coords=coords,
            ids=ids,
            resolution=resolution,
        )
    if kind == "explicit_matrix":
        matrix_rel = sidecar.get("matrix_csv")
        if not matrix_rel:
            raise SchemaError(f"{json_path}: explicit-matrix sidecar needs matrix_csv")
        _, mrows = _read_csv(os.path.join(base_dir, str(matrix_rel)))
        try:
            matrix = np.array([[float(v) for v in row] for row in mrows], dtype=float)
        except ValueError as exc:
            raise SchemaError(f"{matrix_rel}: malformed matrix ({exc})") from exc
        if matrix.shape != (ids.size, ids.size):
            raise SchemaError(
                f"{matrix_rel}: matrix shape {matrix.shape} does not match {ids.size} rows"
            )
        return FiniteMetricSpace(
            ExplicitMatrix(matrix), coords=coords, ids=ids, resolution=resolution
        )
    raise SchemaError(f"{json_path}: cannot reconstruct metric kind {kind!r} without a spec")


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------


def write_map_values(m: SampledMap, out_dir: str, basename: str = "map") -> str:
    """Write one row per domain point: id + image coordinates."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{basename}.csv")
    img = m.image_coords()
    header = ["id"] + [f"v{k}" for k in range(img.shape[1])]
    _write_csv(path, header, zip(m.domain.ids, *(img[:, k] for k in range(img.shape[1]))))
    return path


def load_map(space: FiniteMetricSpace, path: str) -> SampledMap:
    """Build a map over ``space`` from a MapSpec JSON or a value-table CSV.

    A ``.json`` file is treated as a declarative map spec. A ``.csv`` file
    must contain exactly one ``id,v0,v1,...`` row per domain point; missing
    or unknown ids are schema errors.
    """
    if path.endswith(".json"):
        data = load_json(path)
        return build_map(space, data)
    header, rows = _read_csv(path)
    if not header or header[0] != "id":
        raise SchemaError(f"{path}: first column must be 'id'")
    v_cols = [i for i, name in enumerate(header) if name.startswith("v")]
    if not v_cols:
        raise SchemaError(f"{path}: no value columns v0, v1, ...")
    try:
        ids = np.array([int(row[0]) for row in rows], dtype=np.intp)
        values = np.array([[float(row[i]) for i in v_cols] for row in rows], dtype=float)
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"{path}: malformed row ({exc})") from exc
    order = {int(pid): k for k, pid in enumerate(ids)}
    if len(order) != ids.size:
        raise SchemaError(f"{path}: duplicate ids in value table")
    missing = [int(pid) for pid in space.ids if int(pid) not in order]
    if missing:
        raise SchemaError(
            f"{path}: missing pairing row for {len(missing)} domain ids "
            f"(first few: {missing[:5]})"
        )
    aligned = values[[order[int(pid)] for pid in space.ids]]
    uniq, pairing = np.unique(aligned, axis=0, return_inverse=True)
    cod = FiniteMetricSpace(
        EuclideanAmbient(),
        coords=uniq,
        resolution=space.resolution,
        meta={"name": f"{os.path.basename(path)}_image"},
    )
    return SampledMap(
        space,
        cod,
        pairing.astype(np.intp),
        name=os.path.splitext(os.path.basename(path))[0],
    )


# ---------------------------------------------------------------------------
# Profiles and verdict reports
# ---------------------------------------------------------------------------


def write_profile(
    profile: LightnessProfile, out_dir: str, basename: str = "profile"
) -> tuple[str, str]:
    """Write ``<basename>.json`` (full record) + ``<basename>.csv`` (series)."""
    os.makedirs(out_dir, exist_ok=True)
    json_path = os.path.join(out_dir, f"{basename}.json")
    csv_path = os.path.join(out_dir, f"{basename}.csv")
    record = {"schema_version": SCHEMA_VERSION}
    record.update(profile.as_dict())
    dump_json(record, json_path)
    _write_csv(
        csv_path,
        ["r", "C", "C_upper", "approx"],
        zip(profile.scales, profile.C, profile.C_upper, (int(a) for a in profile.approx)),
    )
    return json_path, csv_path


def write_report(
    name: str, rows: list[dict[str, Any]], out_dir: str, basename: str = "report"
) -> tuple[str, str]:
    """Write a verdict table: one row per claim with measured value and bound."""
    os.makedirs(out_dir, exist_ok=True)
    json_path = os.path.join(out_dir, f"{basename}.json")
    csv_path = os.path.join(out_dir, f"{basename}.csv")
    passed = all(bool(r.get("passed")) for r in rows)
    dump_json(
        {
            "schema_version": SCHEMA_VERSION,
            "experiment": name,
            "passed": passed,
            "rows": rows,
        },
        json_path,
    )
    _write_csv(
        csv_path,
        ["claim", "measured", "bound", "passed"],
        (
            (r.get("claim", ""), r.get("measured", ""), r.get("bound", ""), int(bool(r.get("passed"))))
            for r in rows
        ),
    )
    return json_path, csv_path
