"""File formats: snapshot/moment CSV matrices with JSON sidecars, estimate
CSVs, and the aggregate metrics CSV.

All floats are written with 17 significant digits so values round-trip
bit-exactly and reruns of a deterministic pipeline produce byte-identical
files.
"""

import dataclasses
import json
import os
from pathlib import Path

import numpy as np

from .covariance import SnapshotSet

__all__ = [
    "sidecar_path",
    "complex_to_interleaved",
    "interleaved_to_complex",
    "save_snapshots",
    "load_snapshots",
    "save_sigma_rows",
    "load_sigma_rows",
    "save_estimate",
    "load_estimate",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_metrics_csv",
]

FLOAT_FMT = "%.17e"


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def complex_to_interleaved(z: np.ndarray) -> np.ndarray:
    """(..., M) complex -> (..., 2M) real, columns Re0, Im0, Re1, Im1, ..."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],), dtype=float)
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def interleaved_to_complex(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] % 2:
        raise ValueError("interleaved array must have an even number of columns")
    return x[..., 0::2] + 1j * x[..., 1::2]


def _write_json(doc: dict, path):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def save_snapshots(snapshots: SnapshotSet, path):
    """T x 2M CSV (interleaved re/im) plus a {M, T, N0, seed} sidecar."""
    path = Path(path)
    np.savetxt(path, complex_to_interleaved(snapshots.samples), fmt=FLOAT_FMT, delimiter=",")
    _write_json(
        {
            "M": snapshots.array_size,
            "T": snapshots.num_snapshots,
            "N0": snapshots.noise_power,
            "seed": snapshots.seed,
        },
        sidecar_path(path),
    )


def load_snapshots(path) -> SnapshotSet:
    path = Path(path)
    with open(sidecar_path(path)) as fh:
        meta = json.load(fh)
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    samples = interleaved_to_complex(data)
    if samples.shape != (meta["T"], meta["M"]):
        raise ValueError(
            f"snapshot file shape {samples.shape} disagrees with sidecar "
            f"(T={meta['T']}, M={meta['M']})"
        )
    return SnapshotSet(samples=samples, noise_power=meta["N0"], seed=meta["seed"])


def save_sigma_rows(sigma: np.ndarray, meta: dict, path):
    """S x 2M CSV of moment vectors (one per row) with a JSON sidecar."""
    path = Path(path)
    sigma = np.atleast_2d(np.asarray(sigma, dtype=complex))
    np.savetxt(path, complex_to_interleaved(sigma), fmt=FLOAT_FMT, delimiter=",")
    doc = dict(meta)
    doc.setdefault("M", sigma.shape[1])
    doc.setdefault("rows", sigma.shape[0])
    _write_json(doc, sidecar_path(path))


def load_sigma_rows(path):
    path = Path(path)
    with open(sidecar_path(path)) as fh:
        meta = json.load(fh)
    sigma = interleaved_to_complex(np.loadtxt(path, delimiter=",", ndmin=2))
    return sigma, meta


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if obj.size > 64:
            return {"shape": list(obj.shape), "summary": "omitted"}
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def save_estimate(xi: np.ndarray, gamma: np.ndarray, path, diagnostics: dict | None = None):
    """Two-column CSV (xi_g, gamma_g) plus an optional diagnostics sidecar."""
    path = Path(path)
    table = np.column_stack([np.asarray(xi, dtype=float), np.asarray(gamma, dtype=float)])
    np.savetxt(path, table, fmt=FLOAT_FMT, delimiter=",", header="xi,gamma", comments="")
    if diagnostics is not None:
        _write_json(_jsonable(diagnostics), sidecar_path(path))


def load_estimate(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def write_matrix_csv(matrix: np.ndarray, path, header: str | None = None):
    np.savetxt(
        path,
        np.atleast_2d(np.asarray(matrix, dtype=float)),
        fmt=FLOAT_FMT,
        delimiter=",",
        header=header or "",
        comments="",
    )


def read_matrix_csv(path, skiprows: int = 0) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=skiprows, ndmin=2)


def write_metrics_csv(rows: list[dict], fieldnames: list[str], path):
    """Plain CSV, one row per dict, floats at full precision."""
    lines = [",".join(fieldnames)]
    for row in rows:
        cells = []
        for name in fieldnames:
            val = row[name]
            if isinstance(val, float):
                cells.append(FLOAT_FMT % val)
            else:
                cells.append(str(val))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")
