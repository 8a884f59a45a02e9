"""Batch inference producing grid estimates in the shared CSV schema."""

from pathlib import Path

import numpy as np
import torch

from .data import FLOAT_FMT, encode_features, grid_points, load_sigma_rows

__all__ = ["predict", "infer_to_csv", "write_estimate_csv"]


def predict(model, sigma: np.ndarray, input_dim: int = 128) -> np.ndarray:
    """Unit-sum grid densities for each moment row (order preserved)."""
    feats = encode_features(sigma, input_dim)
    with torch.no_grad():
        out = model(torch.from_numpy(feats).float()).numpy().astype(float)
    return out


def write_estimate_csv(gamma: np.ndarray, path):
    xi = grid_points(gamma.size)
    table = np.column_stack([xi, gamma])
    np.savetxt(path, table, fmt=FLOAT_FMT, delimiter=",", header="xi,gamma", comments="")


def infer_to_csv(model, sigma_path, out_dir, input_dim: int = 128, stem: str = "dnn"):
    """Read a sigma CSV (+ sidecar), write one estimate CSV per row plus a
    combined row-per-sample gamma matrix; returns the predictions."""
    sigma, _ = load_sigma_rows(sigma_path)
    gammas = predict(model, sigma, input_dim)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, gamma in enumerate(gammas):
        write_estimate_csv(gamma, out_dir / f"{stem}_{i:05d}.csv")
    np.savetxt(out_dir / f"{stem}_all.csv", gammas, fmt=FLOAT_FMT, delimiter=",")
    return gammas
