"""Synthetic training data for the neural ASF estimator.

Scenario semantics mirror the companion estimation library: group-sparse
ASFs of K disjoint rectangular clusters on the sine-angle interval [-1, 1],
channel snapshots y = Sigma^(1/2) w + sqrt(N0) z, diagonal-averaged moment
estimates, and per-cell grid labels. Files use the shared CSV + JSON
sidecar conventions so either side can produce or consume them.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "GRID_SIZE",
    "Dataset",
    "generate_dataset",
    "encode_features",
    "grid_points",
    "save_dataset",
    "load_dataset",
    "save_sigma_rows",
    "load_sigma_rows",
]

GRID_SIZE = 128
FLOAT_FMT = "%.17e"
MAX_PLACEMENT_ATTEMPTS = 10_000


@dataclass
class Dataset:
    """Moment rows (S, M) complex, labels (S, G) unit-sum, cluster counts."""

    sigma: np.ndarray
    labels: np.ndarray
    k_values: np.ndarray
    array_size: int
    snapshot_count: int | None
    noise_power: float
    seed: int

    def __len__(self):
        return self.sigma.shape[0]


def grid_points(grid_size: int = GRID_SIZE) -> np.ndarray:
    return -1.0 + 2.0 * np.arange(grid_size) / grid_size


def _draw_clusters(rng, k, width_bound, min_gap):
    for _ in range(MAX_PLACEMENT_ATTEMPTS):
        widths = (1.0 - rng.random(k)) * width_bound
        centers = np.array([rng.uniform(-1 + w / 2, 1 - w / 2) for w in widths])
        starts, ends = centers - widths / 2, centers + widths / 2
        order = np.argsort(starts)
        starts, ends = starts[order], ends[order]
        if np.all(starts[1:] - ends[:-1] >= min_gap):
            masses = 1.0 + rng.random(k)
            masses /= masses.sum()
            return starts, ends, masses
    raise RuntimeError(f"could not place {k} disjoint clusters")


def _moments(starts, ends, masses, m):
    r = np.arange(m)[:, None]
    centers = 0.5 * (starts + ends)
    widths = ends - starts
    terms = masses[None, :] * np.exp(1j * np.pi * r * centers[None, :]) * np.sinc(
        r * widths[None, :] / 2.0
    )
    return terms.sum(axis=1)


def _grid_label(starts, ends, masses, grid_size):
    half = 1.0 / grid_size
    pts = grid_points(grid_size)
    amps = masses / (ends - starts)
    lo = (pts - half)[:, None]
    hi = (pts + half)[:, None]
    overlap = np.clip(np.minimum(ends, hi) - np.maximum(starts, lo), 0.0, None)
    label = overlap @ amps
    # cell 0 extends below -1; collect its periodic image near +1
    wrap = np.clip(np.minimum(ends, 1.0) - np.maximum(starts, 1.0 - half), 0.0, None)
    label[0] += float(wrap @ amps)
    return label / label.sum()


def _toeplitz_from_column(col):
    m = col.size
    idx = np.subtract.outer(np.arange(m), np.arange(m))
    out = np.empty((m, m), dtype=complex)
    pos = idx >= 0
    out[pos] = col[idx[pos]]
    out[~pos] = np.conj(col[-idx[~pos]])
    return out


def _sample_sigma(cov_col, t, noise_power, rng):
    """Diagonal-averaged moment estimate from t simulated snapshots."""
    m = cov_col.size
    vals, vecs = np.linalg.eigh(_toeplitz_from_column(cov_col))
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T
    w = (rng.standard_normal((t, m)) + 1j * rng.standard_normal((t, m))) / np.sqrt(2)
    z = (rng.standard_normal((t, m)) + 1j * rng.standard_normal((t, m))) / np.sqrt(2)
    y = w @ root.T + np.sqrt(noise_power) * z
    s = (y.T @ y.conj()) / t
    s = 0.5 * (s + s.conj().T)
    return np.array([np.diagonal(s, offset=-k).mean() for k in range(m)])


def generate_dataset(
    count: int,
    array_size: int,
    grid_size: int = GRID_SIZE,
    snapshot_count: int | None = None,
    snr_db: float = 20.0,
    seed: int = 0,
    k_choices=(1, 2, 3, 4),
    width_bound: float = 0.3,
) -> Dataset:
    """count labeled samples (sigma_tilde, gamma).

    snapshot_count=None is the noiseless T -> infinity mode: sigma_tilde is
    the exact moment vector.  Cluster widths are uniform on (0, width_bound]
    and supports keep at least one grid cell of separation.
    """
    if 2 * array_size - 1 > grid_size:
        raise ValueError(
            f"feature length 2M-1 = {2 * array_size - 1} exceeds the "
            f"{grid_size}-wide input layer"
        )
    noise_power = 0.0 if snapshot_count is None else 10.0 ** (-snr_db / 10.0)
    rng = np.random.default_rng(seed)
    # two full cells of separation guarantee an empty grid cell between
    # clusters, so label components always equal the cluster count
    min_gap = 4.0 / grid_size
    sigma = np.empty((count, array_size), dtype=complex)
    labels = np.empty((count, grid_size))
    k_values = np.empty(count, dtype=int)
    for i in range(count):
        k = int(rng.choice(k_choices))
        starts, ends, masses = _draw_clusters(rng, k, width_bound, min_gap)
        col = _moments(starts, ends, masses, array_size)
        # child stream keeps scenarios identical across exact/noisy modes
        noise_rng = np.random.default_rng(int(rng.integers(2**63)))
        if snapshot_count is None:
            sigma[i] = col
        else:
            sigma[i] = _sample_sigma(col, snapshot_count, noise_power, noise_rng)
        labels[i] = _grid_label(starts, ends, masses, grid_size)
        k_values[i] = k
    return Dataset(
        sigma=sigma,
        labels=labels,
        k_values=k_values,
        array_size=array_size,
        snapshot_count=snapshot_count,
        noise_power=noise_power,
        seed=seed,
    )


def encode_features(sigma: np.ndarray, grid_size: int = GRID_SIZE) -> np.ndarray:
    """[Re sigma_0..M-1, Im sigma_1..M-1] / sigma_0, zero-padded to the
    input width."""
    sigma = np.atleast_2d(np.asarray(sigma, dtype=complex))
    scale = sigma[:, :1].real
    if np.any(scale <= 0):
        raise ValueError("sigma_0 must be positive for feature scaling")
    scaled = sigma / scale
    feats = np.concatenate([scaled.real, scaled[:, 1:].imag], axis=1)
    if feats.shape[1] > grid_size:
        raise ValueError("feature length exceeds the input layer width")
    out = np.zeros((sigma.shape[0], grid_size))
    out[:, : feats.shape[1]] = feats
    return out


def _interleave(z):
    out = np.empty((z.shape[0], 2 * z.shape[1]))
    out[:, 0::2] = z.real
    out[:, 1::2] = z.imag
    return out


def _deinterleave(x):
    return x[:, 0::2] + 1j * x[:, 1::2]


def save_sigma_rows(sigma: np.ndarray, meta: dict, path):
    path = Path(path)
    np.savetxt(path, _interleave(np.atleast_2d(sigma)), fmt=FLOAT_FMT, delimiter=",")
    doc = dict(meta)
    doc.setdefault("M", sigma.shape[-1])
    doc.setdefault("rows", np.atleast_2d(sigma).shape[0])
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_sigma_rows(path):
    path = Path(path)
    with open(path.with_suffix(".json")) as fh:
        meta = json.load(fh)
    return _deinterleave(np.loadtxt(path, delimiter=",", ndmin=2)), meta


def save_dataset(dataset: Dataset, directory):
    """sigma.csv + labels.csv + dataset.json under the directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {
        "M": dataset.array_size,
        "T": dataset.snapshot_count,
        "N0": dataset.noise_power,
        "seed": dataset.seed,
        "G": dataset.labels.shape[1],
        "count": len(dataset),
        "k_values": dataset.k_values.tolist(),
    }
    save_sigma_rows(dataset.sigma, meta, directory / "sigma.csv")
    np.savetxt(directory / "labels.csv", dataset.labels, fmt=FLOAT_FMT, delimiter=",")


def load_dataset(directory) -> Dataset:
    directory = Path(directory)
    sigma, meta = load_sigma_rows(directory / "sigma.csv")
    labels = np.loadtxt(directory / "labels.csv", delimiter=",", ndmin=2)
    if labels.shape[0] != sigma.shape[0]:
        raise ValueError("sigma and label row counts disagree")
    return Dataset(
        sigma=sigma,
        labels=labels,
        k_values=np.asarray(meta.get("k_values", [0] * sigma.shape[0]), dtype=int),
        array_size=meta["M"],
        snapshot_count=meta["T"],
        noise_power=meta["N0"],
        seed=meta["seed"],
    )
