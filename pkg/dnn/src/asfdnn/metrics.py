"""Scoring helpers: connected components at a relative threshold and the
normalized l1 distance (matching the estimation library's metric
definitions so scores are comparable across the file interface)."""

import numpy as np

__all__ = ["connected_components", "normalized_l1"]


def connected_components(gamma: np.ndarray, threshold_frac: float = 0.01) -> int:
    gamma = np.asarray(gamma, dtype=float)
    peak = gamma.max(initial=0.0)
    if peak <= 0:
        return 0
    mask = gamma > threshold_frac * peak
    return int(np.count_nonzero(mask[1:] & ~mask[:-1]) + int(mask[0]))


def normalized_l1(gamma_hat: np.ndarray, gamma_true: np.ndarray) -> float:
    def norm(v):
        v = np.asarray(v, dtype=float)
        total = v.sum()
        return v / total if total > 0 else v

    return float(np.abs(norm(gamma_hat) - norm(gamma_true)).sum())
