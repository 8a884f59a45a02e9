"""Shared oracles and random-instance builders for the test suite.

Oracles are deliberately independent of the library code paths they check:
moments by brute trapezoid quadrature, NNLS by exhaustive support
enumeration, projections by explicit matrix algebra.
"""

import itertools

import numpy as np

from asfest.core import AngularGrid, Cluster, GroupSparseASF


def pulse_moments_quadrature(grid: AngularGrid, g: int, array_size: int, n=200_001):
    """Trapezoid quadrature of the g-th unit-amplitude grid pulse's moments,
    integrating over the physical (wrapped) support inside [-1, 1]."""
    lo, hi = grid.cell_bounds(g)
    segments = [(lo, hi)] if lo >= -1.0 else [(-1.0, hi), (lo + 2.0, 1.0)]
    r = np.arange(array_size)[:, None]
    total = np.zeros(array_size, dtype=complex)
    for a, b in segments:
        xi = np.linspace(a, b, n)
        total += np.trapezoid(np.exp(1j * np.pi * r * xi[None, :]), xi, axis=1)
    return total


def asf_moments_oracle(asf: GroupSparseASF, array_size: int, n=50_001):
    """Per-cluster trapezoid quadrature of the definition integral (each
    segment is smooth, so the rule converges at second order)."""
    r = np.arange(array_size)[:, None]
    total = np.zeros(array_size, dtype=complex)
    for c in asf.clusters:
        xi = np.linspace(c.start, c.end, n)
        dens = c.density(xi)
        total += np.trapezoid(
            np.exp(1j * np.pi * r * xi[None, :]) * dens[None, :], xi, axis=1
        )
    return total


def nnls_bruteforce(A, b, tol=1e-12):
    """Exhaustive support enumeration: solve LS on every support pattern and
    keep the best feasible (nonnegative) solution."""
    n = A.shape[1]
    best_x, best_obj = np.zeros(n), float(b @ b)
    for r in range(1, n + 1):
        for support in itertools.combinations(range(n), r):
            sub = A[:, support]
            z, _, _, _ = np.linalg.lstsq(sub, b, rcond=None)
            if np.all(z >= -tol):
                x = np.zeros(n)
                x[list(support)] = np.clip(z, 0.0, None)
                obj = float(np.sum((A @ x - b) ** 2))
                if obj < best_obj - 1e-15:
                    best_x, best_obj = x, obj
    return best_x, best_obj


def random_rect_asf(rng, k=2, width_bound=0.3, min_gap=0.02):
    """Hand-rolled disjoint-cluster sampler (independent of harness code)."""
    while True:
        widths = rng.uniform(0.02, width_bound, size=k)
        centers = rng.uniform(-1 + widths / 2, 1 - widths / 2)
        starts, ends = centers - widths / 2, centers + widths / 2
        order = np.argsort(starts)
        if np.all(starts[order][1:] - ends[order][:-1] >= min_gap):
            masses = rng.uniform(0.2, 1.0, size=k)
            masses = masses / masses.sum()
            return GroupSparseASF(
                [Cluster(starts[i], ends[i], masses[i]) for i in order]
            )
