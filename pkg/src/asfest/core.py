"""Angular grid, group-sparse ASF model, ULA steering vectors, and the
forward map from an ASF to its Toeplitz covariance moments.

Conventions used throughout the package:

* angles are parametrized by the sine xi in [-1, 1] (half-wavelength ULA),
* the array response at xi is a(xi) with entries exp(1j*pi*r*xi), r = 0..M-1,
* the covariance of the channel is Hermitian Toeplitz with first column
  sigma_r = integral of gamma(xi) * exp(1j*pi*r*xi) over [-1, 1].
"""

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "AngularGrid",
    "Cluster",
    "GroupSparseASF",
    "ToeplitzCovariance",
    "steering_vector",
    "atom_first_column",
    "atom_matrix",
    "asf_to_covariance",
    "asf_moments_quadrature",
    "grid_sample_asf",
    "load_asf_json",
    "save_asf_json",
]

# Relative PSD slack: Toeplitz matrices assembled from noisy moment estimates
# may have slightly negative eigenvalues.
PSD_RTOL = 1e-10

# Mass budget check for ASF description files.
ASF_JSON_MASS_TOL = 1e-9


@dataclass(frozen=True)
class AngularGrid:
    """Uniform grid of sine-angles xi_g = -1 + 2*g/size for g = 0..size-1.

    Grid points are the centers of the rectangular dictionary pulses; each
    pulse has width 2/size.  The first point sits at xi = -1 and its pulse
    wraps periodically (exp(1j*pi*r*xi) has period 2 in xi).
    """

    size: int

    def __post_init__(self):
        if self.size < 2:
            raise ValueError(f"grid size must be >= 2, got {self.size}")

    @property
    def points(self) -> np.ndarray:
        return -1.0 + 2.0 * np.arange(self.size) / self.size

    @property
    def cell_width(self) -> float:
        return 2.0 / self.size

    def cell_bounds(self, g: int) -> tuple[float, float]:
        """Bounds of the cell centered on grid point g (may extend below -1
        for g = 0; callers handle the periodic wrap)."""
        xi = -1.0 + 2.0 * g / self.size
        half = 1.0 / self.size
        return xi - half, xi + half


@dataclass(frozen=True)
class Cluster:
    """One scatterer: nonnegative power profile on the support [start, end].

    With ``profile=None`` the profile is rectangular with constant amplitude
    mass / (end - start).  A callable profile gives the unnormalized shape on
    the support; it is rescaled so the cluster integrates to ``mass``.
    """

    start: float
    end: float
    mass: float
    profile: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if not (-1.0 <= self.start < self.end <= 1.0):
            raise ValueError(
                f"cluster support [{self.start}, {self.end}] must be a positive-width "
                "interval inside [-1, 1]"
            )
        if self.mass < 0:
            raise ValueError("cluster mass must be nonnegative")

    @property
    def width(self) -> float:
        return self.end - self.start

    @property
    def center(self) -> float:
        return 0.5 * (self.start + self.end)

    @property
    def amplitude(self) -> float:
        """Constant density value (rectangular clusters only)."""
        if self.profile is not None:
            raise ValueError("amplitude is defined only for rectangular clusters")
        return self.mass / self.width

    def _profile_scale(self, num_points: int = 4097) -> float:
        """Rescaling constant so the callable profile integrates to mass."""
        xi = np.linspace(self.start, self.end, num_points)
        raw = np.asarray(self.profile(xi), dtype=float)
        if np.any(raw < -1e-12):
            raise ValueError("cluster profile must be nonnegative")
        total = np.trapezoid(np.clip(raw, 0.0, None), xi)
        if total <= 0:
            raise ValueError("cluster profile integrates to zero")
        return self.mass / total

    def density(self, xi: np.ndarray) -> np.ndarray:
        """Density values on arbitrary points (zero off the support)."""
        xi = np.asarray(xi, dtype=float)
        inside = (xi >= self.start) & (xi <= self.end)
        if self.profile is None:
            return np.where(inside, self.mass / self.width, 0.0)
        out = np.zeros_like(xi, dtype=float)
        if np.any(inside):
            out[inside] = self._profile_scale() * np.clip(self.profile(xi[inside]), 0.0, None)
        return out


class GroupSparseASF:
    """Angular spread function made of K disjoint clusters on [-1, 1]."""

    def __init__(self, clusters: Sequence[Cluster]):
        clusters = tuple(clusters)
        if not clusters:
            raise ValueError("an ASF needs at least one cluster")
        order = sorted(range(len(clusters)), key=lambda i: clusters[i].start)
        for a, b in zip(order, order[1:]):
            if clusters[b].start < clusters[a].end - 1e-15:
                raise ValueError(
                    f"cluster supports overlap: [{clusters[a].start}, {clusters[a].end}] "
                    f"and [{clusters[b].start}, {clusters[b].end}]"
                )
        self.clusters = clusters

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)

    @property
    def total_mass(self) -> float:
        return float(sum(c.mass for c in self.clusters))

    def normalized(self) -> "GroupSparseASF":
        """Same supports and shapes, total mass rescaled to 1."""
        total = self.total_mass
        if total <= 0:
            raise ValueError("cannot normalize an ASF with zero mass")
        return GroupSparseASF(
            [Cluster(c.start, c.end, c.mass / total, c.profile) for c in self.clusters]
        )

    def density(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.zeros_like(xi, dtype=float)
        for c in self.clusters:
            out += c.density(xi)
        return out

    def __repr__(self):
        parts = ", ".join(
            f"[{c.start:.4g},{c.end:.4g}]:{c.mass:.4g}" for c in self.clusters
        )
        return f"GroupSparseASF({parts})"


@dataclass(frozen=True)
class ToeplitzCovariance:
    """Hermitian Toeplitz PSD covariance, stored as its first column."""

    first_column: np.ndarray

    def __post_init__(self):
        col = np.asarray(self.first_column, dtype=complex)
        object.__setattr__(self, "first_column", col)
        if col.ndim != 1 or col.size < 1:
            raise ValueError("first column must be a nonempty vector")

    @property
    def array_size(self) -> int:
        return self.first_column.size

    def matrix(self) -> np.ndarray:
        """The full M x M Hermitian Toeplitz matrix."""
        return scipy.linalg.toeplitz(self.first_column, self.first_column.conj())

    def validate(self):
        """Check sigma_0 real/nonnegative and PSD up to relative slack."""
        sigma0 = self.first_column[0]
        if abs(sigma0.imag) > PSD_RTOL * max(1.0, abs(sigma0)):
            raise ValueError(f"sigma_0 must be real, got {sigma0}")
        if sigma0.real < 0:
            raise ValueError(f"sigma_0 must be nonnegative, got {sigma0}")
        min_eig = float(np.linalg.eigvalsh(self.matrix()).min())
        if min_eig < -PSD_RTOL * self.array_size * max(sigma0.real, 1e-300):
            raise ValueError(f"covariance is not PSD: min eigenvalue {min_eig:g}")


def steering_vector(xi: float, array_size: int) -> np.ndarray:
    """ULA array response a(xi) with entries exp(1j*pi*r*xi), r = 0..M-1."""
    if array_size < 1:
        raise ValueError("array size must be >= 1")
    if not -1.0 <= xi <= 1.0:
        raise ValueError(f"sine-angle must lie in [-1, 1], got {xi}")
    return np.exp(1j * np.pi * np.arange(array_size) * xi)


def atom_first_column(g: int, grid: AngularGrid, array_size: int) -> np.ndarray:
    """First column of the covariance of the g-th rectangular grid pulse.

    The pulse has unit amplitude, width 2/G and is centered on grid point g;
    entry r is (2/G) * exp(1j*pi*r*xi_g) * sinc(r/G).  Exact also for g = 0,
    whose pulse wraps periodically at the xi = -1 boundary.
    """
    if not 0 <= g < grid.size:
        raise IndexError(f"grid index {g} out of range for G={grid.size}")
    r = np.arange(array_size)
    xi_g = grid.points[g]
    return (2.0 / grid.size) * np.exp(1j * np.pi * r * xi_g) * np.sinc(r / grid.size)


def atom_matrix(grid: AngularGrid, array_size: int) -> np.ndarray:
    """All G atom first-columns as an (array_size, G) complex matrix."""
    r = np.arange(array_size)[:, None]
    phases = np.exp(1j * np.pi * r * grid.points[None, :])
    return (2.0 / grid.size) * phases * np.sinc(r / grid.size)


def _rect_moments(center: float, width: float, mass: float, r: np.ndarray) -> np.ndarray:
    # integral of (mass/width) * exp(1j*pi*r*xi) over [center +/- width/2]
    return mass * np.exp(1j * np.pi * r * center) * np.sinc(r * width / 2.0)


def asf_to_covariance(asf: GroupSparseASF, array_size: int) -> ToeplitzCovariance:
    """Fourier moments sigma_r of the ASF, r = 0..array_size-1.

    Rectangular clusters use the closed form (shifted sinc); callable
    profiles are integrated with composite Simpson quadrature.
    """
    r = np.arange(array_size)
    sigma = np.zeros(array_size, dtype=complex)
    for c in asf.clusters:
        if c.profile is None:
            sigma += _rect_moments(c.center, c.width, c.mass, r)
        else:
            sigma += _profile_moments(c, r)
    return ToeplitzCovariance(sigma)


def _profile_moments(cluster: Cluster, r: np.ndarray, num_points: int = 4097) -> np.ndarray:
    xi = np.linspace(cluster.start, cluster.end, num_points)
    dens = cluster.density(xi)
    kernel = np.exp(1j * np.pi * np.outer(r, xi))
    return np.trapezoid(kernel * dens[None, :], xi, axis=1)


def asf_moments_quadrature(
    density: Callable[[np.ndarray], np.ndarray],
    array_size: int,
    num_points: int = 20001,
    lo: float = -1.0,
    hi: float = 1.0,
) -> np.ndarray:
    """Trapezoid-rule moments of an arbitrary density on [lo, hi].

    Independent slow path used to cross-check the closed forms.
    """
    xi = np.linspace(lo, hi, num_points)
    vals = np.asarray(density(xi), dtype=float)
    r = np.arange(array_size)[:, None]
    kernel = np.exp(1j * np.pi * r * xi[None, :])
    return np.trapezoid(kernel * vals[None, :], xi, axis=1)


def _segment_overlap(a: float, b: float, lo: float, hi: float) -> float:
    return max(0.0, min(b, hi) - max(a, lo))


def _cluster_cell_mass(cluster: Cluster, lo: float, hi: float) -> float:
    """Cluster mass falling inside [lo, hi]."""
    if cluster.profile is None:
        return cluster.amplitude * _segment_overlap(cluster.start, cluster.end, lo, hi)
    s, e = max(cluster.start, lo), min(cluster.end, hi)
    if e <= s:
        return 0.0
    xi = np.linspace(s, e, 513)
    return float(np.trapezoid(cluster.density(xi), xi))


def grid_sample_asf(asf: GroupSparseASF, grid: AngularGrid) -> np.ndarray:
    """Per-cell masses of the ASF on the grid, renormalized to sum 1.

    Cell g is the support of pulse g (grid point +/- 1/G); the first cell
    wraps, collecting mass from both [-1, -1+1/G] and [1-1/G, 1].
    """
    masses = np.zeros(grid.size)
    half = 1.0 / grid.size
    for g in range(grid.size):
        lo, hi = grid.cell_bounds(g)
        for c in asf.clusters:
            masses[g] += _cluster_cell_mass(c, lo, hi)
            if lo < -1.0:
                # periodic image of the truncated part of cell 0
                masses[g] += _cluster_cell_mass(c, lo + 2.0, 1.0)
    total = masses.sum()
    if total <= 0:
        raise ValueError("ASF has no mass on the grid")
    return masses / total


def load_asf_json(path) -> GroupSparseASF:
    """Read an ASF description file: {"clusters": [{start, end, mass}, ...]}.

    Masses must sum to 1 within 1e-9.
    """
    with open(path) as fh:
        doc = json.load(fh)
    clusters = [
        Cluster(float(c["start"]), float(c["end"]), float(c["mass"]))
        for c in doc["clusters"]
    ]
    total = sum(c.mass for c in clusters)
    if abs(total - 1.0) > ASF_JSON_MASS_TOL:
        raise ValueError(f"cluster masses must sum to 1 within {ASF_JSON_MASS_TOL}, got {total!r}")
    return GroupSparseASF(clusters)


def save_asf_json(asf: GroupSparseASF, path):
    doc = {
        "clusters": [
            {"start": c.start, "end": c.end, "mass": c.mass} for c in asf.clusters
        ]
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
