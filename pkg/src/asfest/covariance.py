"""Channel snapshot simulation, sample covariance, Toeplitzification, and
assembly of the real-valued weighted least-squares data (A, b)."""

import warnings
from dataclasses import dataclass

import numpy as np

from .core import ToeplitzCovariance

__all__ = [
    "SnapshotSet",
    "NnlsProblem",
    "sample_snapshots",
    "sample_covariance",
    "toeplitzify",
    "toeplitzify_matrix",
    "weight_matrix",
    "stack_complex",
    "build_nnls_problem",
]

HERMITIAN_RTOL = 1e-10
EIG_CLIP_WARN_RTOL = 1e-8


@dataclass(frozen=True)
class SnapshotSet:
    """T noisy channel vectors, one per row of ``samples`` (T x M complex)."""

    samples: np.ndarray
    noise_power: float
    seed: int | None

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("samples must be a (T, M) array with T >= 1")
        if self.noise_power < 0:
            raise ValueError("noise power must be nonnegative")
        object.__setattr__(self, "samples", arr)

    @property
    def num_snapshots(self) -> int:
        return self.samples.shape[0]

    @property
    def array_size(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class NnlsProblem:
    """Real stacked data for min_{gamma >= 0} ||A gamma - b||^2.

    A has 2M-1 rows: real parts of the M weighted moment rows followed by
    imaginary parts of rows 1..M-1 (row 0 is structurally real).
    """

    A: np.ndarray
    b: np.ndarray
    array_size: int
    grid_size: int
    noise_power: float


def _standard_complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    # unit-variance circularly symmetric: real/imag each N(0, 1/2)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_snapshots(
    cov: ToeplitzCovariance, num_snapshots: int, noise_power: float, seed
) -> SnapshotSet:
    """Draw y(s) = Sigma^(1/2) w(s) + sqrt(N0) z(s), w and z i.i.d. CN(0, I).

    Sigma^(1/2) comes from a Hermitian eigendecomposition with negative
    eigenvalues clipped to zero.  Deterministic given the seed.
    """
    if num_snapshots < 1:
        raise ValueError("need at least one snapshot")
    if noise_power < 0:
        raise ValueError("noise power must be nonnegative")
    mat = cov.matrix()
    if not np.allclose(mat, mat.conj().T, rtol=0, atol=HERMITIAN_RTOL * max(1.0, np.abs(mat).max())):
        raise ValueError("covariance matrix is not Hermitian")
    eigvals, eigvecs = np.linalg.eigh(mat)
    sigma0 = float(cov.first_column[0].real)
    if eigvals.min() < -EIG_CLIP_WARN_RTOL * max(sigma0, 1e-300):
        warnings.warn(
            f"clipping eigenvalue {eigvals.min():g} well below zero "
            f"(sigma_0 = {sigma0:g}); covariance may not be PSD",
            stacklevel=2,
        )
    root = (eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.conj().T
    rng = np.random.default_rng(seed)
    m = cov.array_size
    w = _standard_complex_normal(rng, (num_snapshots, m))
    z = _standard_complex_normal(rng, (num_snapshots, m))
    samples = w @ root.T + np.sqrt(noise_power) * z
    return SnapshotSet(samples=samples, noise_power=noise_power, seed=seed)


def sample_covariance(snapshots: SnapshotSet) -> np.ndarray:
    """(1/T) sum_s y(s) y(s)^H, symmetrized so it is exactly Hermitian."""
    y = snapshots.samples
    s = (y.T @ y.conj()) / snapshots.num_snapshots
    return 0.5 * (s + s.conj().T)


def toeplitzify(s: np.ndarray) -> np.ndarray:
    """First column of the Toeplitz projection of a Hermitian matrix.

    Entry k is the average of the k-th subdiagonal of S, i.e. the entries
    S[l+k, l]; this is the diagonal-averaging projection onto Hermitian
    Toeplitz structure expressed in the first-column moment convention
    (sigma_r sits below the main diagonal).
    """
    s = np.asarray(s, dtype=complex)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError("input must be a square matrix")
    scale = max(1.0, float(np.abs(s).max()))
    if np.abs(s - s.conj().T).max() > 1e-8 * scale:
        raise ValueError("input must be Hermitian")
    m = s.shape[0]
    out = np.empty(m, dtype=complex)
    for k in range(m):
        out[k] = np.diagonal(s, offset=-k).mean()
    return out


def toeplitzify_matrix(s: np.ndarray) -> np.ndarray:
    """The full diagonal-averaged Hermitian Toeplitz matrix."""
    return ToeplitzCovariance(toeplitzify(s)).matrix()


def weight_matrix(array_size: int) -> np.ndarray:
    """Diagonal of W: (sqrt(M), sqrt(2(M-1)), ..., sqrt(2)).

    Entry r counts how often moment r appears in an M x M Hermitian Toeplitz
    matrix, so ||Toep(u) - Toep(v)||_F = ||W (u - v)||.
    """
    if array_size < 1:
        raise ValueError("array size must be >= 1")
    r = np.arange(array_size)
    counts = np.where(r == 0, array_size, 2.0 * (array_size - r))
    return np.sqrt(counts)


def stack_complex(v: np.ndarray) -> np.ndarray:
    """Real stacking of a complex vector or of each column of a matrix:
    real parts of all M rows, then imaginary parts of rows 1..M-1."""
    v = np.asarray(v, dtype=complex)
    return np.concatenate([v.real, v[1:].imag], axis=0)


def build_nnls_problem(
    sigma_hat: np.ndarray, atoms: np.ndarray, noise_power: float
) -> NnlsProblem:
    """Assemble the weighted, real-stacked least-squares data.

    b = stack(W sigma_hat) with the known noise floor N0 * W[0,0] subtracted
    from the first (real) row; A stacks the weighted atom columns the same
    way.  The first row of A is the constant sqrt(M) * 2/G.
    """
    sigma_hat = np.asarray(sigma_hat, dtype=complex)
    atoms = np.asarray(atoms, dtype=complex)
    if atoms.ndim != 2 or atoms.shape[0] != sigma_hat.size:
        raise ValueError(
            f"atom matrix shape {atoms.shape} does not match sigma of length {sigma_hat.size}"
        )
    if noise_power < 0:
        raise ValueError("noise power must be nonnegative")
    m, g = atoms.shape
    w = weight_matrix(m)
    a = stack_complex(w[:, None] * atoms)
    b = stack_complex(w * sigma_hat)
    b[0] -= noise_power * w[0]
    return NnlsProblem(A=a, b=b, array_size=m, grid_size=g, noise_power=noise_power)
