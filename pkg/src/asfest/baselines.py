"""Classical comparison methods re-framed as grid ASF estimators: Burg
maximum entropy (Levinson-Durbin on the moment sequence), iterative l2
moment projection, and SPICE covariance fitting.

All three return nonnegative unit-sum densities on the angular grid.
"""

from dataclasses import dataclass

import numpy as np

from .core import AngularGrid, steering_vector
from .estimators import AsfEstimate

__all__ = [
    "BaselineConfig",
    "levinson_durbin",
    "estimate_burg",
    "project_onto_moment_set",
    "estimate_l2_projection",
    "estimate_spice",
]

REFLECTION_CLIP = 1.0 - 1e-9


@dataclass
class BaselineConfig:
    """Knobs for the comparison methods."""

    method: str = "burg"
    grid_size: int = 128
    max_iter: int = 500
    tol: float = 1e-8
    order: int | None = None  # Burg AR order; defaults to M-1
    noise_power_known: bool = False  # SPICE: initialize noise at supplied N0
    projection_max_iter: int = 500  # l2proj iteration cap

    def __post_init__(self):
        if self.method not in {"spice", "burg", "l2proj"}:
            raise ValueError(f"unknown baseline method {self.method!r}")
        if self.max_iter < 1 or self.projection_max_iter < 1:
            raise ValueError("iteration caps must be >= 1")


def levinson_durbin(autocorr: np.ndarray, order: int):
    """Levinson-Durbin recursion on a Hermitian autocorrelation sequence.

    Returns (a, innovation, reflections, clipped): AR coefficients a_1..a_p
    for the model x_t + sum_k a_k x_{t-k} = e_t, the innovation power, the
    reflection coefficients, and whether any |kappa| >= 1 had to be clipped.
    """
    r = np.asarray(autocorr, dtype=complex)
    if order < 0 or order >= r.size:
        raise ValueError(f"order must be in 0..{r.size - 1}, got {order}")
    if r[0].real <= 0:
        raise ValueError("autocorrelation at lag 0 must be positive")
    a = np.zeros(order + 1, dtype=complex)
    a[0] = 1.0
    energy = float(r[0].real)
    reflections = np.zeros(order, dtype=complex)
    clipped = False
    for m in range(1, order + 1):
        acc = r[m] + np.dot(a[1:m], r[m - 1 : 0 : -1])
        kappa = -acc / energy
        if abs(kappa) >= 1.0:
            kappa *= REFLECTION_CLIP / abs(kappa)
            clipped = True
        a_prev = a[1:m].copy()
        a[1:m] = a_prev + kappa * a_prev[::-1].conj()
        a[m] = kappa
        reflections[m - 1] = kappa
        energy *= 1.0 - abs(kappa) ** 2
    return a[1:], energy, reflections, clipped


def estimate_burg(
    sigma_hat: np.ndarray, order: int, grid: AngularGrid
) -> AsfEstimate:
    """Maximum-entropy spectral estimate from the first M moments.

    Levinson-Durbin yields AR coefficients whose spectrum reproduces the
    input moments exactly (up to grid quadrature) when order = M-1.  The
    grid density is innovation / (2 |1 + sum_k a_k e^{-j pi k xi}|^2); the
    factor 2 converts the unit-circle power density to the sine-angle
    density whose moments are sigma_r.
    """
    sigma_hat = np.asarray(sigma_hat, dtype=complex)
    if sigma_hat[0].real <= 0:
        raise ValueError("sigma_0 must be positive")
    if order > sigma_hat.size - 1:
        raise ValueError("order cannot exceed M-1")
    a, energy, reflections, clipped = levinson_durbin(sigma_hat, order)
    xi = grid.points
    k = np.arange(1, order + 1)[:, None]
    transfer = 1.0 + (a[:, None] * np.exp(-1j * np.pi * k * xi[None, :])).sum(axis=0)
    density = energy / (2.0 * np.abs(transfer) ** 2)
    total = density.sum()
    return AsfEstimate(
        gamma=density / total,
        method="burg",
        diagnostics={
            "order": order,
            "innovation": energy,
            "reflections": reflections,
            "clipped": clipped,
        },
        extras={"density": density},
    )


def _moment_basis(grid: AngularGrid, array_size: int) -> np.ndarray:
    r = np.arange(array_size)[:, None]
    return np.exp(1j * np.pi * r * grid.points[None, :])


def grid_moments(mu: np.ndarray, basis: np.ndarray, cell_width: float) -> np.ndarray:
    """Quadrature moments m_r = sum_g mu_g e^{j pi r xi_g} * (2/G)."""
    return cell_width * (basis @ mu)


def project_onto_moment_set(
    mu: np.ndarray, sigma_hat: np.ndarray, grid: AngularGrid
) -> np.ndarray:
    """Orthogonal projection onto {mu : moments(mu) = sigma_hat}.

    Uses the orthogonality of the moment kernels on the periodic grid: the
    correction for lag r is (sigma_r - m_r)/2 times the conjugate kernel,
    summed over r and -r (r = 0 counted once).
    """
    basis = _moment_basis(grid, sigma_hat.size)
    m = grid_moments(mu, basis, grid.cell_width)
    c = (np.asarray(sigma_hat, dtype=complex) - m) / 2.0
    correction = np.real(c[0]) + 2.0 * np.real(basis[1:].conj().T @ c[1:])
    return mu + correction


def estimate_l2_projection(
    sigma_hat: np.ndarray,
    grid: AngularGrid,
    max_iter: int = 500,
    tol: float = 1e-8,
) -> AsfEstimate:
    """Alternating projections between the moment-matching affine set and
    the nonnegative cone, started from the constant density sigma_0 / 2."""
    sigma_hat = np.asarray(sigma_hat, dtype=complex)
    m = sigma_hat.size
    if grid.size < 4 * m:
        raise ValueError(f"grid of size {grid.size} too coarse; need G >= 4M = {4 * m}")
    basis = _moment_basis(grid, m)
    mu = np.full(grid.size, sigma_hat[0].real / 2.0)
    converged = False
    iterations = 0
    residual = np.inf
    for iterations in range(1, max_iter + 1):
        mu = project_onto_moment_set(mu, sigma_hat, grid)
        mu = np.clip(mu, 0.0, None)
        residual = float(
            np.abs(sigma_hat - grid_moments(mu, basis, grid.cell_width)).max()
        )
        if residual <= tol:
            converged = True
            break
    total = mu.sum()
    gamma = mu / total if total > 0 else mu
    return AsfEstimate(
        gamma=gamma,
        method="l2proj",
        diagnostics={
            "iterations": iterations,
            "moment_residual": residual,
            "converged": converged,
        },
        extras={"density": mu},
    )


def _hermitian_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def estimate_spice(
    sample_cov: np.ndarray,
    grid: AngularGrid,
    max_iter: int = 200,
    tol: float = 1e-8,
    noise_power: float | None = None,
) -> AsfEstimate:
    """SPICE covariance fitting on the grid of steering atoms.

    Iterates the scaled power updates for the model
    R(p) = sum_g p_g a(xi_g) a(xi_g)^H + sigma I toward a fixed point; the
    weighted fitting criterion tr(R^-1 Rhat) + sum_g w_g p_g + w_0 sigma is
    nonincreasing along the way.  ``noise_power`` only sets the initial
    sigma; the noise term is always re-estimated.
    """
    r_hat = np.asarray(sample_cov, dtype=complex)
    m = r_hat.shape[0]
    if r_hat.shape != (m, m):
        raise ValueError("sample covariance must be square")
    r_hat = 0.5 * (r_hat + r_hat.conj().T)
    eigvals = np.linalg.eigvalsh(r_hat)
    ridge_flag = False
    if eigvals.min() <= 1e-12 * max(eigvals.max(), 1e-300):
        # singular sample covariance (e.g. T < M): ridge so the weights exist
        r_hat = r_hat + (1e-10 * np.trace(r_hat).real / m) * np.eye(m)
        ridge_flag = True

    steering = np.column_stack([steering_vector(xi, m) for xi in grid.points])
    r_hat_inv = np.linalg.inv(r_hat)
    r_hat_sqrt = _hermitian_sqrt(r_hat)
    weights = np.real(np.einsum("ig,ij,jg->g", steering.conj(), r_hat_inv, steering))
    weight_noise = float(np.trace(r_hat_inv).real)

    # matched-filter power initialization
    p = np.real(np.einsum("ig,ij,jg->g", steering.conj(), r_hat, steering)) / m**2
    p = np.clip(p, 1e-16 * max(p.max(), 1e-300), None)
    if noise_power is not None and noise_power > 0:
        sigma = float(noise_power)
    else:
        sigma = float(max(eigvals.min(), 1e-8 * eigvals.max()))

    trace_floor = 1e-12
    criterion_trace = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        r = (steering * p) @ steering.conj().T + sigma * np.eye(m)
        floor = trace_floor * np.trace(r).real / m
        if np.linalg.eigvalsh(r).min() < floor:
            r = r + floor * np.eye(m)
        r_inv = np.linalg.inv(r)
        criterion = float(
            np.trace(r_inv @ r_hat).real + np.dot(weights, p) + weight_noise * sigma
        )
        criterion_trace.append(criterion)
        x = r_inv @ r_hat_sqrt
        num = np.linalg.norm(steering.conj().T @ x, axis=1)
        num_noise = float(np.linalg.norm(x))
        rho = float(
            np.dot(np.sqrt(weights) * p, num) + np.sqrt(weight_noise) * sigma * num_noise
        )
        p_new = p * num / (np.sqrt(weights) * rho)
        sigma_new = sigma * num_noise / (np.sqrt(weight_noise) * rho)
        step = np.linalg.norm(p_new - p) / max(np.linalg.norm(p), 1e-300)
        p, sigma = p_new, float(sigma_new)
        if step < tol:
            converged = True
            break

    total = p.sum()
    return AsfEstimate(
        gamma=p / total if total > 0 else p,
        method="spice",
        diagnostics={
            "iterations": iterations,
            "noise_power": sigma,
            "converged": converged,
            "ridge_regularized": ridge_flag,
        },
        extras={"criterion_trace": np.asarray(criterion_trace), "powers": p},
    )
