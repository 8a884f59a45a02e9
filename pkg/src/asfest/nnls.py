"""Nonnegative least squares via the Lawson-Hanson active-set method.

Solves min_{x >= 0} ||A x - b||^2 with exact least-squares subproblem solves,
so returned supports are exact (zeros are exact zeros).  Rank-deficient
passive submatrices are resolved by the minimum-norm solution (SVD with
relative cutoff 1e-12).
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["NnlsSolution", "solve_nnls", "kkt_residual"]

RANK_RCOND = 1e-12


@dataclass
class NnlsSolution:
    """Solution container with a convergence certificate.

    kkt_violation uses the gradient g = 2 A^T (A x - b): the largest of
    |g_i| over the support {x_i > 0} and (-g_i)_+ over the zero set.
    """

    x: np.ndarray
    residual_norm: float
    iterations: int
    kkt_violation: float
    converged: bool
    tol: float = field(default=0.0, repr=False)


def kkt_residual(A: np.ndarray, b: np.ndarray, x: np.ndarray) -> float:
    """Max KKT violation of x for min_{x>=0} ||Ax-b||^2; zero iff optimal."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    g = 2.0 * (A.T @ (A @ x - b))
    active = x > 0
    viol = 0.0
    if np.any(active):
        viol = float(np.abs(g[active]).max())
    if np.any(~active):
        viol = max(viol, float(np.clip(-g[~active], 0.0, None).max()))
    return viol


def solve_nnls(
    A: np.ndarray, b: np.ndarray, tol: float | None = None, max_iter: int | None = None
) -> NnlsSolution:
    """Lawson-Hanson NNLS.

    Parameters
    ----------
    A, b : real design matrix (m, n) and right-hand side (m,).
    tol : KKT tolerance on the gradient 2 A^T (A x - b); defaults to
        1e-10 * ||A^T b||_inf.
    max_iter : outer-iteration cap, defaults to 10 * n.  When exceeded the
        best iterate is returned with ``converged=False``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != b.size:
        raise ValueError(f"shape mismatch: A {A.shape} vs b {b.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("A and b must be finite")
    n = A.shape[1]
    grad_scale = float(np.abs(A.T @ b).max()) if n else 0.0
    if tol is None:
        tol = 1e-10 * grad_scale
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if max_iter is None:
        max_iter = 10 * n

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    # entering candidates excluded after a degenerate step, until progress
    banned = np.zeros(n, dtype=bool)
    resid = b.copy()
    w = A.T @ resid  # = -gradient/2
    prev_obj = float(resid @ resid)
    iterations = 0
    exceeded = False

    while True:
        free = ~passive & ~banned
        if not np.any(free) or 2.0 * w[free].max() <= tol:
            break
        if iterations >= max_iter:
            exceeded = True
            break
        iterations += 1
        # most negative gradient enters; argmax takes the smallest index on ties
        cand = np.flatnonzero(free)
        j = cand[np.argmax(w[cand])]
        passive[j] = True

        first_solve = True
        while np.any(passive):
            idx = np.flatnonzero(passive)
            z, _, _, _ = np.linalg.lstsq(A[:, idx], b, rcond=RANK_RCOND)
            if z.min() > 0:
                x[:] = 0.0
                x[idx] = z
                break
            if first_solve and z[np.searchsorted(idx, j)] <= 0:
                # entering variable infeasible at once (rank deficiency /
                # roundoff): drop and exclude it instead of cycling
                passive[j] = False
                banned[j] = True
                break
            first_solve = False
            xp = x[idx]
            neg = z <= 0
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg, xp / (xp - z), np.inf)
            alpha = float(ratios.min())
            x[idx] = xp + alpha * (z - xp)
            hit = idx[neg & (ratios <= alpha)]
            x[hit] = 0.0
            passive[hit] = False

        resid = b - A @ x
        obj = float(resid @ resid)
        # outer objective never increases (Lawson-Hanson invariant)
        assert obj <= prev_obj * (1 + 1e-12) + 1e-300
        if obj < prev_obj:
            banned[:] = False
        prev_obj = obj
        w = A.T @ resid

    kkt = kkt_residual(A, b, x)
    converged = (not exceeded) and kkt <= tol
    return NnlsSolution(
        x=x,
        residual_norm=float(np.linalg.norm(b - A @ x)),
        iterations=iterations,
        kkt_violation=kkt,
        converged=converged,
        tol=tol,
    )
