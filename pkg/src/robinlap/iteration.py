"""Generic iterative kernels: power-iteration norm bounds and Neumann series."""

from __future__ import annotations

import numpy as np

from .errors import ContractionError, ConvergenceError


def power_norm(apply_op, apply_adj, shape, iters: int = 30, seed: int = 0) -> float:
    """Lower bound on the operator 2-norm by power iteration on A*A.

    Deterministic given ``seed``; the returned Rayleigh estimate is
    monotonically non-decreasing in ``iters`` and never exceeds the true
    norm.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    nx = np.linalg.norm(x.ravel())
    if nx == 0.0:
        return 0.0
    x = x / nx
    best = 0.0
    for _ in range(iters):
        y = apply_op(x)
        est = np.linalg.norm(y.ravel())
        best = max(best, float(est))
        z = apply_adj(y)
        nz = np.linalg.norm(z.ravel())
        if nz == 0.0:
            break
        x = z / nz
    return best


def neumann_solve(apply_op, b: np.ndarray, tol: float = 1e-10, max_iter: int = 400):
    """Solve ``(1 - K) x = b`` by the fixed-point iteration ``x <- b + K x``.

    Returns ``(x, residual_history)`` with the history of true residual norms
    ``||b + K x - x||``.  Raises :class:`ConvergenceError` when the tolerance
    is not met within ``max_iter`` iterations.
    """
    nb = np.linalg.norm(b.ravel())
    if nb == 0.0:
        return np.zeros_like(b), [0.0]
    x = np.zeros_like(b)
    kx = np.zeros_like(b)
    history = []
    for _ in range(max_iter + 1):
        residual = b + kx - x
        rnorm = float(np.linalg.norm(residual.ravel()))
        history.append(rnorm)
        if rnorm <= tol * nb:
            return x, history
        x = x + residual
        kx = apply_op(x)
    raise ConvergenceError(
        f"Neumann series did not reach tol={tol:g} within {max_iter} iterations "
        f"(last residual {history[-1] / nb:.3e} relative)",
        residuals=history,
    )


def require_contraction(norm_estimate: float, what: str = "operator") -> None:
    """Fail fast when a power-iteration lower bound already rules out ||K|| < 1."""
    if norm_estimate >= 1.0:
        raise ContractionError(
            f"{what} has norm lower bound {norm_estimate:.6g} >= 1; "
            "Neumann series would diverge",
            norm_estimate=norm_estimate,
        )
