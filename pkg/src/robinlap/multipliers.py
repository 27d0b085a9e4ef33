"""Fourier multipliers on the boundary lattice and composed boundary operators.

The central symbol is the Neumann-to-Dirichlet multiplier of the Laplacian,
``(|xi|^2 - lambda)^(-1/2)`` on the half-space, with the square root taken on
the principal branch so that ``Re sqrt > 0`` and the associated normal modes
decay.  The slab variant ``coth(omega H)/omega`` is the Neumann-to-Dirichlet
value of the two-point problem on ``[0, H]`` with a Neumann wall at ``H``; it
converges to the half-space symbol pointwise as ``H -> infinity``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import CutViolationError, GridMismatchError
from .grids import BoundaryGrid, GridFunction, forward_transform, inverse_transform
from .iteration import power_norm


def require_off_cut(lam: complex) -> complex:
    """Reject spectral parameters on the cut [0, inf)."""
    lam = complex(lam)
    if lam.imag == 0.0 and lam.real >= 0.0:
        raise CutViolationError(f"lambda = {lam} lies on the cut [0, inf)")
    return lam


def sqrt_positive_real(values: np.ndarray) -> np.ndarray:
    """Principal square root; real part is positive off the negative axis."""
    return np.sqrt(np.asarray(values, dtype=complex))


@dataclass(frozen=True)
class FourierMultiplier:
    """Diagonal operator in frequency space: one symbol value per mode."""

    grid: BoundaryGrid
    symbol: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "symbol", np.asarray(self.symbol, dtype=complex))
        if self.symbol.shape != self.grid.shape:
            raise GridMismatchError("symbol shape does not match the frequency lattice")

    def apply_values(self, values: np.ndarray) -> np.ndarray:
        return inverse_transform(self.grid, self.symbol * forward_transform(self.grid, values))

    def adjoint_values(self, values: np.ndarray) -> np.ndarray:
        return inverse_transform(
            self.grid, np.conj(self.symbol) * forward_transform(self.grid, values)
        )

    def save_csv(self, path) -> None:
        """Export the symbol as rows ``mode index..., re, im``."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"k{i}" for i in range(self.symbol.ndim)] + ["re", "im"])
            kk = np.fft.fftfreq(self.grid.N) * self.grid.N
            for idx in np.ndindex(self.symbol.shape):
                modes = [int(round(kk[i])) for i in idx]
                val = self.symbol[idx]
                writer.writerow(modes + [repr(float(val.real)), repr(float(val.imag))])


def weyl_symbol(
    lam: complex, grid: BoundaryGrid, geometry: str = "slab", H: float | None = None
) -> FourierMultiplier:
    """Neumann-to-Dirichlet multiplier of ``-Laplace - lambda``.

    ``geometry="halfspace"`` gives ``1/omega`` and ``geometry="slab"`` gives
    ``coth(omega H)/omega`` with ``omega = sqrt(|xi|^2 - lambda)``.
    """
    lam = require_off_cut(lam)
    omega = sqrt_positive_real(grid.xi_sq - lam)
    if geometry == "halfspace":
        sym = 1.0 / omega
        label = f"weyl halfspace lam={lam}"
    elif geometry == "slab":
        if H is None or not (H > 0):
            raise ValueError("slab geometry needs a positive height H")
        sym = 1.0 / (omega * np.tanh(omega * H))
        label = f"weyl slab H={H} lam={lam}"
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    return FourierMultiplier(grid, sym, label)


def sobolev_weight(grid: BoundaryGrid, s: float) -> FourierMultiplier:
    return FourierMultiplier(grid, (1.0 + grid.xi_sq) ** (s / 2.0), f"(1+|xi|^2)^{s}/2")


def apply_multiplier(m: FourierMultiplier, phi: GridFunction) -> GridFunction:
    """Apply a multiplier to a node-space boundary function."""
    if phi.grid != m.grid:
        raise GridMismatchError("multiplier and function live on different grids")
    if phi.space != "node":
        raise ValueError("apply_multiplier expects a node-space function")
    return GridFunction(m.grid, m.apply_values(phi.values), "node")


class BoundaryOperator:
    """Finite composition chain of multipliers and pointwise multiplications.

    ``factors`` are applied right-to-left, mirroring operator composition:
    ``BoundaryOperator([A, B]).apply(x) == A(B(x))``.  Factors are either
    :class:`FourierMultiplier` instances or arrays of node samples.
    """

    def __init__(self, grid: BoundaryGrid, factors=()):
        self.grid = grid
        normalized = []
        for f in factors:
            if isinstance(f, FourierMultiplier):
                if f.grid != grid:
                    raise GridMismatchError("factor grid mismatch")
                normalized.append(("fourier", f))
            else:
                arr = np.asarray(f, dtype=complex)
                if arr.shape != grid.shape:
                    raise GridMismatchError("pointwise factor shape mismatch")
                normalized.append(("pointwise", arr))
        self.factors = tuple(normalized)

    @classmethod
    def identity(cls, grid: BoundaryGrid) -> "BoundaryOperator":
        return cls(grid, [])

    def apply_values(self, values: np.ndarray) -> np.ndarray:
        out = np.asarray(values, dtype=complex)
        for kind, f in reversed(self.factors):
            out = f.apply_values(out) if kind == "fourier" else f * out
        return out

    def adjoint_values(self, values: np.ndarray) -> np.ndarray:
        out = np.asarray(values, dtype=complex)
        for kind, f in self.factors:
            out = f.adjoint_values(out) if kind == "fourier" else np.conj(f) * out
        return out

    def apply(self, phi: GridFunction) -> GridFunction:
        if phi.grid != self.grid or phi.space != "node":
            raise GridMismatchError("operand must be a node-space function on the same grid")
        return GridFunction(self.grid, self.apply_values(phi.values), "node")

    def compose(self, other: "BoundaryOperator") -> "BoundaryOperator":
        if other.grid != self.grid:
            raise GridMismatchError("operator grids differ")
        combined = BoundaryOperator(self.grid)
        combined.factors = self.factors + other.factors
        return combined

    def as_dense(self, max_nodes: int = 4096) -> np.ndarray:
        """Dense matrix realization by applying to the standard basis."""
        n = self.grid.node_count
        if n > max_nodes:
            raise ValueError(f"dense realization refused for {n} > {max_nodes} nodes")
        mat = np.zeros((n, n), dtype=complex)
        basis = np.zeros(self.grid.shape, dtype=complex)
        flat = basis.reshape(-1)
        for j in range(n):
            flat[j] = 1.0
            mat[:, j] = self.apply_values(basis).reshape(-1)
            flat[j] = 0.0
        return mat


def estimate_operator_norm(
    op: BoundaryOperator, grid: BoundaryGrid, iters: int = 30, seed: int = 0
) -> float:
    """Seeded power-iteration lower bound on the operator norm of ``op``.

    The uniform node weight cancels in the Rayleigh quotients, so plain
    Euclidean norms are used internally.
    """
    if op.grid != grid:
        raise GridMismatchError("operator grid mismatch")
    return power_norm(op.apply_values, op.adjoint_values, grid.shape, iters=iters, seed=seed)
