"""Concrete boundary-triple maps for the Laplacian on the truncated half-space.

The reference operator is the Neumann Laplacian on the slab (cosine basis in
the normal direction, Fourier basis along the boundary).  The gamma field
maps Neumann boundary data to the exact exponential solution of the
homogeneous Helmholtz equation, kept in analytic form as a
:class:`~robinlap.grids.LayerPart` so that traces and PDE residuals carry no
discretization error in the normal direction.

Sign convention: the Neumann trace is ``-du/dx_d`` at ``x_d = 0`` (outward
normal of the half-space), which makes the Neumann-to-Dirichlet multiplier
positive for negative real spectral parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError
from .grids import (
    GridFunction,
    LayerPart,
    SlabFunction,
    SlabGrid,
    cosine_analysis,
    forward_transform,
    inverse_transform,
    mixed_analysis,
    mixed_synthesis,
)
from .multipliers import FourierMultiplier, require_off_cut, weyl_symbol


@dataclass(frozen=True)
class HalfspaceModel:
    """Slab discretization plus the geometry used for gamma-field profiles.

    ``geometry="slab"`` (default) keeps the gamma field and the
    Neumann-to-Dirichlet multiplier exactly consistent with the truncated
    reference operator; ``"halfspace"`` uses the untruncated exponential
    profiles, which agree with the slab ones up to ``exp(-2 omega H)``.
    """

    slab: SlabGrid
    geometry: str = "slab"

    def __post_init__(self):
        if self.geometry not in ("slab", "halfspace"):
            raise ValueError(f"unknown geometry {self.geometry!r}")

    def weyl_multiplier(self, lam: complex) -> FourierMultiplier:
        if self.geometry == "halfspace":
            return weyl_symbol(lam, self.slab.boundary, "halfspace")
        return weyl_symbol(lam, self.slab.boundary, "slab", H=self.slab.H)


def gamma_apply(lam: complex, phi: GridFunction, model: HalfspaceModel) -> SlabFunction:
    """Solution of ``(-Laplace - lam) u = 0`` with Neumann trace ``phi``.

    Returned as a pure analytic layer; its Dirichlet trace equals the
    Neumann-to-Dirichlet multiplier applied to ``phi``.
    """
    lam = require_off_cut(lam)
    slab = model.slab
    if phi.grid != slab.boundary or phi.space != "node":
        raise GridMismatchError("phi must be a node-space function on the boundary grid")
    phi_hat = forward_transform(slab.boundary, phi.values)
    amps = model.weyl_multiplier(lam).symbol * phi_hat
    layer = LayerPart(slab, amps, lam, model.geometry)
    return SlabFunction.from_layer(layer)


def neumann_resolvent(lam: complex, h: SlabFunction, model: HalfspaceModel) -> SlabFunction:
    """Resolvent of the slab Neumann Laplacian applied to a band-limited field."""
    lam = require_off_cut(lam)
    slab = model.slab
    if h.grid != slab:
        raise GridMismatchError("forcing lives on a different slab")
    if h.layers:
        raise ValueError("neumann_resolvent expects a band-limited (cosine) field")
    coeffs = mixed_analysis(slab, h.values)
    denom = slab.boundary.xi_sq[..., None] + slab.mu - lam
    return SlabFunction.from_cosine(slab, mixed_synthesis(slab, coeffs / denom))


def adjoint_gamma_apply(lam: complex, h: SlabFunction, model: HalfspaceModel) -> GridFunction:
    """Dirichlet trace of the Neumann resolvent at ``lam``.

    This realizes the adjoint of the gamma field at the conjugate parameter:
    ``<gamma(lam) phi, h> = <phi, adjoint_gamma_apply(conj(lam), h)>``.
    """
    lam = require_off_cut(lam)
    slab = model.slab
    if h.grid != slab:
        raise GridMismatchError("field lives on a different slab")
    if h.layers:
        raise ValueError("adjoint_gamma_apply expects a band-limited (cosine) field")
    coeffs = mixed_analysis(slab, h.values)
    denom = slab.boundary.xi_sq[..., None] + slab.mu - lam
    trace_hat = np.sum(coeffs / denom, axis=-1)
    return GridFunction(slab.boundary, inverse_transform(slab.boundary, trace_hat), "node")


def traces(u: SlabFunction) -> tuple:
    """Dirichlet and Neumann traces at ``x_d = 0``, evaluated spectrally.

    The cosine part contributes ``sum_k a_k`` to the Dirichlet trace and,
    having zero slope at the wall by construction, nothing to the Neumann
    trace; analytic layers contribute their exact trace data.
    """
    slab = u.grid
    bdry = slab.boundary
    a = cosine_analysis(slab, u.cosine_values())
    tau_d = np.sum(a, axis=-1)
    tau_n_hat = np.zeros(bdry.shape, dtype=complex)
    for lay in u.layers:
        tau_d = tau_d + inverse_transform(bdry, lay.amps)
        tau_n_hat = tau_n_hat + lay.neumann_factor() * lay.amps
    tau_n = inverse_transform(bdry, tau_n_hat)
    return GridFunction(bdry, tau_d, "node"), GridFunction(bdry, tau_n, "node")
