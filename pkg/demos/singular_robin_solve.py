"""Solve a Robin problem with a singular boundary coefficient.

The coefficient |x|^(-1/4) on the unit interval of the boundary is unbounded
but admissible for the factored boundary-correction method.  The script
finds the certified contraction shift, assembles the resolvent, reports the
recomputed residuals, and cross-checks against the finite-difference form
oracle.

Run:  python demos/singular_robin_solve.py
"""

import numpy as np

from robinlap import (
    BoundaryGrid,
    HalfspaceModel,
    SlabFunction,
    SlabGrid,
    bmb_operator,
    estimate_operator_norm,
    find_lambda0,
    krein_resolvent,
    load_coefficient,
)
from robinlap.estimates import fd_robin_oracle, fd_vs_spectral_error
from robinlap.grids import mixed_synthesis

grid = BoundaryGrid(d=2, N=128, L=2.0 * np.pi)
slab = SlabGrid(grid, H=np.pi, Nd=128)
model = HalfspaceModel(slab)

alpha = load_coefficient("r**(-0.25) * ball(1.0)", grid, p=3.0)
print(f"coefficient: peak {alpha.samples.max():.2f}, admissible: {alpha.admissible}")

lam0 = find_lambda0(alpha, model, seed=0)
certified = estimate_operator_norm(bmb_operator(alpha, model, lam0), grid, iters=30, seed=1)
print(f"certified shift lam0 = {lam0} with contraction norm {certified:.4f}")

rng = np.random.default_rng(2)
coeffs = rng.standard_normal(slab.shape) + 1j * rng.standard_normal(slab.shape)
coeffs /= (1.0 + grid.xi_sq[..., None] + slab.mu) ** 1.5
forcing = SlabFunction.from_cosine(slab, mixed_synthesis(slab, coeffs))

result = krein_resolvent(lam0, forcing, alpha, model)
print(f"\nboundary-correction solve: {len(result.iterations)} series iterations")
print(f"  recomputed PDE residual:      {result.residual_pde:.2e}")
print(f"  recomputed boundary residual: {result.residual_bc:.2e}")

fd = fd_robin_oracle(alpha, slab, lam0, forcing)
err = fd_vs_spectral_error(result.u, fd)
print(f"\nindependent form-method oracle ({fd.iterations} CG iterations): "
      f"relative discrepancy {err:.2e}")
print("(the discrepancy is dominated by the oracle's second-order stencil; "
      "it halves at least twofold per simultaneous grid doubling)")
