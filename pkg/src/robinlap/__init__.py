"""Numerical boundary-triple toolkit for Robin Laplacians on a half-space.

Resolvents of the Laplacian with (possibly singular) Robin boundary
conditions are assembled from the Neumann resolvent plus a boundary-space
correction driven by the Neumann-to-Dirichlet Fourier multiplier, and
checked against independent oracles: dense inverses at matrix scale, a
closed-form mode solver for constant coefficients and a finite-difference
discretization of the quadratic form.
"""

from .errors import (
    ContractionError,
    ConvergenceError,
    ConstraintSingularError,
    CutViolationError,
    GridMismatchError,
    IndefiniteSystemError,
    Lambda0SearchError,
    RobinlapError,
    SpectralCollisionError,
)
from .grids import (
    BoundaryGrid,
    GridFunction,
    LayerPart,
    SlabFunction,
    SlabGrid,
    boundary_inner,
    dft,
    grad_norm_sq,
    helmholtz_apply,
    load_binary,
    load_csv,
    norm,
    save_binary,
    save_csv,
    save_slab_slices,
    slab_inner,
    slab_norm,
)
from .halfspace import (
    HalfspaceModel,
    adjoint_gamma_apply,
    gamma_apply,
    neumann_resolvent,
    traces,
)
from .multipliers import (
    BoundaryOperator,
    FourierMultiplier,
    apply_multiplier,
    estimate_operator_norm,
    sobolev_weight,
    weyl_symbol,
)
from .robin import (
    KreinSolveResult,
    RobinCoefficient,
    bmb_operator,
    boundary_residual,
    find_lambda0,
    form_admissible,
    krein_resolvent,
    load_coefficient,
    solve_boundary_equation,
    split_lp_linf,
    theorem_admissible,
)
from .triple_lab import (
    ConditionReport,
    DiscreteTriple,
    FactoredBoundaryOperator,
    KreinMatrixReport,
    build_discrete_triple,
    check_conditions,
    extension_matrix,
    green_identity_defect,
    verify_krein_matrix,
    weyl_of_triple,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
