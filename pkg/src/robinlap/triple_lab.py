"""Finite-dimensional boundary triple built from a ghost-node 1-D Laplacian.

Vectors have ``n + 2`` entries ``[g_L, f_1, ..., f_n, g_R]``: ``n`` interior
values plus two ghost values at the ends.  The operator ``T`` takes second
differences at the interior nodes, the boundary maps read off discrete
Neumann data ``Gamma_0 f = (-(f_1 - g_L)/h, (g_R - f_n)/h)`` and Dirichlet
data ``Gamma_1 f = (g_L, g_R)``, and the Hilbert-space inner product weights
the interior by ``h``.  With these choices the second Green identity

    (Tf, g) - (f, Tg) = (Gamma_1 f, Gamma_0 g) - (Gamma_0 f, Gamma_1 g)

holds for *all* vectors by exact summation by parts, which makes the
abstract extension algebra checkable at machine precision: restrictions
``Gamma_0 f = B Gamma_1 f`` are realized by eliminating the ghost values,
and the resulting resolvents can be compared against the boundary-space
correction formula with dense inverses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConstraintSingularError, SpectralCollisionError

_EIG_TOL = 1e-8


@dataclass(frozen=True)
class DiscreteTriple:
    """Ghost-node second-difference model of a boundary triple on [0, (n+1)h]."""

    n: int
    h: float

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"need at least 3 interior nodes, got {self.n}")
        if not (self.h > 0):
            raise ValueError(f"mesh width must be positive, got {self.h}")

    @property
    def size(self) -> int:
        return self.n + 2

    def apply_t(self, f: np.ndarray) -> np.ndarray:
        """Second difference at the interior nodes; acts on the first axis."""
        f = np.asarray(f, dtype=complex)
        return -(f[:-2] - 2.0 * f[1:-1] + f[2:]) / self.h**2

    def gamma0(self, f: np.ndarray) -> np.ndarray:
        """Discrete Neumann traces (outward one-sided differences)."""
        f = np.asarray(f, dtype=complex)
        return np.stack([-(f[1] - f[0]) / self.h, (f[-1] - f[-2]) / self.h])

    def gamma1(self, f: np.ndarray) -> np.ndarray:
        """Discrete Dirichlet traces (the ghost values)."""
        f = np.asarray(f, dtype=complex)
        return np.stack([f[0], f[-1]])

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """Interior inner product with weight h, linear in the first slot."""
        f = np.asarray(f, dtype=complex)
        g = np.asarray(g, dtype=complex)
        return complex(self.h * np.sum(f[1:-1] * np.conj(g[1:-1])))

    def interior_norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(self.h) * np.linalg.norm(np.asarray(f, dtype=complex)[1:-1]))

    @cached_property
    def a0_matrix(self) -> np.ndarray:
        """Neumann realization: T on ker Gamma_0 after ghost elimination."""
        a = self._dirichlet_base()
        a[0, 0] -= 1.0 / self.h**2
        a[-1, -1] -= 1.0 / self.h**2
        return a

    def _dirichlet_base(self) -> np.ndarray:
        n, h2 = self.n, self.h**2
        a = np.zeros((n, n))
        idx = np.arange(n)
        a[idx, idx] = 2.0 / h2
        a[idx[:-1], idx[:-1] + 1] = -1.0 / h2
        a[idx[:-1] + 1, idx[:-1]] = -1.0 / h2
        return a


def build_discrete_triple(n: int, h: float | None = None) -> DiscreteTriple:
    """Triple with ``n`` interior nodes; default mesh width fills [0, 1]."""
    return DiscreteTriple(n, 1.0 / (n + 1) if h is None else h)


def _c2_inner(u: np.ndarray, v: np.ndarray) -> complex:
    return complex(np.sum(np.asarray(u) * np.conj(np.asarray(v))))


def green_identity_defect(t: DiscreteTriple, f: np.ndarray, g: np.ndarray) -> tuple:
    """Return ``(defect, scale)`` for the second Green identity.

    ``scale`` sums the magnitudes of the four pairings entering the identity,
    so ``defect <= tol * scale`` is a roundoff-robust acceptance test even
    for basis vectors whose interior part vanishes.
    """
    tf, tg = t.apply_t(f), t.apply_t(g)
    fin = np.asarray(f, dtype=complex)[1:-1]
    gin = np.asarray(g, dtype=complex)[1:-1]
    lhs = t.h * (np.sum(tf * np.conj(gin)) - np.sum(fin * np.conj(tg)))
    g0f, g1f = t.gamma0(f), t.gamma1(f)
    g0g, g1g = t.gamma0(g), t.gamma1(g)
    rhs = _c2_inner(g1f, g0g) - _c2_inner(g0f, g1g)
    defect = abs(lhs - rhs)
    scale = (
        t.h * np.linalg.norm(tf) * np.linalg.norm(gin)
        + t.h * np.linalg.norm(fin) * np.linalg.norm(tg)
        + np.linalg.norm(g1f) * np.linalg.norm(g0g)
        + np.linalg.norm(g0f) * np.linalg.norm(g1g)
    )
    return float(defect), float(max(scale, 1e-30))


@dataclass(frozen=True)
class FactoredBoundaryOperator:
    """Boundary parameter ``B = B1 B2`` as explicit 2x2 factors."""

    b1: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b1", np.asarray(self.b1, dtype=complex).reshape(2, 2))
        object.__setattr__(self, "b2", np.asarray(self.b2, dtype=complex).reshape(2, 2))

    @classmethod
    def from_matrix(cls, b: np.ndarray) -> "FactoredBoundaryOperator":
        """Unfactored parameter: ``B1 = I``, ``B2 = B``."""
        return cls(np.eye(2), b)

    @property
    def b(self) -> np.ndarray:
        return self.b1 @ self.b2

    @property
    def is_symmetric(self) -> bool:
        b = self.b
        scale = max(float(np.linalg.norm(b)), 1e-30)
        return bool(np.linalg.norm(b - b.conj().T) <= 1e-14 * scale)


def weyl_of_triple(t: DiscreteTriple, lam: complex) -> tuple:
    """Gamma field and 2x2 Weyl matrix at ``lam``.

    The kernel of ``T - lam`` is spanned by two three-term recursions; the
    gamma field normalizes them so that ``Gamma_0 gamma = I``.  Raises
    :class:`SpectralCollisionError` when the normalization matrix is
    numerically singular (``lam`` at a Neumann eigenvalue).
    """
    basis = np.zeros((t.size, 2), dtype=complex)
    basis[0] = (1.0, 0.0)
    basis[1] = (0.0, 1.0)
    factor = 2.0 - complex(lam) * t.h**2
    for i in range(1, t.size - 1):
        basis[i + 1] = factor * basis[i] - basis[i - 1]
    g0 = np.stack([t.gamma0(basis[:, 0]), t.gamma0(basis[:, 1])], axis=1)
    scale = max(float(np.linalg.norm(g0)), 1e-30)
    if abs(np.linalg.det(g0)) <= 1e-12 * scale**2:
        raise SpectralCollisionError(
            f"Gamma_0 restricted to ker(T - lam) is singular at lam={lam}"
        )
    gamma = basis @ np.linalg.inv(g0)
    m = np.stack([t.gamma1(gamma[:, 0]), t.gamma1(gamma[:, 1])], axis=1)
    return gamma, m


def gamma_adjoint(t: DiscreteTriple, gamma: np.ndarray) -> np.ndarray:
    """Adjoint of the gamma field w.r.t. the weighted interior inner product."""
    return t.h * gamma[1:-1].conj().T


def extension_matrix(t: DiscreteTriple, f: FactoredBoundaryOperator) -> np.ndarray:
    """Interior realization of ``T`` under the constraint ``Gamma_0 = B Gamma_1``.

    The constraint determines the ghost values as ``(I - hB)^(-1)`` applied
    to the first/last interior values; a singular elimination matrix raises
    :class:`ConstraintSingularError`.
    """
    b = f.b
    c = np.eye(2) - t.h * b
    det = np.linalg.det(c)
    if abs(det) <= 1e-13 * max(float(np.linalg.norm(c)) ** 2, 1e-30):
        raise ConstraintSingularError("ghost elimination for Gamma_0 = B Gamma_1 degenerates")
    e = np.linalg.inv(c)
    a = t._dirichlet_base().astype(complex)
    h2 = t.h**2
    a[0, 0] -= e[0, 0] / h2
    a[0, -1] -= e[0, 1] / h2
    a[-1, 0] -= e[1, 0] / h2
    a[-1, -1] -= e[1, 1] / h2
    return a


def _check_off_spectrum(mat: np.ndarray, lam: complex, what: str) -> None:
    eigs = np.linalg.eigvals(mat)
    gap = float(np.min(np.abs(eigs - lam)))
    if gap <= _EIG_TOL:
        raise SpectralCollisionError(f"lam={lam} within {gap:.2e} of an eigenvalue of {what}")


@dataclass
class KreinMatrixReport:
    """Deviations of the dense resolvent difference from the boundary formula."""

    lam: complex
    deviation: float
    deviation_unfactored: float | None
    factored_vs_unfactored: float | None
    min_singular_i_minus_k: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "lambda": [self.lam.real, self.lam.imag],
                "deviation": self.deviation,
                "deviation_unfactored": self.deviation_unfactored,
                "factored_vs_unfactored": self.factored_vs_unfactored,
                "min_singular_i_minus_k": self.min_singular_i_minus_k,
            },
            sort_keys=True,
        )


def verify_krein_matrix(
    t: DiscreteTriple, f: FactoredBoundaryOperator, lam: complex
) -> KreinMatrixReport:
    """Compare dense inverses against the boundary-space correction at ``lam``.

    Evaluates both the factored correction
    ``gamma B1 (1 - B2 M B1)^(-1) B2 gamma*`` and, when ``1 - B M`` is
    invertible, the unfactored variant ``gamma (1 - B M)^(-1) B gamma*``.
    """
    a0 = t.a0_matrix
    ab = extension_matrix(t, f)
    _check_off_spectrum(a0, lam, "the Neumann realization")
    _check_off_spectrum(ab, lam, "the constrained realization")
    gamma, m = weyl_of_triple(t, lam)
    gamma_bar, _ = weyl_of_triple(t, np.conj(lam))
    gstar = gamma_adjoint(t, gamma_bar)
    gint = gamma[1:-1]

    i2 = np.eye(2)
    k = f.b2 @ m @ f.b1
    min_sing = float(np.linalg.svd(i2 - k, compute_uv=False).min())
    if min_sing <= 1e-13:
        raise SpectralCollisionError("1 - B2 M(lam) B1 is numerically singular")
    r0 = np.linalg.inv(a0.astype(complex) - lam * np.eye(t.n))
    rb = np.linalg.inv(ab - lam * np.eye(t.n))
    corr = gint @ f.b1 @ np.linalg.inv(i2 - k) @ f.b2 @ gstar
    deviation = float(np.linalg.norm(rb - r0 - corr, 2))

    dev_unf = None
    agree = None
    ku = f.b @ m
    if float(np.linalg.svd(i2 - ku, compute_uv=False).min()) > 1e-13:
        corr_u = gint @ np.linalg.inv(i2 - ku) @ f.b @ gstar
        dev_unf = float(np.linalg.norm(rb - r0 - corr_u, 2))
        agree = float(np.linalg.norm(corr - corr_u, 2))
    return KreinMatrixReport(complex(lam), deviation, dev_unf, agree, min_sing)


@dataclass
class ConditionReport:
    """Finite-dimensional evaluation of the self-adjointness conditions."""

    lambda0: float
    condition_i: bool
    min_singular: float
    k_eigenvalues: list
    notes: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "lambda0": self.lambda0,
                "condition_i": self.condition_i,
                "min_singular": self.min_singular,
                "k_eigenvalues": [[z.real, z.imag] for z in self.k_eigenvalues],
                "notes": self.notes,
            },
            sort_keys=True,
        )


def check_conditions(
    t: DiscreteTriple, f: FactoredBoundaryOperator, lambda0: float
) -> ConditionReport:
    """Evaluate the boundary-parameter conditions at a real shift.

    Only invertibility of ``1 - B2 M(lambda0) B1`` is observable here; the
    range and domain inclusions hold trivially in finite dimensions and are
    reported as vacuous.
    """
    _, m = weyl_of_triple(t, lambda0)
    k = f.b2 @ m @ f.b1
    min_sing = float(np.linalg.svd(np.eye(2) - k, compute_uv=False).min())
    scale = max(float(np.linalg.norm(k)), 1.0)
    vacuous = "vacuous at finite scale"
    return ConditionReport(
        float(lambda0),
        bool(min_sing > 1e-10 * scale),
        min_sing,
        list(np.linalg.eigvals(k)),
        {
            "ii_range_inclusion": vacuous,
            "iii_b1_range": vacuous,
            "iv_b2_range": vacuous,
            "v_domain": vacuous,
        },
    )


def matrix_to_csv(mat: np.ndarray, path) -> None:
    mat = np.asarray(mat)
    np.savetxt(path, np.column_stack([mat.real.reshape(-1), mat.imag.reshape(-1)]),
               delimiter=",", header=f"shape={mat.shape}", comments="# ")
