"""Empirical verification of the mapping estimates and an independent oracle.

Sup ratios over finite families of seeded test functions underestimate true
operator norms, so sweeps report growth trends across grid refinements
rather than absolute constants: a quantity is judged "bounded" when its
per-grid supremum grows by at most a configurable factor over the grid list.
Test families mix periodized Gaussian bumps (down to two-node width, which
is what drives growth in the inadmissible regimes), pure modes and random
band-limited noise.

The finite-difference Robin oracle discretizes the quadratic form

    a[f] = ||grad f||^2 - int alpha |tau_D f|^2

with a second-order stencil and trapezoid weights in the normal direction
(nodes including the boundary) and Fourier calculus along the boundary, then
solves the shifted form system by preconditioned CG.  It shares no code path
with the boundary-correction solver beyond the lattice itself.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import LinearOperator, lgmres

from .errors import ConvergenceError, IndefiniteSystemError
from .grids import (
    BoundaryGrid,
    GridFunction,
    SlabFunction,
    SlabGrid,
    cosine_analysis,
    forward_transform,
    grad_norm_sq,
    inverse_transform,
    mixed_synthesis,
    norm,
    slab_norm,
)
from .halfspace import HalfspaceModel, traces
from .multipliers import apply_multiplier, weyl_symbol
from .robin import (
    RobinCoefficient,
    find_lambda0,
    form_admissible,
    krein_resolvent,
    load_coefficient,
    split_lp_linf,
    theorem_admissible,
)


# ---------------------------------------------------------------------------
# reports


@dataclass
class SweepReport:
    """Per-grid supremum ratios for one parameter tuple."""

    name: str
    params: dict
    grids: list
    ratios: list
    verdict: str
    samples: int
    extras: dict = field(default_factory=dict)

    def growth(self) -> float:
        return float(self.ratios[-1] / self.ratios[0])

    def to_json(self) -> str:
        return json.dumps(
            {
                "name": self.name,
                "params": self.params,
                "grids": list(self.grids),
                "ratios": list(self.ratios),
                "verdict": self.verdict,
                "samples": self.samples,
                "extras": self.extras,
            },
            sort_keys=True,
        )

    def csv_rows(self) -> list:
        rows = []
        for g, r in zip(self.grids, self.ratios):
            rows.append({"name": self.name, "grid": g, "sup_ratio": repr(float(r)), "verdict": self.verdict})
        return rows


def write_reports_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["name", "grid", "sup_ratio", "verdict"])
        writer.writeheader()
        for rep in reports:
            for row in rep.csv_rows():
                writer.writerow(row)


# ---------------------------------------------------------------------------
# seeded test families


def _periodized_bump(grid: BoundaryGrid, center, width: float) -> np.ndarray:
    mesh = grid.node_mesh()
    rsq = np.zeros(grid.shape)
    for ax, m in enumerate(mesh):
        dx = np.mod(m - center[ax] + grid.L / 2.0, grid.L) - grid.L / 2.0
        rsq = rsq + dx**2
    return np.exp(-rsq / (2.0 * width**2)).astype(complex)


def boundary_test_family(grid: BoundaryGrid, count: int, rng) -> list:
    """Mixture family: grid-scale bumps first, then random bumps/modes/noise."""
    fams = []
    h = grid.h
    for width in (2.0 * h, 3.0 * h, 5.0 * h):
        fams.append(_periodized_bump(grid, (0.0,) * grid.ndim, width))
    while len(fams) < count:
        kind = rng.integers(0, 3)
        if kind == 0:
            width = float(np.exp(rng.uniform(np.log(2.0 * h), np.log(grid.L / 8.0))))
            center = rng.uniform(-grid.L / 2.0, grid.L / 2.0, size=grid.ndim)
            amp = 1.0 + 2.0 * rng.random()
            fams.append(amp * _periodized_bump(grid, center, width))
        elif kind == 1:
            k = rng.integers(0, grid.N // 2, size=grid.ndim)
            mesh = grid.node_mesh()
            phase = sum((2.0 * np.pi / grid.L) * k[ax] * mesh[ax] for ax in range(grid.ndim))
            fams.append(np.exp(1j * phase))
        else:
            decay = rng.uniform(0.5, 2.0)
            coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
            coeffs = coeffs / (1.0 + grid.xi_sq) ** decay
            fams.append(inverse_transform(grid, coeffs))
    return fams[:count]


def slab_test_family(slab: SlabGrid, count: int, rng) -> list:
    """Band-limited slab fields probing all frequency scales.

    Deterministic members first: a ladder of pure modes covering the
    eigenvalue range logarithmically (these attain per-mode suprema sharply
    and reproducibly across grids) and boundary-layer profiles
    ``exp(-kappa z)`` with large traces relative to their bulk norm.  The
    remainder are random fields with decaying mixed coefficients.
    """
    fields = []
    bdry = slab.boundary
    mu_max = slab.mu[-1]

    def pure_mode(k_idx):
        coeffs = np.zeros(bdry.shape + (slab.Nd,), dtype=complex)
        coeffs.reshape(-1, slab.Nd)[0, k_idx] = 1.0
        return SlabFunction.from_cosine(slab, mixed_synthesis(slab, coeffs))

    ladder = set(range(1, min(9, slab.Nd))) | {
        int(np.clip(round(v), 1, slab.Nd - 1)) for v in np.geomspace(8.0, slab.Nd - 1, 10)
    }
    for k_idx in sorted(ladder):
        fields.append(pure_mode(k_idx))
    fields.append(pure_mode(0))
    # boundary layers: trace-heavy profiles with controlled gradient energy
    x_axis = bdry.axis_nodes
    kappa_max = 0.25 * slab.Nd * np.pi / slab.H
    for kappa in np.geomspace(0.5, max(kappa_max, 1.0), 6):
        profile = np.exp(-kappa * slab.z_nodes)
        for mode in (0, bdry.N // 4):
            wave = np.exp(1j * mode * (2.0 * np.pi / bdry.L) * x_axis)
            values = wave.reshape((-1,) + (1,) * (bdry.ndim - 1) + (1,)) * profile
            fields.append(SlabFunction.from_cosine(slab, np.broadcast_to(values, slab.shape).copy()))
    while len(fields) < count:
        decay = rng.uniform(0.4, 1.5)
        coeffs = rng.standard_normal(bdry.shape + (slab.Nd,)) + 1j * rng.standard_normal(
            bdry.shape + (slab.Nd,)
        )
        weight = (1.0 + bdry.xi_sq[..., None] + slab.mu) ** decay
        fields.append(SlabFunction.from_cosine(slab, mixed_synthesis(slab, coeffs / weight)))
    return fields[:count]


# ---------------------------------------------------------------------------
# smoothing of the Neumann-to-Dirichlet multiplier


def smoothing_admissible(p: float, s: float, d: int) -> bool:
    """The L^p -> H^s mapping inequality for the boundary multiplier."""
    return s < 1.0 - (d - 1) * (1.0 / p - 0.5)


def weyl_smoothing_sweep(
    p: float,
    s: float,
    lam: complex = -1.0,
    grids=(64, 128, 256),
    d: int = 2,
    L: float = 2.0 * np.pi,
    samples: int = 100,
    seed: int = 0,
    growth_threshold: float = 2.0,
) -> SweepReport:
    """Sup of ``||M(lam) phi||_{H^s} / ||phi||_{L^p}`` across grid refinements."""
    if not 1.0 <= p <= 2.0:
        raise ValueError("the L^p -> H^s sweep needs p in [1, 2]")
    ratios = []
    for n_side in grids:
        grid = BoundaryGrid(d, n_side, L)
        mult = weyl_symbol(lam, grid, "halfspace")
        rng = np.random.default_rng(seed)
        sup = 0.0
        for values in boundary_test_family(grid, samples, rng):
            phi = GridFunction(grid, values)
            denominator = norm(phi, "Lp", p=p)
            if denominator < 1e-14:
                continue
            sup = max(sup, norm(apply_multiplier(mult, phi), "Hs", s=s) / denominator)
        ratios.append(sup)
    verdict = "bounded" if ratios[-1] / ratios[0] <= growth_threshold else "growing"
    return SweepReport(
        "weyl_smoothing",
        {"p": p, "s": s, "lambda": [complex(lam).real, complex(lam).imag], "d": d, "L": L},
        list(grids),
        ratios,
        verdict,
        samples,
        {"admissible": smoothing_admissible(p, s, d)},
    )


# ---------------------------------------------------------------------------
# powers of the coefficient against Sobolev norms


def coefficient_power_bound(
    spec,
    p: float,
    t: float,
    grids=(64, 128, 256),
    d: int = 2,
    L: float = 2.0 * np.pi,
    samples: int = 100,
    seed: int = 0,
    growth_threshold: float = 2.0,
) -> SweepReport:
    """Sup of ``|||alpha|^t phi||_2 / ||phi||_{H^{t(d-1)/p}}`` across grids.

    Also records the node-quadrature ``L^{p/t}`` norm of the singular part of
    ``|alpha|^t`` per grid, which should stabilize under refinement when the
    claimed integrability holds.
    """
    if p <= 2.0:
        raise ValueError("the power bound needs p > 2")
    s_target = t * (d - 1) / p
    ratios = []
    lq_norms = []
    for n_side in grids:
        grid = BoundaryGrid(d, n_side, L)
        alpha = load_coefficient(spec, grid, p, t)
        power = np.abs(alpha.samples) ** t
        sing, _, _ = split_lp_linf(power, alpha.split_quantile)
        lq = (grid.node_weight * np.sum(np.abs(sing) ** (p / t))) ** (t / p)
        lq_norms.append(float(lq))
        rng = np.random.default_rng(seed)
        sup = 0.0
        for values in boundary_test_family(grid, samples, rng):
            phi = GridFunction(grid, values)
            denominator = norm(phi, "Hs", s=s_target)
            if denominator < 1e-14:
                continue
            weighted = GridFunction(grid, power * values)
            sup = max(sup, norm(weighted, "L2") / denominator)
        ratios.append(sup)
    verdict = "bounded" if ratios[-1] / max(ratios[0], 1e-30) <= growth_threshold else "growing"
    return SweepReport(
        "coefficient_power_bound",
        {"p": p, "t": t, "s": s_target, "d": d, "L": L},
        list(grids),
        ratios,
        verdict,
        samples,
        {"singular_part_lq_norms": lq_norms, "q": p / t},
    )


# ---------------------------------------------------------------------------
# gradient absorption of fractional norms on the slab


def absorption_mode_bound(s: float, eps: float) -> float:
    """Closed-form constant: ``max_E (1+E)^s - eps E`` over ``E >= 0``."""
    if s <= 0.0:
        return 1.0
    if eps >= s:
        return 1.0
    e_star = (s / eps) ** (1.0 / (1.0 - s)) - 1.0
    return float((1.0 + e_star) ** s - eps * e_star)


def sobolev_absorption_constant(
    s: float,
    eps: float,
    grids=((64, 64), (128, 128), (256, 256)),
    d: int = 2,
    L: float = 2.0 * np.pi,
    H: float = np.pi,
    trials: int = 100,
    seed: int = 0,
    growth_threshold: float = 1.5,
) -> SweepReport:
    """Minimal constant C with ``||f||_{H^s}^2 <= eps ||grad f||^2 + C ||f||^2``.

    Reported per grid as the max over seeded band-limited trial fields; the
    spectral surrogate makes the per-mode closed form
    :func:`absorption_mode_bound` an upper envelope.
    """
    if not 0.0 <= s < 1.0:
        raise ValueError("absorption estimate needs s in [0, 1)")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    constants = []
    for n_side, nd in grids:
        slab = SlabGrid(BoundaryGrid(d, n_side, L), H, nd)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for f in slab_test_family(slab, trials, rng):
            l2 = slab_norm(f)
            if l2 < 1e-14:
                continue
            hs = norm(f, "Hs", s=s)
            needed = (hs**2 - eps * grad_norm_sq(f)) / l2**2
            worst = max(worst, needed)
        constants.append(float(max(worst, 0.0)))
    verdict = (
        "bounded" if constants[-1] / max(constants[0], 1e-30) <= growth_threshold else "growing"
    )
    return SweepReport(
        "sobolev_absorption",
        {"s": s, "eps": eps, "d": d, "L": L, "H": H},
        [g[0] for g in grids],
        constants,
        verdict,
        trials,
        {"mode_bound": absorption_mode_bound(s, eps)},
    )


# ---------------------------------------------------------------------------
# relative form bound (KLMN frontier)


@dataclass
class KlmnReport:
    """Empirical frontier of ``|t[f]| <= a ||f||^2 + b a[f]`` fits."""

    a: float
    b: float
    frontier: list
    per_grid: dict
    grids: list
    verdict: str
    admissible_form: bool
    admissible_theorem: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "a": self.a,
                "b": self.b,
                "frontier": self.frontier,
                "per_grid": {str(k): v for k, v in self.per_grid.items()},
                "grids": self.grids,
                "verdict": self.verdict,
                "admissible_form": self.admissible_form,
                "admissible_theorem": self.admissible_theorem,
            },
            sort_keys=True,
        )


def boundary_form_value(alpha: RobinCoefficient, f: SlabFunction) -> float:
    """The boundary form ``int alpha |tau_D f|^2`` by node quadrature."""
    tau_d, _ = traces(f)
    grid = alpha.grid
    return float(np.real(grid.node_weight * np.sum(alpha.samples * np.abs(tau_d.values) ** 2)))


def klmn_bound(
    spec,
    p: float,
    grids=((32, 32), (64, 64)),
    d: int = 2,
    L: float = 2.0 * np.pi,
    H: float = np.pi,
    trials: int = 100,
    b_grid=(0.1, 0.25, 0.5, 0.75, 0.9),
    headline_b: float = 0.5,
    seed: int = 0,
    growth_threshold: float = 2.0,
) -> KlmnReport:
    """Empirical Pareto frontier ``a(b)`` of the relative form bound.

    For each relative weight ``b < 1`` the reported ``a`` is the smallest
    constant fitting all sampled fields on that grid; the fit passes when
    ``a`` at the headline ``b`` is stable under refinement.
    """
    per_grid = {b: [] for b in b_grid}
    for n_side, nd in grids:
        slab = SlabGrid(BoundaryGrid(d, n_side, L), H, nd)
        alpha = load_coefficient(spec, slab.boundary, p)
        rng = np.random.default_rng(seed)
        samples = []
        for f in slab_test_family(slab, trials, rng):
            l2sq = slab_norm(f) ** 2
            if l2sq < 1e-20:
                continue
            samples.append((abs(boundary_form_value(alpha, f)), grad_norm_sq(f), l2sq))
        for b in b_grid:
            a_needed = max((max(tv - b * gr, 0.0) / l2 for tv, gr, l2 in samples), default=0.0)
            per_grid[b].append(float(a_needed))
    frontier = [[float(b), per_grid[b][-1]] for b in b_grid]
    a_series = per_grid[headline_b]
    stable = a_series[-1] <= growth_threshold * max(a_series[0], 1e-30) or a_series[-1] < 1e-12
    return KlmnReport(
        a=a_series[-1],
        b=float(headline_b),
        frontier=frontier,
        per_grid=per_grid,
        grids=[g[0] for g in grids],
        verdict="ok" if stable else "unstable",
        admissible_form=form_admissible(p, d),
        admissible_theorem=theorem_admissible(p, d),
    )


# ---------------------------------------------------------------------------
# finite-difference Robin oracle


class _TridiagFactor:
    """Batched LU factorization of tridiagonal systems (Thomas algorithm)."""

    def __init__(self, lower, diag, upper):
        lower = np.asarray(lower, dtype=complex)
        diag = np.asarray(diag, dtype=complex)
        upper = np.asarray(upper, dtype=complex)
        m = diag.shape[-1]
        self.upper = upper
        self.denoms = np.empty_like(diag)
        self.mults = np.empty_like(lower)
        self.denoms[..., 0] = diag[..., 0]
        for j in range(1, m):
            self.mults[..., j - 1] = lower[..., j - 1] / self.denoms[..., j - 1]
            self.denoms[..., j] = diag[..., j] - self.mults[..., j - 1] * upper[..., j - 1]

    def solve(self, b):
        b = np.asarray(b, dtype=complex)
        m = b.shape[-1]
        y = np.empty_like(b)
        y[..., 0] = b[..., 0]
        for j in range(1, m):
            y[..., j] = b[..., j] - self.mults[..., j - 1] * y[..., j - 1]
        x = np.empty_like(b)
        x[..., m - 1] = y[..., m - 1] / self.denoms[..., m - 1]
        for j in range(m - 2, -1, -1):
            x[..., j] = (y[..., j] - self.upper[..., j] * x[..., j + 1]) / self.denoms[..., j]
        return x


@dataclass
class FdSolution:
    """Finite-difference solve output on its own normal-direction nodes."""

    slab: SlabGrid
    z_nodes: np.ndarray
    node_values: np.ndarray
    field: SlabFunction
    iterations: int


class _FdRobinSystem:
    """Symmetrized form system ``(a_alpha - lam) u = h`` on the tensor mesh."""

    def __init__(self, alpha: RobinCoefficient, slab: SlabGrid, lam: complex, nz: int, full_fd: bool):
        self.alpha = alpha
        self.slab = slab
        self.lam = complex(lam)
        self.nz = nz
        bdry = slab.boundary
        self.delta = slab.H / nz
        self.z_nodes = self.delta * np.arange(nz + 1)
        w = np.full(nz + 1, self.delta)
        w[0] = w[-1] = self.delta / 2.0
        self.weights = w
        self.sqrt_w = np.sqrt(w)
        # symmetrized second-difference coefficients in the normal direction
        stiff_diag = np.full(nz + 1, 2.0 / self.delta)
        stiff_diag[0] = stiff_diag[-1] = 1.0 / self.delta
        self.z_diag = stiff_diag / w
        self.z_off = -1.0 / (self.delta * self.sqrt_w[:-1] * self.sqrt_w[1:])
        if full_fd:
            h = bdry.h
            self.xsymbol = sum(
                (2.0 - 2.0 * np.cos(m * h)) / h**2 for m in bdry.freq_mesh()
            ).astype(complex)
        else:
            self.xsymbol = bdry.xi_sq.astype(complex)
        self.alpha_scaled = alpha.samples / w[0]

    def matvec(self, u):
        out = self.z_diag * u
        out[..., :-1] += self.z_off * u[..., 1:]
        out[..., 1:] += self.z_off * u[..., :-1]
        uhat = forward_transform(self.slab.boundary, u)
        out += inverse_transform(self.slab.boundary, self.xsymbol[..., None] * uhat)
        out[..., 0] -= self.alpha_scaled * u[..., 0]
        return out - self.lam * u

    def preconditioner(self) -> _TridiagFactor:
        shape = self.slab.boundary.shape + (self.nz + 1,)
        diag = np.broadcast_to(self.z_diag, shape).astype(complex).copy()
        diag += self.xsymbol[..., None] - self.lam
        off = np.broadcast_to(self.z_off, self.slab.boundary.shape + (self.nz,)).astype(complex)
        return _TridiagFactor(off, diag, off)

    def solve(self, rhs, rtol: float, max_iter: int):
        """Preconditioned CG in frequency space for real shifts, LGMRES otherwise."""
        factor = self.preconditioner()
        bdry = self.slab.boundary

        def apply_m(v):
            vhat = forward_transform(bdry, v)
            return inverse_transform(bdry, factor.solve(vhat))

        if self.lam.imag == 0.0:
            return self._pcg(rhs, apply_m, rtol, max_iter)
        return self._lgmres(rhs, apply_m, rtol, max_iter)

    def _pcg(self, b, apply_m, rtol, max_iter):
        bnorm = np.linalg.norm(b.ravel())
        if bnorm == 0.0:
            return np.zeros_like(b), 0
        x = np.zeros_like(b)
        r = b.copy()
        z = apply_m(r)
        pvec = z.copy()
        rz = np.vdot(r.ravel(), z.ravel())
        for it in range(1, max_iter + 1):
            ap = self.matvec(pvec)
            pap = np.vdot(pvec.ravel(), ap.ravel())
            if pap.real <= 0.0:
                raise IndefiniteSystemError(
                    f"form system is not positive definite at lam={self.lam}"
                )
            step = rz / pap
            x = x + step * pvec
            r = r - step * ap
            rnorm = np.linalg.norm(r.ravel())
            if rnorm <= rtol * bnorm:
                return x, it
            z = apply_m(r)
            rz_new = np.vdot(r.ravel(), z.ravel())
            pvec = z + (rz_new / rz) * pvec
            rz = rz_new
        raise ConvergenceError(
            f"form-method CG stalled at relative residual {rnorm / bnorm:.3e}",
            residuals=[float(rnorm / bnorm)],
        )

    def _lgmres(self, b, apply_m, rtol, max_iter):
        shape = b.shape
        n = b.size

        def mv(x):
            return self.matvec(x.reshape(shape)).reshape(-1)

        def pv(x):
            return apply_m(x.reshape(shape)).reshape(-1)

        a_op = LinearOperator((n, n), matvec=mv, dtype=complex)
        m_op = LinearOperator((n, n), matvec=pv, dtype=complex)
        x, info = lgmres(a_op, b.reshape(-1), M=m_op, rtol=rtol, atol=0.0, maxiter=max_iter)
        resid = np.linalg.norm(b.reshape(-1) - a_op @ x) / np.linalg.norm(b.reshape(-1))
        if info != 0 or resid > 10 * rtol:
            raise ConvergenceError(
                f"form-method LGMRES stalled at relative residual {resid:.3e}",
                residuals=[float(resid)],
            )
        return x.reshape(shape), max_iter if info else 1


def evaluate_slab_function(u: SlabFunction, z: np.ndarray) -> np.ndarray:
    """Evaluate the cosine interpolant plus layers at arbitrary heights."""
    slab = u.grid
    z = np.asarray(z, dtype=float)
    a = cosine_analysis(slab, u.cosine_values())
    cosmat = np.cos(np.outer(np.arange(slab.Nd) * np.pi / slab.H, z))
    out = np.tensordot(a, cosmat, axes=([-1], [0]))
    for lay in u.layers:
        prof = lay.profile(z)
        out = out + inverse_transform(slab.boundary, lay.amps[..., None] * prof)
    return out


def fd_robin_oracle(
    alpha: RobinCoefficient,
    slab: SlabGrid,
    lam: complex,
    h: SlabFunction,
    nz: int | None = None,
    rtol: float = 1e-12,
    max_iter: int = 4000,
    full_fd: bool = False,
) -> FdSolution:
    """Robin resolvent through the quadratic form on a finite-difference mesh.

    Independent of the boundary-correction route; used as its oracle.  The
    returned ``field`` resamples the node solution onto the slab collocation
    lattice with a cubic spline (order-4 interpolation, below the order-2
    scheme error).
    """
    if nz is None:
        nz = slab.Nd
    system = _FdRobinSystem(alpha, slab, lam, nz, full_fd)
    h_nodes = evaluate_slab_function(h, system.z_nodes)
    rhs = system.sqrt_w * h_nodes
    solution_tilde, iterations = system.solve(rhs, rtol, max_iter)
    node_values = solution_tilde / system.sqrt_w
    spline = CubicSpline(system.z_nodes, node_values, axis=-1)
    field = SlabFunction.from_cosine(slab, spline(slab.z_nodes))
    return FdSolution(slab, system.z_nodes, node_values, field, iterations)


def fd_vs_spectral_error(u: SlabFunction, fd: FdSolution) -> float:
    """Relative weighted L^2 difference on the oracle's normal-direction nodes."""
    uv = evaluate_slab_function(u, fd.z_nodes)
    w = np.full(fd.z_nodes.size, fd.z_nodes[1] - fd.z_nodes[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    diff = uv - fd.node_values
    num = np.sqrt(np.sum(w * np.abs(diff) ** 2))
    den = np.sqrt(np.sum(w * np.abs(fd.node_values) ** 2))
    return float(num / max(den, 1e-300))


def fd_form_dense(alpha: RobinCoefficient, slab: SlabGrid, lam: complex, nz: int) -> np.ndarray:
    """Dense symmetrized form matrix (small sizes only), for definiteness checks."""
    system = _FdRobinSystem(alpha, slab, lam, nz, full_fd=False)
    shape = slab.boundary.shape + (nz + 1,)
    n = int(np.prod(shape))
    if n > 6000:
        raise ValueError(f"dense form matrix refused for size {n}")
    mat = np.zeros((n, n), dtype=complex)
    basis = np.zeros(shape, dtype=complex)
    flat = basis.reshape(-1)
    for j in range(n):
        flat[j] = 1.0
        mat[:, j] = system.matvec(basis).reshape(-1)
        flat[j] = 0.0
    return mat


def oracle_refinement_study(
    spec,
    p: float,
    forcing,
    Ns=(128, 256, 512),
    lam: float | None = None,
    d: int = 2,
    L: float = 2.0 * np.pi,
    H: float = np.pi,
    seed: int = 0,
    solver_tol: float = 1e-11,
) -> list:
    """Rows ``{N, Nd, lambda, error, ratio}`` comparing both Robin solvers.

    The shift defaults to the certified contraction shift computed on the
    finest grid and is held fixed across resolutions.
    """
    if lam is None:
        finest = SlabGrid(BoundaryGrid(d, max(Ns), L), H, max(Ns))
        alpha_fine = load_coefficient(spec, finest.boundary, p)
        lam = find_lambda0(alpha_fine, HalfspaceModel(finest), seed=seed)
    rows = []
    prev = None
    for n_side in Ns:
        slab = SlabGrid(BoundaryGrid(d, n_side, L), H, n_side)
        model = HalfspaceModel(slab)
        alpha = load_coefficient(spec, slab.boundary, p)
        h_field = SlabFunction.from_cosine(slab, _sample_forcing(forcing, slab))
        result = krein_resolvent(lam, h_field, alpha, model, tol=solver_tol, lambda0=lam)
        fd = fd_robin_oracle(alpha, slab, lam, h_field)
        err = fd_vs_spectral_error(result.u, fd)
        rows.append(
            {
                "N": n_side,
                "Nd": n_side,
                "lambda": float(lam),
                "error": err,
                "ratio": (prev / err) if prev is not None else float("nan"),
            }
        )
        prev = err
    return rows


def _sample_forcing(forcing, slab: SlabGrid) -> np.ndarray:
    if callable(forcing):
        mesh = slab.boundary.node_mesh()
        broad = [m[..., None] for m in mesh]
        return np.asarray(forcing(*broad, slab.z_nodes), dtype=complex)
    return np.asarray(forcing, dtype=complex)
