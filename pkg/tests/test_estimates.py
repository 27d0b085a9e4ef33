import numpy as np
import pytest
from scipy.integrate import quad

from robinlap import (
    BoundaryGrid,
    ConvergenceError,
    HalfspaceModel,
    IndefiniteSystemError,
    SlabFunction,
    SlabGrid,
    load_coefficient,
    neumann_resolvent,
    krein_resolvent,
)
from robinlap.estimates import (
    absorption_mode_bound,
    boundary_form_value,
    coefficient_power_bound,
    evaluate_slab_function,
    fd_form_dense,
    fd_robin_oracle,
    fd_vs_spectral_error,
    klmn_bound,
    oracle_refinement_study,
    smoothing_admissible,
    sobolev_absorption_constant,
    weyl_smoothing_sweep,
    write_reports_csv,
)
from robinlap.grids import mixed_synthesis

from conftest import random_cosine_field

SINGULAR = "r**(-0.25) * ball(1.0)"


class TestSmoothingSweep:
    def test_l2_endpoint_ratio_is_symbol_maximum(self):
        # p = 2, s = 0: plain L^2 -> L^2 multiplier bound
        rep = weyl_smoothing_sweep(2.0, 0.0, lam=-1.0, grids=(32, 64), samples=40, seed=0)
        assert rep.verdict == "bounded"
        assert max(rep.ratios) <= 1.0 + 1e-12  # max symbol (|xi|^2+1)^(-1/2) = 1

    def test_admissible_pair_is_bounded(self):
        rep = weyl_smoothing_sweep(1.5, 0.5, grids=(32, 64, 128, 256, 512), samples=100, seed=0)
        assert smoothing_admissible(1.5, 0.5, 2)
        assert rep.verdict == "bounded"

    def test_inadmissible_pair_grows(self):
        assert not smoothing_admissible(1.1, 0.95, 2)
        rep = weyl_smoothing_sweep(1.1, 0.95, grids=(32, 64, 128, 256, 512), samples=100, seed=0)
        assert rep.verdict == "growing"

    def test_report_roundtrip(self, tmp_path):
        rep = weyl_smoothing_sweep(1.5, 0.2, grids=(32, 64), samples=20, seed=1)
        assert rep.growth() == rep.ratios[-1] / rep.ratios[0]
        path = tmp_path / "sweep.csv"
        write_reports_csv([rep], path)
        assert len(path.read_text().splitlines()) == 3
        assert "weyl_smoothing" in rep.to_json()

    def test_determinism(self):
        a = weyl_smoothing_sweep(1.5, 0.5, grids=(32, 64), samples=30, seed=5)
        b = weyl_smoothing_sweep(1.5, 0.5, grids=(32, 64), samples=30, seed=5)
        assert a.ratios == b.ratios

    def test_rejects_p_out_of_range(self):
        with pytest.raises(ValueError):
            weyl_smoothing_sweep(2.5, 0.0)


class TestCoefficientPowerBound:
    def test_unit_coefficient_full_power_ratio_at_most_one(self):
        rep = coefficient_power_bound("1.0 + 0.0*x1", p=3.0, t=1.0, grids=(32, 64), samples=40)
        assert rep.verdict == "bounded"
        assert max(rep.ratios) <= 1.0 + 1e-12

    def test_constant_scaling(self):
        c = 3.0
        rep = coefficient_power_bound("3.0 + 0.0*x1", p=3.0, t=1.0, grids=(32,), samples=40)
        assert max(rep.ratios) <= c + 1e-10

    def test_singular_coefficient_two_thirds_power(self):
        rep = coefficient_power_bound(SINGULAR, p=3.0, t=2.0 / 3.0, grids=(64, 128, 256), samples=80)
        assert rep.verdict == "bounded"
        assert rep.extras["q"] == pytest.approx(4.5)
        lq = rep.extras["singular_part_lq_norms"]
        assert all(np.isfinite(lq))
        # |alpha|^(2/3) = r^(-1/6) on the ball: its 4.5-th power integrates to
        # a finite limit (one-dimensional quadrature oracle)
        expected, _ = quad(lambda t_: t_ ** (-0.75), 0.0, 1.0)
        full = []
        for n_side in (64, 128, 256):
            grid = BoundaryGrid(2, n_side, 2.0 * np.pi)
            alpha = load_coefficient(SINGULAR, grid, p=3.0)
            power = np.abs(alpha.samples) ** (2.0 / 3.0)
            full.append(grid.node_weight * np.sum(power**4.5))
        assert abs(full[-1] - 2.0 * expected) <= 0.35 * 2.0 * expected
        assert abs(full[-1] - 2.0 * expected) < abs(full[0] - 2.0 * expected)


class TestAbsorptionConstant:
    def test_s_zero_needs_constant_one(self):
        rep = sobolev_absorption_constant(0.0, 0.5, grids=((32, 32),), trials=40)
        assert rep.ratios[0] <= 1.0 + 1e-12
        assert rep.ratios[0] >= 0.9  # attained by the ground mode

    def test_mode_bound_closed_form(self):
        assert absorption_mode_bound(0.0, 1.0) == 1.0
        assert absorption_mode_bound(0.5, 0.6) == 1.0  # eps >= s: flat maximum
        val = absorption_mode_bound(0.5, 0.1)
        e_star = 24.0
        assert val == pytest.approx((1 + e_star) ** 0.5 - 0.1 * e_star)

    def test_reported_constant_below_mode_bound_and_stable(self):
        rep = sobolev_absorption_constant(
            0.5, 0.1, grids=((64, 64), (128, 128), (256, 256)), trials=100, seed=0
        )
        bound = rep.extras["mode_bound"]
        assert all(c <= bound + 1e-9 for c in rep.ratios)
        assert max(rep.ratios) / min(rep.ratios) <= 1.1  # stable within 10%
        assert rep.verdict == "bounded"

    def test_high_mode_constant_saturates(self):
        # single high modes require only a finite constant: the gradient term
        # absorbs the fractional norm growth for s < 1
        rep = sobolev_absorption_constant(0.8, 0.05, grids=((32, 64),), trials=60)
        assert rep.ratios[0] <= absorption_mode_bound(0.8, 0.05) + 1e-9


class TestKlmnBound:
    def test_zero_coefficient(self):
        rep = klmn_bound("0.0*x1", p=3.0, grids=((16, 16), (32, 32)), trials=40)
        assert rep.a == 0.0 and rep.b < 1.0
        assert rep.verdict == "ok"

    def test_constant_coefficient_frontier_decreasing(self):
        rep = klmn_bound("2.0 + 0.0*x1", p=3.0, grids=((16, 16), (32, 32)), trials=60)
        a_values = [a for _, a in rep.frontier]
        assert all(x >= y - 1e-12 for x, y in zip(a_values, a_values[1:]))
        assert a_values[0] > 0.0
        assert rep.verdict == "ok"

    def test_gap_coefficient_form_ok_but_not_theorem(self):
        with pytest.warns(UserWarning, match="outside the admissible range"):
            rep = klmn_bound(
                "r**(-0.78) * ball(1.0)", p=2.5, grids=((16, 16), (32, 32)), d=3, trials=60
            )
        assert rep.verdict == "ok"
        assert rep.b < 1.0
        assert rep.admissible_form
        assert not rep.admissible_theorem

    def test_boundary_form_value_matches_quadrature(self, slab, rng):
        alpha = load_coefficient("1.0 + 0.5*cos(x1)", slab.boundary, p=3.0)
        f = random_cosine_field(slab, rng)
        from robinlap.halfspace import traces

        tau_d, _ = traces(f)
        direct = slab.boundary.node_weight * np.sum(
            alpha.samples * np.abs(tau_d.values) ** 2
        )
        assert boundary_form_value(alpha, f) == pytest.approx(direct.real)


class TestFdOracle:
    def test_matches_neumann_resolvent_without_coefficient(self, rng):
        grid = BoundaryGrid(2, 32, 2.0 * np.pi)
        lam = -2.0
        errors = []
        for nz in (32, 64, 128):
            slab = SlabGrid(grid, np.pi, 32)
            model = HalfspaceModel(slab)
            alpha = load_coefficient("0.0*x1", grid, p=3.0)
            h = random_cosine_field(slab, np.random.default_rng(0), decay=2.0)
            u = neumann_resolvent(lam, h, model)
            fd = fd_robin_oracle(alpha, slab, lam, h, nz=nz)
            errors.append(fd_vs_spectral_error(u, fd))
        assert errors[0] > errors[1] > errors[2]
        order = np.log2(errors[0] / errors[2]) / 2.0
        assert order >= 1.8  # second-order stencil

    def test_constant_coefficient_converges_to_mode_solution(self):
        grid = BoundaryGrid(2, 32, 2.0 * np.pi)
        slab = SlabGrid(grid, np.pi, 32)
        model = HalfspaceModel(slab)
        alpha = load_coefficient("1.0 + 0.0*x1", grid, p=3.0)
        lam = -4.0
        h = random_cosine_field(slab, np.random.default_rng(1), decay=2.0)
        reference = krein_resolvent(lam, h, alpha, model, tol=1e-12).u
        errors = []
        for nz in (32, 64, 128, 256):
            fd = fd_robin_oracle(alpha, slab, lam, h, nz=nz)
            errors.append(fd_vs_spectral_error(reference, fd))
        ratios = [a / b for a, b in zip(errors, errors[1:])]
        assert all(r >= 2.0 for r in ratios)

    def test_oracle_is_self_adjoint(self, rng):
        grid = BoundaryGrid(2, 16, 2.0 * np.pi)
        slab = SlabGrid(grid, np.pi, 16)
        alpha = load_coefficient(SINGULAR, grid, p=3.0)
        lam = -8.0
        h = random_cosine_field(slab, rng, decay=1.5)
        g = random_cosine_field(slab, rng, decay=1.5)
        fd_h = fd_robin_oracle(alpha, slab, lam, h, nz=24, rtol=1e-13)
        fd_g = fd_robin_oracle(alpha, slab, lam, g, nz=24, rtol=1e-13)
        w = np.full(fd_h.z_nodes.size, fd_h.z_nodes[1])
        w[0] *= 0.5
        w[-1] *= 0.5
        hv = evaluate_slab_function(h, fd_h.z_nodes)
        gv = evaluate_slab_function(g, fd_g.z_nodes)
        weight = grid.node_weight * w
        lhs = np.sum(weight * fd_h.node_values * np.conj(gv))
        rhs = np.sum(weight * hv * np.conj(fd_g.node_values))
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)

    def test_full_fd_variant_close_to_mixed(self, rng):
        grid = BoundaryGrid(2, 64, 2.0 * np.pi)
        slab = SlabGrid(grid, np.pi, 32)
        alpha = load_coefficient("1.0 + 0.0*x1", grid, p=3.0)
        h = random_cosine_field(slab, rng, decay=2.0)
        a = fd_robin_oracle(alpha, slab, -4.0, h, nz=64, full_fd=False)
        b = fd_robin_oracle(alpha, slab, -4.0, h, nz=64, full_fd=True)
        rel = np.linalg.norm(a.node_values - b.node_values) / np.linalg.norm(a.node_values)
        assert rel <= 0.05  # differ only by the boundary-direction stencil error

    def test_indefinite_shift_detected(self, rng):
        grid = BoundaryGrid(2, 16, 2.0 * np.pi)
        slab = SlabGrid(grid, np.pi, 16)
        alpha = load_coefficient("0.0*x1", grid, p=3.0)
        h = random_cosine_field(slab, rng)
        with pytest.raises(IndefiniteSystemError):
            fd_robin_oracle(alpha, slab, 10.0, h)

    def test_nonconvergence_reported(self, rng):
        grid = BoundaryGrid(2, 16, 2.0 * np.pi)
        slab = SlabGrid(grid, np.pi, 16)
        alpha = load_coefficient(SINGULAR, grid, p=3.0)
        h = random_cosine_field(slab, rng)
        with pytest.raises(ConvergenceError):
            fd_robin_oracle(alpha, slab, -4.0, h, max_iter=1, rtol=1e-14)

    def test_form_matrix_positive_definite_at_certified_shift(self, rng):
        from robinlap import find_lambda0

        grid = BoundaryGrid(2, 16, 2.0 * np.pi)
        slab = SlabGrid(grid, np.pi, 16)
        model = HalfspaceModel(slab)
        alpha = load_coefficient(SINGULAR, grid, p=3.0)
        lam0 = find_lambda0(alpha, model, seed=0)
        mat = fd_form_dense(alpha, slab, lam0, nz=16)
        herm = (mat + mat.conj().T) / 2.0
        np.linalg.cholesky(herm)  # raises if not positive definite


class TestRefinementStudy:
    def test_singular_coefficient_error_halves(self):
        def forcing(x, z):
            return np.exp(-(x**2 + (z - 1.0) ** 2))

        rows = oracle_refinement_study(SINGULAR, p=3.0, forcing=forcing, Ns=(64, 128, 256))
        errors = [r["error"] for r in rows]
        assert all(a / b >= 2.0 for a, b in zip(errors, errors[1:]))
