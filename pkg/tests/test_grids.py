import numpy as np
import pytest

from robinlap import (
    BoundaryGrid,
    GridFunction,
    SlabFunction,
    SlabGrid,
    dft,
    grad_norm_sq,
    load_binary,
    load_csv,
    norm,
    save_binary,
    save_csv,
    save_slab_slices,
    slab_inner,
    slab_norm,
)
from robinlap.grids import LayerPart, cosine_analysis, cosine_synthesis, mixed_synthesis

from conftest import random_boundary_function, random_cosine_field


class TestBoundaryGrid:
    def test_integer_frequencies_for_2pi_box(self):
        grid = BoundaryGrid(2, 8, 2.0 * np.pi)
        k = np.sort(grid.axis_freqs)
        assert np.allclose(k, np.arange(-4, 4))

    def test_3d_grid_node_count_and_spacing(self):
        grid = BoundaryGrid(3, 4, 1.0)
        assert grid.node_count == 16
        assert np.isclose(grid.axis_freqs[1] - grid.axis_freqs[0], 2.0 * np.pi)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            BoundaryGrid(2, 6, 1.0)

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            BoundaryGrid(4, 8, 1.0)

    def test_rejects_nonpositive_box(self):
        with pytest.raises(ValueError):
            BoundaryGrid(2, 8, 0.0)


class TestTransforms:
    def test_round_trip_many_random(self, bgrid, rng):
        for _ in range(100):
            f = random_boundary_function(bgrid, rng)
            back = dft(dft(f, "forward"), "inverse")
            assert norm(back - f) <= 1e-13 * norm(f)

    def test_parseval(self, bgrid, rng):
        for _ in range(20):
            f = random_boundary_function(bgrid, rng)
            assert abs(norm(dft(f)) - norm(f)) <= 1e-12 * norm(f)

    def test_constant_concentrates_at_zero_mode(self, bgrid):
        f = GridFunction(bgrid, np.ones(bgrid.shape))
        coeffs = dft(f).values
        mass = np.abs(coeffs) ** 2
        assert mass.reshape(-1)[0] / mass.sum() > 1.0 - 1e-14

    def test_pure_mode_single_coefficient(self, bgrid):
        x = bgrid.axis_nodes
        f = GridFunction(bgrid, np.exp(1j * 5 * x))
        coeffs = np.abs(dft(f).values)
        assert np.count_nonzero(coeffs > 1e-12 * coeffs.max()) == 1
        assert np.argmax(coeffs) == 5

    def test_cosine_round_trip(self, slab, rng):
        values = rng.standard_normal(slab.shape) + 1j * rng.standard_normal(slab.shape)
        a = cosine_analysis(slab, values)
        assert np.allclose(cosine_synthesis(slab, a), values, atol=1e-13)


class TestNorms:
    def test_constant_l2_is_sqrt_volume(self):
        grid = BoundaryGrid(2, 16, 3.0)
        f = GridFunction(grid, np.ones(grid.shape))
        assert np.isclose(norm(f), np.sqrt(3.0))

    def test_constant_hs_is_sqrt_volume_for_any_s(self, bgrid):
        f = GridFunction(bgrid, np.ones(bgrid.shape))
        for s in (-1.0, 0.0, 0.5, 2.0):
            assert np.isclose(norm(f, "Hs", s=s), np.sqrt(2.0 * np.pi))

    def test_hs_zero_equals_l2(self, bgrid, rng):
        for _ in range(10):
            f = random_boundary_function(bgrid, rng)
            assert abs(norm(f, "Hs", s=0.0) - norm(f)) <= 1e-12 * norm(f)

    def test_hs_monotone_in_s(self, bgrid, rng):
        for _ in range(10):
            f = random_boundary_function(bgrid, rng)
            values = [norm(f, "Hs", s=s) for s in (-0.5, 0.0, 0.3, 1.0, 1.7)]
            assert all(a <= b * (1 + 1e-12) for a, b in zip(values, values[1:]))

    def test_lp_rejects_p_below_one(self, bgrid, rng):
        f = random_boundary_function(bgrid, rng)
        with pytest.raises(ValueError):
            norm(f, "Lp", p=0.5)

    def test_lp_constant(self, bgrid):
        f = GridFunction(bgrid, 2.0 * np.ones(bgrid.shape))
        assert np.isclose(norm(f, "Lp", p=3.0), 2.0 * (2 * np.pi) ** (1.0 / 3.0))


class TestGradient:
    def test_constant_has_zero_gradient(self, slab):
        f = SlabFunction.from_cosine(slab, np.ones(slab.shape))
        assert grad_norm_sq(f) <= 1e-24

    def test_single_cosine_mode_closed_form(self):
        # f = cos(pi z / H) on L = 2pi, H = pi: integral of sin^2 gives pi^2
        grid = BoundaryGrid(2, 16, 2.0 * np.pi)
        slab = SlabGrid(grid, np.pi, 16)
        values = np.broadcast_to(np.cos(slab.z_nodes), slab.shape).copy()
        f = SlabFunction.from_cosine(slab, values)
        assert np.isclose(grad_norm_sq(f), np.pi**2, rtol=1e-12)

    def test_pure_boundary_mode_matches_finite_differences(self):
        grid = BoundaryGrid(2, 64, 2.0 * np.pi)
        slab = SlabGrid(grid, np.pi, 8)
        x = grid.axis_nodes
        values = np.broadcast_to(np.exp(1j * x)[:, None], slab.shape).copy()
        f = SlabFunction.from_cosine(slab, values)
        exact = grad_norm_sq(f)
        assert np.isclose(exact, slab_norm(f) ** 2, rtol=1e-12)
        # independent finite-difference quadrature of |df/dx|^2
        dfdx = (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0)) / (2 * grid.h)
        fd = slab.node_weight * np.sum(np.abs(dfdx) ** 2)
        assert np.isclose(fd, exact, rtol=5e-3)


def _gauss_nodes(H, count=400):
    nodes, weights = np.polynomial.legendre.leggauss(count)
    return 0.5 * H * (nodes + 1.0), 0.5 * H * weights


class TestLayerIntegrals:
    """Closed-form profile integrals against brute-force quadrature."""

    @pytest.mark.parametrize("geometry", ["slab", "halfspace"])
    @pytest.mark.parametrize("lam", [-2.0, -1.5 + 0.9j])
    def test_cosine_integrals_match_quadrature(self, slab, rng, geometry, lam):
        amps = rng.standard_normal(slab.boundary.shape) + 1j * rng.standard_normal(
            slab.boundary.shape
        )
        layer = LayerPart(slab, amps, lam, geometry)
        ik = layer.cosine_integrals()
        z, w = _gauss_nodes(slab.H)
        prof = layer.profile(z)
        for k in (0, 1, 5, slab.Nd - 1):
            quad = np.sum(w * prof * np.cos(k * np.pi * z / slab.H), axis=-1)
            assert np.allclose(quad, ik[..., k], rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("geometry", ["slab", "halfspace"])
    def test_pair_integrals_match_quadrature(self, slab, rng, geometry):
        amps = np.ones(slab.boundary.shape, dtype=complex)
        la = LayerPart(slab, amps, -1.0 + 0.5j, geometry)
        lb = LayerPart(slab, amps, -3.0 - 0.2j, geometry)
        z, w = _gauss_nodes(slab.H)
        expected = np.sum(w * la.profile(z) * np.conj(lb.profile(z)), axis=-1)
        assert np.allclose(la.pair_integrals(lb), expected, rtol=1e-10, atol=1e-13)

    def test_layer_inner_product_matches_dense_quadrature(self, slab, rng):
        u = random_cosine_field(slab, rng)
        amps = rng.standard_normal(slab.boundary.shape) + 1j * rng.standard_normal(
            slab.boundary.shape
        )
        layer = LayerPart(slab, amps, -2.5, "slab")
        v = SlabFunction.from_layer(layer)
        z, w = _gauss_nodes(slab.H, 600)
        from robinlap.estimates import evaluate_slab_function

        uv = evaluate_slab_function(u, z)
        vv = evaluate_slab_function(v, z)
        brute = slab.boundary.node_weight * np.sum(w * uv * np.conj(vv), axis=-1).sum()
        assert np.isclose(slab_inner(u, v), brute, rtol=1e-10)


class TestSlabAlgebra:
    def test_inner_consistent_with_node_quadrature_for_cosine(self, slab, rng):
        u = random_cosine_field(slab, rng)
        v = random_cosine_field(slab, rng)
        direct = slab.node_weight * np.sum(u.values * np.conj(v.values))
        assert np.isclose(slab_inner(u, v), direct, rtol=1e-13)

    def test_subtract_cancels_layers(self, slab, rng):
        amps = rng.standard_normal(slab.boundary.shape) + 0j
        w = SlabFunction.from_layer(LayerPart(slab, amps, -2.0, "slab"))
        diff = w - w
        assert slab_norm(diff) <= 1e-13 * slab_norm(w)


class TestSerialization:
    def test_boundary_csv_round_trip(self, bgrid, rng, tmp_path):
        f = random_boundary_function(bgrid, rng)
        path = tmp_path / "f.csv"
        save_csv(f, path)
        g = load_csv(bgrid, path)
        assert norm(g - f) <= 1e-14 * norm(f)

    def test_boundary_binary_round_trip(self, bgrid, rng, tmp_path):
        f = random_boundary_function(bgrid, rng)
        path = tmp_path / "f.bin"
        save_binary(f, path)
        g = load_binary(bgrid, path)
        assert np.array_equal(g.values, f.values)

    def test_slab_binary_round_trip(self, slab, rng, tmp_path):
        u = random_cosine_field(slab, rng)
        path = tmp_path / "u.bin"
        save_binary(u, path)
        v = load_binary(slab, path)
        assert np.array_equal(v.values, u.values)

    def test_slab_slices(self, slab, rng, tmp_path):
        u = random_cosine_field(slab, rng)
        path = tmp_path / "slices.csv"
        save_slab_slices(u, [0.1, slab.H / 2], path)
        text = path.read_text().splitlines()
        assert len(text) == 1 + 2 * slab.boundary.node_count
