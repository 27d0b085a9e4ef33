import numpy as np
import pytest

from robinlap import BoundaryGrid, GridFunction, SlabFunction, SlabGrid
from robinlap.grids import mixed_synthesis


@pytest.fixture
def bgrid():
    return BoundaryGrid(2, 32, 2.0 * np.pi)


@pytest.fixture
def slab(bgrid):
    return SlabGrid(bgrid, np.pi, 24)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_boundary_function(grid, rng):
    values = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return GridFunction(grid, values)


def random_cosine_field(slab, rng, decay=1.0):
    shape = slab.boundary.shape + (slab.Nd,)
    coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    coeffs = coeffs / (1.0 + slab.boundary.xi_sq[..., None] + slab.mu) ** decay
    return SlabFunction.from_cosine(slab, mixed_synthesis(slab, coeffs))
