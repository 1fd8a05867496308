import numpy as np
import pytest

from curvelift import FluxField, EdgeField


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)


@pytest.fixture
def random_flux(rng):
    def make(grid, scale=1.0):
        return FluxField(
            scale * rng.standard_normal(grid.shape_s1),
            scale * rng.standard_normal(grid.shape_s2),
            scale * rng.standard_normal(grid.shape_st),
        )

    return make


@pytest.fixture
def random_edge(rng):
    def make(grid, scale=1.0):
        return EdgeField(
            scale * rng.standard_normal(grid.shape_e1),
            scale * rng.standard_normal(grid.shape_e2),
        )

    return make
