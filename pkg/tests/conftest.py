import numpy as np
import pytest

from laboratorio_operadores_no_locales.models.fields import bump_field
from laboratorio_operadores_no_locales.models.grids import GridFunction, GridSpec
from laboratorio_operadores_no_locales.models.measures import MeasureFamily, SphericalMeasure


@pytest.fixture
def uniform1():
    return SphericalMeasure.uniform(1)


@pytest.fixture
def uniform2():
    return SphericalMeasure.uniform(2)


@pytest.fixture
def uniform_family():
    return MeasureFamily.constant(SphericalMeasure.uniform(1))


@pytest.fixture
def bump():
    """exp(1 - 1/(1 - 4x^2)) on (-1/2, 1/2); u(0) = 1 and -u''(0) = 8."""
    return bump_field(1)


@pytest.fixture
def bump_grid():
    grid = GridSpec.centered(1, 1024, 4.0)
    return GridFunction.sample(grid, bump_field(1))


@pytest.fixture
def rng():
    return np.random.default_rng(42)
