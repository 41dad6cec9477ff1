import numpy as np
import pytest
from numpy.testing import assert_allclose

from laboratorio_operadores_no_locales.exceptions import ContractViolation, GridMismatchError
from laboratorio_operadores_no_locales.models.fields import bump_field, field_from_spec
from laboratorio_operadores_no_locales.models.grids import DomainMask, GridFunction, GridSpec
from laboratorio_operadores_no_locales.models.measures import MeasureFamily, SphericalMeasure


def test_node_count_is_power_of_two():
    with pytest.raises(ContractViolation):
        GridSpec.centered(1, 100, 2.0)


def test_domain_must_keep_quarter_box_margin():
    grid = GridSpec.centered(1, 64, 4.0)
    x = grid.coordinates()[..., 0]
    with pytest.raises(ContractViolation):
        DomainMask(grid, np.abs(x) < 1.5, diameter=3.0)
    mask = DomainMask(grid, np.abs(x) < 0.5, diameter=1.0)
    assert_allclose(mask.restrict(mask.extend(np.ones(mask.size))), 1.0)
    assert mask.measure == pytest.approx(mask.size * grid.spacing)


def test_require_supported():
    grid = GridSpec.centered(1, 256, 4.0)
    mask = DomainMask(grid, np.abs(grid.coordinates()[..., 0]) < 0.5, diameter=1.0)
    wide = GridFunction.sample(grid, bump_field(1, a=1.5))
    with pytest.raises(ContractViolation, match="nonzero outside"):
        mask.require_supported(wide)
    mask.require_supported(GridFunction.sample(grid, bump_field(1)))


def test_grid_function_binary_file(tmp_path, bump_grid):
    path = tmp_path / "u.bin"
    bump_grid.write(path)
    again = GridFunction.read(path)
    assert again.grid == bump_grid.grid
    assert np.array_equal(again.values, bump_grid.values)


def test_non_finite_samples_rejected():
    grid = GridSpec.centered(1, 8, 1.0)
    with pytest.raises(ContractViolation):
        GridFunction(grid, np.full(8, np.nan))


def test_grid_mismatch():
    a = GridSpec.centered(1, 64, 2.0)
    with pytest.raises(GridMismatchError):
        a.require_same(GridSpec.centered(1, 64, 3.0))


def test_builtin_fields():
    u = field_from_spec("builtin:bump", 1)
    assert u(np.array([[0.0]]))[0] == pytest.approx(1.0)
    assert u(np.array([[0.6]]))[0] == 0.0
    assert field_from_spec("builtin:constant:2.5", 2)(np.zeros((3, 2))).tolist() == [2.5, 2.5, 2.5]
    with pytest.raises(ContractViolation, match="Available"):
        field_from_spec("builtin:gaussian", 1)


def test_dilation_scales_support_and_derivatives():
    u = bump_field(1)
    wide = u.dilated(2.0)
    assert wide.support_radius == pytest.approx(2 * u.support_radius)
    assert wide(np.array([[0.4]]))[0] == pytest.approx(u(np.array([[0.2]]))[0])
    assert wide.derivative_bound(2) == pytest.approx(u.derivative_bound(2) / 4)


def test_points_must_match_dimension():
    with pytest.raises(ContractViolation):
        bump_field(2)(np.zeros((4, 1)))


def test_family_splits_at_breakpoints():
    family = MeasureFamily(breakpoints=[0.0, 1.0], pieces=[SphericalMeasure.dirac((1.0, 0.0))], tail=SphericalMeasure.uniform(2))
    pieces = family.constant_intervals(0.5, 1.5)
    assert [(a, b) for a, b, _ in pieces] == [(0.5, 1.0), (1.0, 1.5)]
    assert [sigma.variant for _, _, sigma in pieces] == ["atomic", "uniform"]
