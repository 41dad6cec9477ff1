import numpy as np
import pytest

from laboratorio_operadores_no_locales.exceptions import ContractViolation, FucikWindowError, IndefiniteFormError
from laboratorio_operadores_no_locales.models.grids import GridFunction
from laboratorio_operadores_no_locales.models.measures import MeasureFamily, OrderMeasure, SphericalMeasure
from laboratorio_operadores_no_locales.services.critical_points import (
    brezis_nirenberg_functional,
    critical_level_bound,
    default_seed,
    jumping_functional,
    jumping_solve,
    nehari_projection,
    solve_mountain_pass,
)
from laboratorio_operadores_no_locales.services.dirichlet_variational import DirichletProblem, eigenpairs, interval_mask


@pytest.fixture
def family():
    return MeasureFamily.constant(SphericalMeasure.uniform(1))


@pytest.fixture
def half_order(family):
    return DirichletProblem.build(OrderMeasure.dirac(0.5), family, interval_mask(-1.0, 1.0, 512))


@pytest.fixture
def mixed(family):
    mu = OrderMeasure(pos_atoms=[(0.5, 1.0)], neg_atoms=[(0.25, 0.05)])
    return DirichletProblem.build(mu, family, interval_mask(-1.0, 1.0, 512))


def test_default_seed_lives_in_domain(half_order):
    seed = default_seed(half_order)
    half_order.mask.require_supported(seed)
    assert seed.values.max() > 0


def test_nehari_projection_balances_energy(half_order, rng):
    v = rng.standard_normal(half_order.mask.size)
    u = nehari_projection(half_order, v, 4.0)
    power = half_order.weight * float(np.sum(np.abs(u) ** 4))
    assert half_order.energy(u) == pytest.approx(power, rel=1e-10)
    with pytest.raises(ContractViolation):
        nehari_projection(half_order, np.zeros(half_order.mask.size), 4.0)


def test_mountain_pass_exponent_range(half_order):
    with pytest.raises(ContractViolation):
        solve_mountain_pass(half_order, 2.0)
    with pytest.raises(ContractViolation):
        solve_mountain_pass(half_order, half_order.report.two_star)
    with pytest.raises(ContractViolation, match="zero function"):
        solve_mountain_pass(half_order, 4.0, seed=half_order.mask.extend(np.zeros(half_order.mask.size)))


@pytest.mark.slow
def test_mountain_pass_solution(mixed, rng):
    result = solve_mountain_pass(mixed, 4.0, tol=1e-10)
    extras = result.extras
    assert result.residual <= 1e-6
    assert extras["level"] > 0
    assert extras["nehari_defect"] <= 1e-8
    assert extras["level_above_beta"]
    assert extras["far_value"] < extras["beta"]
    u = mixed.mask.restrict(result.solution)
    phi = rng.standard_normal(mixed.mask.size)
    weak = mixed.weight * float(phi @ (mixed.apply(u) - np.abs(u) ** 2 * u))
    assert abs(weak) <= 1e-5 * np.sqrt(mixed.weight * float(phi @ phi))


def test_jumping_gradient_matches_finite_differences(half_order, rng):
    mask = half_order.mask
    p = half_order.report.two_star
    u = 0.5 * rng.standard_normal(mask.size)
    d = rng.standard_normal(mask.size)
    _, grad = jumping_functional(half_order, 1.3, 2.1, p, mask.extend(u))
    exact = half_order.weight * float(mask.restrict(grad) @ d)
    step = 1e-6
    plus, _ = jumping_functional(half_order, 1.3, 2.1, p, mask.extend(u + step * d))
    minus, _ = jumping_functional(half_order, 1.3, 2.1, p, mask.extend(u - step * d))
    assert (plus - minus) / (2 * step) == pytest.approx(exact, rel=1e-6)


def test_equal_coefficients_reduce_to_brezis_nirenberg(half_order, rng):
    u = half_order.mask.extend(rng.standard_normal(half_order.mask.size))
    p = half_order.report.two_star
    value, grad = jumping_functional(half_order, 1.7, 1.7, p, u)
    other, other_grad = brezis_nirenberg_functional(half_order, 1.7, p, u)
    assert value == other
    assert np.array_equal(grad.values, other_grad.values)


def test_jumping_functional_needs_support(half_order):
    with pytest.raises(ContractViolation):
        jumping_functional(half_order, 1.0, 1.0, 6.0, GridFunction(half_order.mask.grid, np.ones(half_order.mask.grid.shape)))


def test_critical_level_bound(half_order):
    assert critical_level_bound(half_order, 1.0, 2.0, 2.5, 6.0) == 0.0
    expected = (0.5 - 1 / 6) * half_order.mask.measure * 0.5**1.5
    assert critical_level_bound(half_order, 2.0, 1.5, 1.8, 6.0) == pytest.approx(expected)


def test_coefficients_outside_window(half_order):
    lam = eigenpairs(half_order.mult, half_order.mask, 3).eigenvalues
    with pytest.raises(FucikWindowError, match="outside the window"):
        jumping_solve(half_order, lam[2] + 1.0, lam[1], 2)
    with pytest.raises(ContractViolation):
        jumping_solve(half_order, 1.0, 1.0, 0)


def test_solvers_refuse_indefinite_forms(family):
    mu = OrderMeasure(pos_atoms=[(0.5, 1.0)], neg_atoms=[(0.0, 0.9)])
    problem = DirichletProblem.build(mu, family, interval_mask(0.0, 1.0, 256))
    with pytest.raises(IndefiniteFormError):
        solve_mountain_pass(problem, 4.0)
    with pytest.raises(IndefiniteFormError):
        jumping_solve(problem, 1.0, 1.0, 1)
