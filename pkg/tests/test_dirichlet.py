import math

import numpy as np
import pytest

from laboratorio_operadores_no_locales.exceptions import AssumptionViolation, ContractViolation, IndefiniteFormError
from laboratorio_operadores_no_locales.models.grids import DomainMask
from laboratorio_operadores_no_locales.models.measures import MeasureFamily, OrderMeasure, SphericalMeasure
from laboratorio_operadores_no_locales.services.dirichlet_variational import (
    DirichletProblem,
    default_s_star,
    dense_form_matrix,
    disk_mask,
    eigenpairs,
    form_apply,
    generalized_poincare_check,
    interval_mask,
    linear_solve,
    mask_from_spec,
    poincare_check,
)


@pytest.fixture
def family():
    return MeasureFamily.constant(SphericalMeasure.uniform(1))


@pytest.fixture
def unit_interval():
    return interval_mask(0.0, 1.0, 256)


def test_masks_from_spec():
    mask = mask_from_spec("interval:0,1", 256)
    assert mask.diameter == pytest.approx(1.0)
    assert mask.grid.length == pytest.approx(4.0)
    disk = mask_from_spec("disk:0,0,0.5", 64)
    assert disk.grid.dimension == 2
    assert disk.diameter == pytest.approx(1.0)
    with pytest.raises(ContractViolation, match="interval:a,b"):
        mask_from_spec("square:0,1", 64)
    with pytest.raises(ContractViolation):
        interval_mask(1.0, 0.0, 64)
    with pytest.raises(ContractViolation):
        disk_mask((0.0, 0.0), -1.0, 64)


def test_default_threshold_order():
    assert default_s_star(OrderMeasure(pos_atoms=[(1.0, 1.0), (0.5, 1.0)])) == 0.5
    assert default_s_star(OrderMeasure(pos_atoms=[(0.75, 1.0), (0.2, 1.0)], neg_atoms=[(0.25, 0.1)])) == 0.75
    with pytest.raises(AssumptionViolation):
        default_s_star(OrderMeasure(pos_atoms=[(0.2, 1.0)], neg_atoms=[(0.5, 0.1)]))


def test_dense_matrix_matches_operator(family, rng):
    mask = interval_mask(0.0, 1.0, 128)
    problem = DirichletProblem.build(OrderMeasure.dirac(0.5), family, mask)
    v = rng.standard_normal(mask.size)
    assert np.allclose(dense_form_matrix(problem.mult, mask) @ v, problem.apply(v), atol=1e-10)


def test_form_apply_vanishes_outside(family, unit_interval, rng):
    problem = DirichletProblem.build(OrderMeasure.dirac(0.5), family, unit_interval)
    u = unit_interval.extend(rng.standard_normal(unit_interval.size))
    out = form_apply(problem.mult, unit_interval, u)
    assert not np.any(out.values[~unit_interval.inside])


@pytest.mark.parametrize("mu", [OrderMeasure.dirac(0.5), OrderMeasure(pos_atoms=[(0.75, 1.0)], neg_atoms=[(0.25, 0.2)])])
def test_form_apply_is_symmetric_and_nonnegative(family, unit_interval, rng, mu):
    problem = DirichletProblem.build(mu, family, unit_interval)
    fields = rng.standard_normal((100, unit_interval.size))
    images = np.array([unit_interval.restrict(form_apply(problem.mult, unit_interval, unit_interval.extend(u))) for u in fields])
    gram = fields @ images.T
    scale = np.abs(gram).max()
    np.testing.assert_allclose(gram, gram.T, rtol=0, atol=1e-10 * scale)
    assert np.all(np.diag(gram) >= -1e-12 * scale)
    assert np.all(np.diag(gram) > 0)


@pytest.mark.parametrize("mu", [OrderMeasure.dirac(0.5), OrderMeasure(pos_atoms=[(1.0, 1.0), (0.5, 1.0)])])
def test_eigenvalues_grow_when_the_domain_shrinks(family, unit_interval, mu):
    x = unit_interval.grid.coordinates()[..., 0]
    inner = DomainMask(unit_interval.grid, (x > 0.25) & (x < 0.75), diameter=0.5)
    problem = DirichletProblem.build(mu, family, unit_interval)
    big = eigenpairs(problem.mult, unit_interval, 3).eigenvalues
    small = eigenpairs(problem.mult, inner, 3).eigenvalues
    assert inner.size < unit_interval.size
    assert np.all(small >= big * (1.0 - 1e-6))
    assert small[0] > big[0]

def test_laplacian_eigenvalue_on_unit_interval(family):
    mask = interval_mask(0.0, 1.0, 2048)
    problem = DirichletProblem.build(OrderMeasure.dirac(1.0), family, mask)
    spectrum = eigenpairs(problem.mult, mask, 3)
    assert spectrum.eigenvalues[0] == pytest.approx(math.pi**2, rel=2e-2)
    assert np.all(np.diff(spectrum.eigenvalues) > 0)


def test_eigenvectors_are_normalised(family, unit_interval):
    problem = DirichletProblem.build(OrderMeasure.dirac(0.5), family, unit_interval)
    spectrum = eigenpairs(problem.mult, unit_interval, 4)
    assert np.all(spectrum.eigenvalues > 0)
    assert np.all(np.diff(spectrum.eigenvalues) > 0)
    for v in spectrum.vectors:
        assert v.l2_norm_squared() == pytest.approx(1.0, rel=1e-10)
        assert v.values[np.argmax(np.abs(v.values))] > 0
    assert spectrum.summary().method == spectrum.method


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_poincare_lower_bound(family, unit_interval, s):
    problem = DirichletProblem.build(OrderMeasure.dirac(s), family, unit_interval)
    check = poincare_check(eigenpairs(problem.mult, unit_interval, 1), s, 1.0)
    assert check["passed"]
    assert check["bound"] == pytest.approx(1.0 / check["constant"])


def test_generalized_poincare_bound(family, unit_interval):
    problem = DirichletProblem.build(OrderMeasure(pos_atoms=[(1.0, 1.0), (0.5, 1.0)]), family, unit_interval)
    spectrum = eigenpairs(problem.mult, unit_interval, 4)
    frame = generalized_poincare_check(problem, spectrum.vectors, 1.0)
    assert len(frame) == 4
    assert frame["passed"].all()


def test_linear_solve(family, unit_interval):
    problem = DirichletProblem.build(OrderMeasure.dirac(0.5), family, unit_interval)
    f = unit_interval.extend(np.ones(unit_interval.size))
    result = linear_solve(problem.mult, unit_interval, f, tol=1e-10, report=problem.report)
    assert result.converged
    assert result.residual <= 1e-8
    assert result.energy > 0
    assert not np.any(result.solution.values[~unit_interval.inside])


def test_linear_solve_zero_rhs(family, unit_interval):
    problem = DirichletProblem.build(OrderMeasure.dirac(0.5), family, unit_interval)
    result = linear_solve(problem.mult, unit_interval, unit_interval.extend(np.zeros(unit_interval.size)))
    assert not np.any(result.solution.values)
    assert result.residual == 0.0


def test_refuses_indefinite_superposition(family, unit_interval):
    problem = DirichletProblem.build(OrderMeasure(pos_atoms=[(0.5, 1.0)], neg_atoms=[(0.0, 0.9)]), family, unit_interval)
    with pytest.raises(IndefiniteFormError, match="refusing to solve"):
        linear_solve(problem.mult, unit_interval, unit_interval.extend(np.ones(unit_interval.size)), report=problem.report)
    with pytest.raises(IndefiniteFormError):
        eigenpairs(problem.mult, unit_interval, 2, report=problem.report)
