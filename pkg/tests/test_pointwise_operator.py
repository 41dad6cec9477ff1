import math

import numpy as np
import pytest

from laboratorio_operadores_no_locales.exceptions import DomainError, MeasureValidationError, SuperpositionNotCertified
from laboratorio_operadores_no_locales.models.fields import bump_field, constant_field, field_from_spec
from laboratorio_operadores_no_locales.models.measures import OrderMeasure
from laboratorio_operadores_no_locales.services.pointwise_operator import (
    apply_Lms,
    apply_superposition,
    PointwiseValue,
    evaluation_bound,
    first_admissible_order,
    limit_checks,
    local_limit,
    m_independence_check,
    tail_mass,
)


def test_tail_mass():
    assert tail_mass(0.5, 2.0) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        tail_mass(0.0, 1.0)


def test_first_admissible_order():
    assert first_admissible_order(0.5) == 1
    assert first_admissible_order(1.0) == 2
    assert first_admissible_order(1.7) == 2


def test_operator_kills_constants(uniform1):
    value, _ = apply_Lms(constant_field(1), 1, 0.4, uniform1, [0.3])
    assert abs(value) <= evaluation_bound(1, 0.4, uniform1, 1.0, 0.0)


def test_result_carries_an_error_estimate(bump, uniform1):
    result = apply_Lms(bump, 1, 0.5, uniform1, [0.1])
    assert isinstance(result, PointwiseValue)
    assert result._fields == ("value", "error_estimate")
    assert 0.0 <= result.error_estimate < 1e-3 * abs(result.value) + 1e-8
    assert abs(result.value) <= evaluation_bound(1, 0.5, uniform1, bump.sup_norm, bump.derivative_bound(2))


def test_order_outside_range(bump, uniform1):
    with pytest.raises(DomainError):
        apply_Lms(bump, 1, 1.0, uniform1, [0.0])


def test_non_probability_sigma_rejected(bump):
    with pytest.raises(MeasureValidationError):
        apply_Lms(bump, 1, 0.5, {"variant": "atomic", "dimension": 1, "atoms": [{"direction": [1.0], "weight": 0.5}]}, [0.0])


@pytest.mark.parametrize("s", [0.3, 0.6])
def test_value_independent_of_m(bump, uniform1, s):
    for x in np.linspace(-0.4, 0.4, 5):
        frame = m_independence_check(bump, s, uniform1, [x], [1, 2])
        assert frame.attrs["max_deviation"] <= max(frame.attrs["error_estimate_sum"], 1e-10)


def test_close_to_second_derivative_near_order_one(bump, uniform1):
    value, _ = apply_Lms(bump, 1, 0.999, uniform1, [0.0])
    assert value == pytest.approx(8.0, rel=1e-2)


def test_local_limit_is_minus_laplacian(bump, uniform1):
    assert local_limit(bump, 1, uniform1, [0.0]) == pytest.approx(8.0, rel=1e-6)


def test_limit_to_zero_decreases(bump, uniform_family):
    frame = limit_checks(bump, uniform_family, "zero", [0.0], s_sequence=[0.2, 0.1, 0.05, 0.01])
    assert (np.diff(frame["deviation"]) < 0).all()
    assert frame["deviation"].iloc[-1] < 5e-3


def test_identity_atom_echoes_field(bump, uniform_family):
    value, error = apply_superposition(bump, OrderMeasure.dirac(0.0), uniform_family, [0.1])
    assert value == pytest.approx(float(bump(np.array([[0.1]]))[0]))
    assert error == 0.0


def test_superposition_is_linear_in_mu(bump, uniform_family):
    x = [0.05]
    single, _ = apply_superposition(bump, OrderMeasure.dirac(0.5), uniform_family, x)
    double, _ = apply_superposition(bump, OrderMeasure(pos_atoms=[(0.5, 2.0)], neg_atoms=[(0.5, 0.5)]), uniform_family, x)
    assert double == pytest.approx(1.5 * single, rel=1e-12)


def test_superposition_refuses_uncertified_orders(bump, uniform_family):
    with pytest.raises(SuperpositionNotCertified):
        apply_superposition(bump, OrderMeasure.dirac(8.5), uniform_family, [0.0])


def test_evaluation_bound_dominates(bump, uniform1):
    value, _ = apply_Lms(bump, 1, 0.5, uniform1, [0.0])
    bound = evaluation_bound(1, 0.5, uniform1, bump.sup_norm, bump.derivative_bound(2))
    assert abs(value) <= bound


def test_two_dimensional_bump(uniform2):
    u = field_from_spec("builtin:bump", 2)
    value, error = apply_Lms(u, 1, 0.5, uniform2, [0.0, 0.0])
    assert value > 0
    assert error < 1e-3 * abs(value) + 1e-8
    assert math.isfinite(value)
