import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from laboratorio_operadores_no_locales.exceptions import AssumptionViolation, ContractViolation, MeasureValidationError
from laboratorio_operadores_no_locales.models.measures import MeasureFamily, OrderMeasure, SphericalMeasure
from laboratorio_operadores_no_locales.services.order_measure import mass, pathological_partial_sums, validate
from laboratorio_operadores_no_locales.services.spherical_measure import (
    angular_moment,
    anisotropic_counterexample_family,
    ellipticity_report,
    maximizing_direction,
    uniform_moment_closed_form,
)
from laboratorio_operadores_no_locales.util.measure_io import (
    family_from_document,
    family_to_document,
    measure_from_document,
    measure_to_document,
    order_measure_from_document,
    parse_order_shorthand,
)


# --- Medidas esféricas ---
def test_atomic_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        SphericalMeasure.atomic([((1.0,), 0.5), ((-1.0,), 0.4)])


def test_atom_direction_must_be_unit():
    with pytest.raises(ValueError):
        SphericalMeasure.atomic([((1.0, 1.0), 1.0)])


def test_uniform_moment_is_rotation_invariant(uniform2, rng):
    angles = rng.uniform(0, 2 * math.pi, 32)
    values = [angular_moment(uniform2, (math.cos(a), math.sin(a)), 1.3) for a in angles]
    assert_allclose(values, values[0], atol=1e-10)
    assert_allclose(values[0], uniform_moment_closed_form(2, 1.3), rtol=1e-10)


def test_maximizer_dominates_random_directions(rng):
    sigma = SphericalMeasure.from_angles([(0.2, 0.3), (1.4, 0.5), (2.5, 0.2)])
    _, top = maximizing_direction(sigma, 0.75)
    angles = rng.uniform(0, 2 * math.pi, 1000)
    values = [angular_moment(sigma, (math.cos(a), math.sin(a)), 1.5) for a in angles]
    assert top >= max(values) - 1e-12


def test_two_atom_maximizer_at_diagonal():
    sigma = SphericalMeasure.atomic([((1.0, 0.0), 0.5), ((0.0, 1.0), 0.5)])
    e, top = maximizing_direction(sigma, 0.5)
    assert_allclose(top, math.sqrt(2) / 2, rtol=1e-9)
    assert_allclose(abs(e[0]), abs(e[1]), atol=1e-6)


def test_counterexample_family_is_simply_but_not_strongly_elliptic():
    report = ellipticity_report(anisotropic_counterexample_family(4), [0.5, 1.5, 2.5, 3.5])
    assert report.lambda_ > 0
    assert report.lambda0 == pytest.approx(0.0, abs=1e-12)


def test_family_returns_uniform_at_order_zero():
    family = MeasureFamily(breakpoints=[0.0, 1.0], pieces=[SphericalMeasure.dirac((1.0, 0.0))], tail=SphericalMeasure.uniform(2))
    assert family.sigma_at(0.0).variant == "uniform"
    assert family.sigma_at(0.5).variant == "atomic"
    assert family.sigma_at(1.5).variant == "uniform"


# --- Medidas de orden ---
def test_mass_counts_atoms_and_densities():
    mu = OrderMeasure(pos_atoms=[(0.5, 1.0)], pos_density=[(1.0, 2.0, 0.5)])
    assert mass(mu.positive, 0.0) == pytest.approx(1.5)
    assert mass(mu.positive, 0.6, 1.5) == pytest.approx(0.25)
    assert mu.total_variation == pytest.approx(1.5)


@pytest.mark.parametrize(
    "mu, s_star, expected",
    [
        (OrderMeasure(pos_atoms=[(2.0, 1.0), (1.0, 1.0)]), 1.0, 6.0),
        (OrderMeasure.dirac(0.25), 0.25, 4.0),
    ],
)
def test_critical_exponent(mu, s_star, expected):
    report = validate(mu, s_star, 1, p_fallback=6.0)
    assert report.two_star == pytest.approx(expected)


def test_gamma_is_mass_ratio_below_threshold():
    mu = OrderMeasure(pos_atoms=[(1.0, 1.0)], neg_atoms=[(0.5, 0.3)])
    report = validate(mu, 0.8, 1, p_fallback=6.0)
    assert report.gamma == pytest.approx(0.3)
    assert report.solvable
    assert validate(mu, 0.8, 1, p_fallback=6.0) == report


def test_no_positive_mass_above_threshold():
    with pytest.raises(AssumptionViolation, match="positive part carries no mass"):
        validate(OrderMeasure.dirac(0.5), 1.0, 1, p_fallback=6.0)


def test_fallback_exponent_must_exceed_two():
    with pytest.raises(ContractViolation):
        validate(OrderMeasure.dirac(0.5), 0.5, 1, p_fallback=2.0)


def test_special_phi_partial_sum():
    frame = pathological_partial_sums("special_phi", 3)
    assert frame["partial_sum"].iloc[-1] == pytest.approx(1 + 1 / 4 + 1 / 9, rel=1e-12)
    assert pathological_partial_sums("special_phi", 40)["partial_sum"].iloc[-1] <= math.pi**2 / 6


def test_special_psi_grows_geometrically():
    frame = pathological_partial_sums("special_psi", 20)
    assert frame["partial_sum"].iloc[2] == pytest.approx(math.sqrt(2) * (1 + 0.5 + 4 / 9), rel=1e-6)
    assert abs(frame["dilation_ratio"].iloc[-1] - 2.0) <= 0.05


def test_truncation_is_capped():
    with pytest.raises(ContractViolation):
        pathological_partial_sums("strano", 41)


# --- Documentos ---
def test_shorthand_with_negative_part():
    mu = parse_order_shorthand("delta:0.5 - 0.05*delta:0.25")
    assert mu.pos_atoms == [(0.5, 1.0)]
    assert mu.neg_atoms == [(0.25, 0.05)]


def test_shorthand_rejects_garbage():
    with pytest.raises(ContractViolation):
        parse_order_shorthand("delta:0.5 delta:1")
    with pytest.raises(ContractViolation):
        parse_order_shorthand("gamma:2")


def test_angle_document_builds_atoms():
    sigma = measure_from_document({"variant": "atomic", "dimension": 2, "angles": [0.0, math.pi / 2], "weights": [0.5, 0.5]})
    assert_allclose(sigma.atoms[1].direction, (0.0, 1.0), atol=1e-15)
    again = measure_from_document(measure_to_document(sigma))
    assert_allclose(np.array([a.direction for a in again.atoms]), np.array([a.direction for a in sigma.atoms]), atol=1e-15)


def test_invalid_document_raises_measure_error():
    with pytest.raises(MeasureValidationError):
        measure_from_document({"variant": "atomic", "dimension": 1, "signs": [1], "weights": [0.7]})
    with pytest.raises(MeasureValidationError):
        order_measure_from_document({"pos_atoms": [[-1.0, 1.0]]})


def test_family_document():
    document = {"dimension": 2, "breakpoints": [0.0, 1.0], "pieces": [{"variant": "atomic", "dimension": 2, "angles": [0.0], "weights": [1.0]}]}
    family = family_from_document(document)
    assert family.tail.variant == "uniform"
    assert family_to_document(family)["breakpoints"] == [0.0, 1.0]
