import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from laboratorio_operadores_no_locales.exceptions import ContractViolation, GridMismatchError, SupportTouchesBoundaryError
from laboratorio_operadores_no_locales.models.fields import bump_field
from laboratorio_operadores_no_locales.models.grids import GridFunction, GridSpec
from laboratorio_operadores_no_locales.models.measures import OrderMeasure, SphericalMeasure
from laboratorio_operadores_no_locales.services.spectral_forms import (
    apply_spectral,
    comparison_suite,
    energy,
    energy_bruteforce_1d,
    multiplier,
    multiplier_grid,
    superposition_multiplier,
    x_norm,
)


def test_two_atom_multiplier():
    sigma = SphericalMeasure.atomic([((1.0, 0.0), 0.5), ((0.0, 1.0), 0.5)])
    assert multiplier(sigma, 0.5, np.array([[1.0, 0.0]]))[0] == pytest.approx(math.sqrt(2) / 2, rel=1e-9)


@pytest.mark.parametrize("gamma", [0.0, 0.3, 0.9])
def test_superposition_multiplier(uniform_family, gamma):
    mu = OrderMeasure(pos_atoms=[(1.0, 1.0)], neg_atoms=[(0.5, gamma)])
    assert superposition_multiplier(mu, uniform_family, np.array([[2.0]]))[0] == pytest.approx(4.0 - 2.0 * gamma)


def test_multiplier_is_zero_at_origin_and_one_for_order_zero(uniform1):
    xi = np.array([[0.0], [3.0]])
    assert_allclose(multiplier(uniform1, 0.7, xi), [0.0, 3.0**1.4])
    assert_allclose(multiplier(uniform1, 0.0, xi), [1.0, 1.0])


@pytest.mark.parametrize("dimension, nodes", [(1, 512), (2, 64)])
def test_parseval_on_the_fft_grid(rng, dimension, nodes):
    grid = GridSpec.centered(dimension, nodes, 3.0)
    u = GridFunction(grid, rng.standard_normal(grid.shape))
    spectral = grid.cell_volume / nodes**dimension * np.sum(np.abs(np.fft.fftn(u.values)) ** 2)
    assert spectral == pytest.approx(u.l2_norm_squared(), rel=1e-12)


@pytest.mark.parametrize("sigma_name", ["uniform1", "uniform2", "atomic2"])
@pytest.mark.parametrize("s", [0.3, 0.5, 1.4])
def test_multiplier_is_homogeneous(request, rng, sigma_name, s):
    if sigma_name == "atomic2":
        sigma = SphericalMeasure.atomic([((1.0, 0.0), 0.5), ((0.6, 0.8), 0.3), ((0.0, -1.0), 0.2)])
    else:
        sigma = request.getfixturevalue(sigma_name)
    xi = rng.standard_normal((20, sigma.dimension))
    base = multiplier(sigma, s, xi)
    for t in (0.1, 2.0, 7.5):
        assert_allclose(multiplier(sigma, s, t * xi), t ** (2 * s) * base, rtol=1e-12)

def test_spectral_application_on_cosine(uniform1):
    grid = GridSpec.centered(1, 64, 2 * math.pi)
    u = GridFunction.sample(grid, lambda p: np.cos(3 * p[..., 0]))
    out = apply_spectral(multiplier_grid(uniform1, 0.5, grid), u)
    assert_allclose(out.values, 3.0 * u.values, atol=1e-12)


def test_mismatched_grids():
    u = GridFunction.sample(GridSpec.centered(1, 64, 2.0), bump_field(1))
    other = multiplier_grid(SphericalMeasure.uniform(1), 0.5, GridSpec.centered(1, 128, 2.0))
    with pytest.raises(GridMismatchError):
        apply_spectral(other, u)


def test_energy_is_symmetric(uniform1, bump_grid):
    v = bump_grid.with_values(np.roll(bump_grid.values, 7))
    mult = multiplier_grid(uniform1, 0.6, bump_grid.grid)
    assert energy(bump_grid, v, mult) == pytest.approx(energy(v, bump_grid, mult), rel=1e-12)
    assert energy(bump_grid, bump_grid, mult) > 0


def test_scaling_of_energy(uniform1):
    grid = GridSpec.centered(1, 4096, 16.0)
    field = bump_field(1)
    u, u_rho = GridFunction.sample(grid, field), GridFunction.sample(grid, field.dilated(2.0))
    for s in (0.25, 0.75):
        mult = multiplier_grid(uniform1, s, grid)
        assert energy(u, u, mult) / energy(u_rho, u_rho, mult) == pytest.approx(2.0 ** (2 * s - 1), rel=1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("s", [0.25, 0.75])
def test_bruteforce_energy_matches_plancherel(uniform1, bump_grid, s):
    plancherel = energy(bump_grid, bump_grid, multiplier_grid(uniform1, s, bump_grid.grid))
    assert energy_bruteforce_1d(bump_grid, 1, s) == pytest.approx(plancherel, rel=1e-3)


def test_bruteforce_needs_margin():
    grid = GridSpec.centered(1, 256, 1.2)
    u = GridFunction.sample(grid, bump_field(1))
    with pytest.raises(SupportTouchesBoundaryError):
        energy_bruteforce_1d(u, 1, 0.5)


def test_x_norm_blocks(bump_grid, uniform_family):
    mu = OrderMeasure(pos_atoms=[(0.5, 1.0), (1.5, 2.0)], neg_atoms=[(0.25, 0.1)])
    report = x_norm(bump_grid, mu, uniform_family)
    assert report.blocks["partial_sum"].iloc[-1] == pytest.approx(report.e_plus, rel=1e-12)
    assert report.norm**2 == pytest.approx(bump_grid.l2_norm_squared() + report.e_plus, rel=1e-12)
    assert report.e_minus > 0


def test_comparison_suite_inequalities(bump_grid):
    sigma = SphericalMeasure.uniform(1)
    frame = comparison_suite(bump_grid, sigma, 0.75, t=0.25, diameter=1.0)
    assert frame.loc[frame["applicable"], "passed"].all()
    assert {"upper_by_pure", "lower_order", "lower_order_bounded"} <= set(frame["check"])


def test_comparison_suite_rejects_higher_lower_order(bump_grid):
    with pytest.raises(ContractViolation):
        comparison_suite(bump_grid, SphericalMeasure.uniform(1), 0.5, t=0.75)
