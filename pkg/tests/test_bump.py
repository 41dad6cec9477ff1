import numpy as np
import pytest
from numpy.testing import assert_allclose

from laboratorio_operadores_no_locales.exceptions import SpectralResolutionError
from laboratorio_operadores_no_locales.util.bump import bump, bump_derivative_norms, bump_derivative_norms_spectral, bump_derivatives


def test_profile_at_centre_and_outside():
    assert_allclose(bump(np.array([0.0, 0.5, 0.7])), [1.0, 0.0, 0.0])


def test_second_derivative_at_centre():
    d = bump_derivatives(np.array([0.0]), 2.0, 4)[0]
    assert d[1] == pytest.approx(0.0, abs=1e-14)
    assert d[2] == pytest.approx(-8.0, rel=1e-12)
    assert d[3] == pytest.approx(0.0, abs=1e-12)


def test_derivatives_match_finite_differences():
    x, h = 0.2, 1e-4
    d = bump_derivatives(np.array([x]), 2.0, 2)[0]
    fd1 = (bump(np.array([x + h])) - bump(np.array([x - h])))[0] / (2 * h)
    fd2 = (bump(np.array([x + h])) - 2 * bump(np.array([x])) + bump(np.array([x - h])))[0] / h**2
    assert d[1] == pytest.approx(fd1, rel=1e-6)
    assert d[2] == pytest.approx(fd2, rel=1e-5)


def test_norms_scale_under_dilation():
    k = np.arange(9)
    assert_allclose(bump_derivative_norms(4.0, 8), 2.0 ** (k - 0.5) * bump_derivative_norms(2.0, 8), rtol=1e-10)


def test_spectral_route_agrees_at_low_order():
    assert_allclose(bump_derivative_norms_spectral(2.0, 3), bump_derivative_norms(2.0, 3), rtol=1e-6)


def test_spectral_route_refuses_high_order():
    with pytest.raises(SpectralResolutionError, match="resolution bound"):
        bump_derivative_norms_spectral(2.0, 40)
