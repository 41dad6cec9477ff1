# laboratorio_operadores_no_locales/util/quadrature.py
"""Reglas de cuadratura compuestas y el campo cercano de integrales hipersingulares."""

from functools import lru_cache
from typing import Callable, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from numpy.typing import NDArray
from scipy.special import roots_legendre

# --- Constants ---
NEAR_SAFE_FRACTION = 0.25  # samples only at r >= eta/4, where the difference is not swamped by rounding
NEAR_DEGREE = 8


@lru_cache(maxsize=64)
def _legendre(n: int) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, n: int) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    x, w = _legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_gauss_legendre(breakpoints: Sequence[float], n: int) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Nodos y pesos de una regla de n puntos en cada panel [b_i, b_{i+1}]."""
    edges = np.asarray(breakpoints, dtype=float)
    x, w = _legendre(n)
    half = 0.5 * np.diff(edges)
    nodes = edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def uniform_panels(a: float, b: float, width: float) -> NDArray[np.float64]:
    count = max(1, int(np.ceil((b - a) / width)))
    return np.linspace(a, b, count + 1)


def compare_rules(integrand: Callable[[NDArray[np.float64]], NDArray[np.float64]], breakpoints: Sequence[float], n: int):
    """Integral compuesta con reglas de n y n/2 puntos; devuelve (valor, |diferencia|).

    ``integrand`` lleva nodos de forma (n_nodes,) a valores de forma (n_nodes, ...).
    """
    nodes, weights = composite_gauss_legendre(breakpoints, n)
    fine = np.tensordot(weights, integrand(nodes), axes=(0, 0))
    nodes, weights = composite_gauss_legendre(breakpoints, max(2, n // 2))
    coarse = np.tensordot(weights, integrand(nodes), axes=(0, 0))
    return fine, np.abs(fine - coarse)


def _power_moments(coefficients: NDArray[np.float64], exponent: float) -> NDArray[np.float64]:
    # int_0^1 t^j t^(exponent/2 - 1) dt = 1 / (j + exponent/2)
    j = np.arange(coefficients.shape[0])
    return np.tensordot(1.0 / (j + 0.5 * exponent), coefficients, axes=(0, 0))


def even_fit_integral(t: NDArray[np.float64], values: NDArray[np.float64], eta: float, exponent: float, degree: int = NEAR_DEGREE):
    """int_0^eta h(r) r^(exponent - 1) dr a partir de muestras de h en t = (r/eta)^2.

    h se ajusta con un polinomio en t que se integra exacto; la estimación de error es
    el cambio al bajar dos grados.
    """
    values = np.asarray(values, dtype=float)
    flat = values.reshape(len(t), -1)
    scale = 0.5 * eta**exponent
    fine = scale * _power_moments(P.polyfit(t, flat, degree), exponent)
    coarse = scale * _power_moments(P.polyfit(t, flat, max(0, degree - 2)), exponent)
    shape = values.shape[1:]
    return fine.reshape(shape), np.abs(fine - coarse).reshape(shape)


def near_field_integral(
    profile: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    eta: float,
    exponent: float,
    samples: int = 48,
    degree: int = NEAR_DEGREE,
):
    """int_0^eta h(r) r^(exponent - 1) dr para un perfil h par y suave, exponent > 0.

    h se muestrea en puntos de Chebyshev de t = (r/eta)^2 en [1/16, 1], donde el cociente
    de diferencias no queda ahogado por el redondeo. ``profile`` lleva radios (n,) a valores (n, ...).
    """
    lo = NEAR_SAFE_FRACTION**2
    k = np.arange(samples)
    t = lo + 0.5 * (1.0 - lo) * (1.0 + np.cos(np.pi * (k + 0.5) / samples))
    return even_fit_integral(t, profile(eta * np.sqrt(t)), eta, exponent, degree)
