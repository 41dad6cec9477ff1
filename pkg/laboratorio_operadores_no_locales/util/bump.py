# laboratorio_operadores_no_locales/util/bump.py
"""Perfil de soporte compacto exp(1 - 1/(1 - a^2 x^2)) y sus derivadas de orden alto.

Las derivadas se obtienen por aritmética de series de Taylor en cada nodo: los
coeficientes de 1/g con g(h) = 1 - a^2 (x+h)^2 siguen una recurrencia de tres
términos y los de exp(1 - 1/g) la recurrencia estándar de la exponencial de una
serie. Con a potencia de dos, el cambio de a solo reescala por potencias de dos.
"""

import logging
import math
from typing import Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import fft

from ..exceptions import SpectralResolutionError
from .quadrature import composite_gauss_legendre, uniform_panels

logger = logging.getLogger("laboratorio_operadores")

# --- Constants ---
# Beyond t = 1/(1 - a^2 x^2) = T_CUT the profile is below e^{1-T_CUT} and is treated as zero.
T_CUT = 700.0
CENTRAL_EDGE = 0.8
CENTRAL_PANELS = 512
EDGE_PANELS = 1024
PANEL_NODES = 16
SPECTRAL_NODES = 2**14
SPECTRAL_FLOOR = 1e-13
RESOLUTION_RTOL = 1e-6


def bump(x: NDArray[np.float64], a: float = 2.0) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    g = 1.0 - (a * x) ** 2
    inside = g > 1.0 / T_CUT
    out[inside] = np.exp(1.0 - 1.0 / g[inside])
    return out


def bump_taylor_coefficients(x: NDArray[np.float64], a: float, order: int) -> NDArray[np.float64]:
    """Coeficientes de Taylor de h -> bump(x + h) hasta ``order``, forma ``x.shape + (order + 1,)``."""
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    coeffs = np.zeros((flat.size, order + 1))
    g0 = 1.0 - (a * flat) ** 2
    live = g0 > 1.0 / T_CUT
    if np.any(live):
        g0 = g0[live]
        g1 = -2.0 * a * a * flat[live]
        g2 = -a * a
        r = np.zeros((g0.size, order + 1))
        r[:, 0] = 1.0 / g0
        if order >= 1:
            r[:, 1] = -g1 * r[:, 0] / g0
        for n in range(2, order + 1):
            r[:, n] = -(g1 * r[:, n - 1] + g2 * r[:, n - 2]) / g0
        f = np.zeros_like(r)
        f[:, 0] = np.exp(1.0 - r[:, 0])
        # u = 1 - r, so u_j = -r_j for j >= 1
        j = np.arange(1, order + 1)
        for n in range(1, order + 1):
            f[:, n] = -np.sum(j[:n] * r[:, 1 : n + 1] * f[:, n - 1 :: -1][:, :n], axis=1) / n
        coeffs[live] = f
    return coeffs.reshape(x.shape + (order + 1,))


def bump_derivatives(x: NDArray[np.float64], a: float, order: int) -> NDArray[np.float64]:
    """D^k bump(x) para k = 0..order; el último eje indexa k."""
    factorials = np.array([float(math.factorial(k)) for k in range(order + 1)])
    return bump_taylor_coefficients(x, a, order) * factorials


def _half_line_rule(a: float) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Nodos y pesos en [0, x_cut] graduados hacia el borde del soporte.

    Se construyen en la variable escalada y = a x, así reglas con distinto a comparten y.
    """
    central_y, central_w = composite_gauss_legendre(uniform_panels(0.0, CENTRAL_EDGE, CENTRAL_EDGE / CENTRAL_PANELS), PANEL_NODES)
    u_lo = -math.log(1.0 - CENTRAL_EDGE**2)
    u_hi = math.log(T_CUT)
    u, w_u = composite_gauss_legendre(np.linspace(u_lo, u_hi, EDGE_PANELS + 1), PANEL_NODES)
    edge_y = np.sqrt(1.0 - np.exp(-u))
    edge_w = w_u * np.exp(-u) / (2.0 * edge_y)
    y = np.concatenate([central_y, edge_y])
    w = np.concatenate([central_w, edge_w])
    return y / a, w / a


def bump_derivative_norms(a: float, order: int) -> NDArray[np.float64]:
    """Normas L^2(R) de D^k bump_a para k = 0..order mediante la recursión de Taylor."""
    x, w = _half_line_rule(a)
    derivatives = bump_derivatives(x, a, order)
    # |D^k bump|^2 is even in x
    return np.sqrt(2.0 * np.einsum("i,ik->k", w, derivatives**2))


def _spectral_norms(a: float, order: int, nodes: int, cutoff_fraction: float = 1.0) -> NDArray[np.float64]:
    h = 2.0 / nodes
    x = -1.0 + h * np.arange(nodes)
    coeffs = fft.fft(bump(x, a))
    xi = 2.0 * np.pi * fft.fftfreq(nodes, d=h)
    keep = np.abs(coeffs) > SPECTRAL_FLOOR * np.abs(coeffs).max()
    xi_cut = np.abs(xi[keep]).max()
    keep &= np.abs(xi) <= cutoff_fraction * xi_cut
    power = np.abs(coeffs[keep]) ** 2
    k = np.arange(order + 1)
    # Parseval with the physical weight h: ||D^k u||^2 = (h / n) sum |xi|^{2k} |u_hat|^2
    return np.sqrt((h / nodes) * np.sum(np.abs(xi[keep])[None, :] ** (2 * k[:, None]) * power[None, :], axis=1))


def bump_derivative_norms_spectral(a: float, order: int, nodes: int = SPECTRAL_NODES) -> NDArray[np.float64]:
    """Las mismas normas por derivación espectral en [-1, 1), con controles de duplicado de malla y de corte.

    Lanza SpectralResolutionError con el último orden fiable cuando algún k <= order
    cambia más de RESOLUTION_RTOL al duplicar la malla o al cortar el 20% del espectro.
    """
    base = _spectral_norms(a, order, nodes)
    doubled = _spectral_norms(a, order, 2 * nodes)
    trimmed = _spectral_norms(a, order, nodes, cutoff_fraction=0.8)
    drift = np.maximum(np.abs(doubled - base), np.abs(trimmed - base)) / base
    untrusted = np.flatnonzero(drift > RESOLUTION_RTOL)
    if untrusted.size:
        trusted = int(untrusted[0]) - 1
        logger.warning(f"Spectral derivative untrusted from order {untrusted[0]} (drift {drift[untrusted[0]]:.2e}) on {nodes} nodes")
        raise SpectralResolutionError(f"spectral derivative untrusted: resolution bound is order {trusted} on a {nodes}-point grid", trusted)
    return base
