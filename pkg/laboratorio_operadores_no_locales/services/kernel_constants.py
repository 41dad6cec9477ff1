# laboratorio_operadores_no_locales/services/kernel_constants.py
"""Constantes de normalización c_{m,s}: coeficientes P_a, integrales de coseno y límites en s.

Tres rutas independientes para la integral I(m, s) = int_0^inf (1 - cos t)^m t^(-1-2s) dt:
forma cerrada con la función Gamma, cuadratura (peso algebraico cerca de 0 y peso de
Fourier en la cola) y la recursión entre órdenes c_{n,s} P_n(s) = c_{m,s} P_m(s).
"""

import logging
import math
from functools import lru_cache
from typing import List, Literal, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import integrate
from scipy.special import gamma

from ..exceptions import DomainError, RecursionDegenerateError
from ..models.measures import MeasureFamily, SphericalMeasure
from ..models.reports import ConstantBundle, Route
from .spherical_measure import maximizing_direction

logger = logging.getLogger("laboratorio_operadores")

# --- Constants ---
DEFAULT_TOLERANCE = 1e-10
QUAD_LIMIT = 400
INTEGER_SNAP = 1e-12  # 2s this close to an integer goes to quadrature
ROUTES: List[Route] = ["closed_form", "recursion", "quadrature"]


def _check_order(m: int, s: float) -> None:
    if m < 1:
        raise DomainError(f"Order m must be a positive integer, got {m}")
    if not 0.0 < s < m:
        raise DomainError(f"s = {s} outside (0, {m}): the cosine integral diverges (blow-up like 1/s + 1/(m - s))")


def pa_coefficient(a: int, s: float) -> float:
    """P_a(s) = sum_{k=1}^{a} (-1)^k C(2a, a-k) k^(2s), con binomiales exactos."""
    if a < 1:
        raise DomainError(f"P_a needs a >= 1, got {a}")
    terms = [(-1) ** k * math.comb(2 * a, a - k) * math.exp(2.0 * s * math.log(k)) for k in range(1, a + 1)]
    return math.fsum(terms)


@lru_cache(maxsize=None)
def trigonometric_coefficients(m: int) -> tuple:
    """A_p con (1 - cos t)^m = sum_{p=0}^{m} A_p cos(p t)."""
    a0 = math.comb(2 * m, m) / 2.0**m
    rest = tuple(2.0 ** (1 - m) * (-1) ** p * math.comb(2 * m, m - p) for p in range(1, m + 1))
    return (a0,) + rest


def _near_profile(m: int):
    # ((1 - cos t) / t^2)^m sin cancelación: 1 - cos t = 2 sin^2(t/2)
    def profile(t: float) -> float:
        if t == 0.0:
            return 0.5**m
        return (2.0 * math.sin(0.5 * t) ** 2 / (t * t)) ** m

    return profile


def cosine_integral(m: int, s: float, tol: float = DEFAULT_TOLERANCE) -> float:
    """I(m, s) por cuadratura con precisión absoluta ``tol``.

    En (0, 1] el factor t^(2m-1-2s) es el peso algebraico de la regla; en (1, inf) el
    desarrollo trigonométrico deja un término constante exacto y colas con peso coseno.
    """
    _check_order(m, s)
    coefficients = trigonometric_coefficients(m)
    near, near_err = integrate.quad(
        _near_profile(m), 0.0, 1.0, weight="alg", wvar=(2 * m - 1 - 2 * s, 0.0), epsabs=tol / 4, epsrel=0.0, limit=QUAD_LIMIT
    )
    far = coefficients[0] / (2.0 * s)
    far_err = 0.0
    for p, coefficient in enumerate(coefficients[1:], start=1):
        value, err = integrate.quad(lambda t: t ** (-1.0 - 2.0 * s), 1.0, np.inf, weight="cos", wvar=p, epsabs=tol / (4 * m), limlst=200)
        far += coefficient * value
        far_err += abs(coefficient) * err
    if near_err + far_err > tol:
        logger.warning(f"Cosine integral m={m}, s={s}: error estimate {near_err + far_err:.2e} above tolerance {tol:.1e}")
    return near + far


def is_removable_point(s: float) -> bool:
    return abs(2.0 * s - round(2.0 * s)) < INTEGER_SNAP


def closed_form_cosine_integral(m: int, s: float) -> Optional[float]:
    """2^(1-m) P_m(s) cos(pi s) Gamma(-2s); None en los puntos evitables 2s en Z."""
    _check_order(m, s)
    if is_removable_point(s):
        return None
    return float(2.0 ** (1 - m) * pa_coefficient(m, s) * math.cos(math.pi * s) * gamma(-2.0 * s))


def _constant_from_integral(m: int, moment: float, integral: float) -> float:
    return 2.0 ** (1 - m) / (moment * integral)


def normalization_constant(
    m: int,
    s: float,
    sigma: SphericalMeasure,
    route: Route = "closed_form",
    tol: float = DEFAULT_TOLERANCE,
) -> ConstantBundle:
    """c_{m,s} = 2^(1-m) / (M(e_s) I(m, s)) por la vía pedida.

    La forma cerrada recurre a la cuadratura en 2s en Z y el paquete registra la vía
    realmente usada. La vía recursiva se ancla en el menor orden admisible
    s_1 = floor(s) + 1 (o el siguiente cuando m = s_1) calculado por cuadratura.
    """
    _check_order(m, s)
    _, moment = maximizing_direction(sigma, s)

    if route == "closed_form":
        integral = closed_form_cosine_integral(m, s)
        if integral is None:
            logger.info(f"Removable point 2s = {2 * s:g}: closed form replaced by quadrature")
            integral, route = cosine_integral(m, s, tol), "quadrature"
        c = _constant_from_integral(m, moment, integral)
    elif route == "quadrature":
        integral = cosine_integral(m, s, tol)
        c = _constant_from_integral(m, moment, integral)
    elif route == "recursion":
        base = math.floor(s) + 1
        if base == m:
            base = m + 1
        p_m, p_base = pa_coefficient(m, s), pa_coefficient(base, s)
        if abs(p_m) < INTEGER_SNAP or abs(p_base) < INTEGER_SNAP:
            raise RecursionDegenerateError(f"recursion degenerate, use quadrature: P_{m}({s}) = {p_m:.3e}, P_{base}({s}) = {p_base:.3e}")
        c_base = _constant_from_integral(base, moment, cosine_integral(base, s, tol))
        c = c_base * p_base / p_m
        integral = 2.0 ** (1 - m) / (moment * c)
    else:
        raise DomainError(f"Unknown route '{route}', expected one of {ROUTES}")

    return ConstantBundle(m=m, s=s, M_at_es=moment, cosine_integral=integral, c_ms=c, route=route)


def constant_routes(m: int, s: float, sigma: SphericalMeasure, tol: float = DEFAULT_TOLERANCE) -> pd.DataFrame:
    """Todas las vías lado a lado con la dispersión relativa frente a la cuadratura."""
    rows = []
    reference = normalization_constant(m, s, sigma, "quadrature", tol).c_ms
    for route in ROUTES:
        try:
            bundle = normalization_constant(m, s, sigma, route, tol)
        except RecursionDegenerateError as exc:
            logger.info(f"Route '{route}' skipped at m={m}, s={s}: {exc}")
            continue
        rows.append({**bundle.model_dump(), "requested_route": route, "relative_deviation": abs(bundle.c_ms - reference) / reference})
    return pd.DataFrame(rows)


def cross_order_deviation(m: int, n: int, s: float, sigma: SphericalMeasure, tol: float = DEFAULT_TOLERANCE) -> float:
    """|c_{n,s} P_n(s) - c_{m,s} P_m(s)| / |c_{m,s} P_m(s)|, ambas constantes por cuadratura."""
    c_m = normalization_constant(m, s, sigma, "quadrature", tol).c_ms
    c_n = normalization_constant(n, s, sigma, "quadrature", tol).c_ms
    lhs, rhs = c_n * pa_coefficient(n, s), c_m * pa_coefficient(m, s)
    if rhs == 0.0:
        return abs(lhs)
    return abs(lhs - rhs) / abs(rhs)


def limit_target(m: int, n: int, direction: Literal["zero", "order"]) -> float:
    if direction == "zero":
        return 4.0 / math.comb(2 * m, m)
    p_n = pa_coefficient(n, float(m))
    if abs(p_n) < INTEGER_SNAP:
        return math.inf
    return 4.0 * pa_coefficient(m, float(m)) / p_n


def constant_limits(
    m: int,
    n: int,
    family: MeasureFamily,
    s_sequence: Sequence[float],
    direction: Literal["zero", "order"],
    tol: float = DEFAULT_TOLERANCE,
) -> pd.DataFrame:
    """Comportamiento de las constantes en los extremos.

    dirección "zero": c_{m,s} M / s con objetivo 4 / C(2m, m) = 2 / (-P_m(0)).
    dirección "order": c_{n,s} M / (m - s) con objetivo 4 P_m(m) / P_n(m), infinito si P_n(m) = 0.
    La tabla lleva en ``attrs`` la extrapolación lineal de las tres últimas filas.
    """
    if n < m:
        raise DomainError(f"Need n >= m, got n={n}, m={m}")
    rows = []
    for s in s_sequence:
        sigma = family.sigma_at(s)
        if direction == "zero":
            bundle = normalization_constant(m, s, sigma, "closed_form", tol)
            distance = s
        else:
            bundle = normalization_constant(n, s, sigma, "closed_form", tol)
            distance = m - s
        rows.append({"s": s, "distance": distance, "c": bundle.c_ms, "M_at_es": bundle.M_at_es, "quantity": bundle.c_ms * bundle.M_at_es / distance})

    frame = pd.DataFrame(rows).sort_values("distance", ascending=False, ignore_index=True)
    target = limit_target(m, n, direction)
    frame["target"] = target
    frame["deviation"] = (frame["quantity"] - target).abs() if math.isfinite(target) else np.inf
    tail = frame.tail(3)
    if len(tail) >= 2:
        slope, intercept = np.polyfit(tail["distance"], tail["quantity"], 1)
        frame.attrs["extrapolated"] = float(intercept)
    else:
        frame.attrs["extrapolated"] = float(frame["quantity"].iloc[-1])
    frame.attrs["target"] = target
    logger.info(f"Constant limit m={m}, n={n}, {direction}: extrapolated {frame.attrs['extrapolated']:.6g}, target {target:.6g}")
    return frame


def rigorous_lower_bound(m: int, s: float) -> float:
    """2^(2-2m+2s) <= c_{m,s} (1/s + 1/(m-s)) M(e_s), por (1 - cos t)^m <= min(2^m, t^(2m) / 2^m)."""
    return 2.0 ** (2 - 2 * m + 2 * s)


def constant_bounds_table(m: int, s_grid: Sequence[float], sigma: SphericalMeasure, tol: float = DEFAULT_TOLERANCE) -> pd.DataFrame:
    """c (1/s + 1/(m-s)) M sobre una malla, con la cota inferior rigurosa, el valor nominal 2^(2-m) y los límites en los extremos."""
    """c (1/s + 1/(m-s)) M over a grid, with the rigorous lower bound, the nominal 2^(2-m) and the endpoint limits."""
    rows = []
    for s in s_grid:
        bundle = normalization_constant(m, s, sigma, "closed_form", tol)
        scaled = bundle.c_ms * (1.0 / s + 1.0 / (m - s)) * bundle.M_at_es
        lower = rigorous_lower_bound(m, s)
        rows.append(
            {
                "s": s,
                "c_ms": bundle.c_ms,
                "M_at_es": bundle.M_at_es,
                "scaled": scaled,
                "lower_bound": lower,
                "nominal_lower_bound": 2.0 ** (2 - m),
                "passed": scaled >= lower * (1.0 - 1e-10),
            }
        )
    frame = pd.DataFrame(rows)
    frame.attrs["limit_at_zero"] = 4.0 / math.comb(2 * m, m)
    frame.attrs["limit_at_order"] = 4.0
    return frame


def poincare_constant(s: float, diameter: float) -> float:
    """C = 2^(4 s_1 + 1) C(2 s_1, s_1)^(-2) diam^(2s), de modo que ||u||^2 <= C E_{2 s_1, s}(u, u) en Omega."""
    if s <= 0 or diameter <= 0:
        raise DomainError(f"Poincare constant needs s > 0 and diam > 0, got s={s}, diam={diameter}")
    s1 = math.floor(s) + 1
    return 2.0 ** (4 * s1 + 1) / math.comb(2 * s1, s1) ** 2 * diameter ** (2.0 * s)


def generalized_poincare_constant(t: float, diameter: float) -> float:
    """C_t = min(1, diam^(-2t)) / (2 pi (t_1 + 1)), válida para todo orden s en [0, t]."""
    if t < 0 or diameter <= 0:
        raise DomainError(f"Generalized Poincare constant needs t >= 0 and diam > 0, got t={t}, diam={diameter}")
    t1 = math.floor(t) + 1
    return min(1.0, diameter ** (-2.0 * t)) / (2.0 * math.pi * (t1 + 1))
