# laboratorio_operadores_no_locales/services/order_measure.py
"""Medida de orden con signo: masas, hipótesis estructurales y series patológicas."""

import logging
import math
from typing import Literal, Optional

import numpy as np
import pandas as pd

from ..exceptions import AssumptionViolation, ContractViolation
from ..models.measures import MeasureFamily, MeasurePart, OrderMeasure
from ..models.reports import AssumptionReport
from ..util.bump import bump_derivative_norms, bump_derivative_norms_spectral

logger = logging.getLogger("laboratorio_operadores")

# --- Constants ---
MAX_TRUNCATION = 40
REFERENCE_SCALE = 2.0  # bump exp(1 - 1/(1 - (2x)^2)) on (-1/2, 1/2)

PathologicalKind = Literal["strano", "special_phi", "special_psi"]


def mass(part: MeasurePart, lo: float, hi: float = math.inf, closed: bool = False) -> float:
    """Masa exacta de una parte no negativa en [lo, hi) (o [lo, hi] con ``closed``)."""
    if lo < 0 or hi < lo:
        raise ContractViolation(f"Interval [{lo}, {hi}) must lie inside [0, inf)")
    atoms = math.fsum(w for s, w in part.atoms if lo <= s and (s < hi or (closed and s == hi)))
    density = math.fsum(v * max(0.0, min(b, hi) - max(a, lo)) for a, b, v in part.density)
    return atoms + density


def validate(
    mu: OrderMeasure,
    s_star: float,
    dimension: int,
    p_fallback: float,
    s_sharp: Optional[float] = None,
    family: Optional[MeasureFamily] = None,
) -> AssumptionReport:
    """Comprueba las hipótesis estructurales sobre mu y deduce gamma, s_sharp y 2*.

    gamma >= 1 se informa en las banderas ``valid``; los solvers lo rechazan después.
    Con ``family`` el reporte indica además si sigma en s_sharp tiene momento mínimo
    positivo, la elipticidad que se exige al orden crítico.
    """
    if p_fallback <= 2:
        raise ContractViolation(f"Fallback exponent must exceed 2, got {p_fallback}")
    positive_above = mass(mu.positive, s_star)
    if positive_above <= 0.0:
        raise AssumptionViolation(f"positive part carries no mass on [{s_star}, inf)")
    negative_above = mass(mu.negative, s_star)
    gamma = mass(mu.negative, 0.0, s_star) / positive_above

    if s_sharp is None:
        above = MeasurePart(
            atoms=[(s, w) for s, w in mu.pos_atoms if s >= s_star],
            density=[(max(a, s_star), b, v) for a, b, v in mu.pos_density if b > s_star and v > 0],
        )
        s_sharp = above.support_supremum
    if s_sharp is None or s_sharp < s_star:
        raise ContractViolation(f"s_sharp must be an order >= s_star carrying positive mass, got {s_sharp}")

    two_star = 2.0 * dimension / (dimension - 2.0 * s_sharp) if dimension > 2.0 * s_sharp else float(p_fallback)
    valid = {
        "positive_mass_above_s_star": True,
        "no_negative_mass_above_s_star": negative_above == 0.0,
        "gamma_below_one": gamma < 1.0,
    }
    if family is not None:
        from .spherical_measure import minimal_moment

        valid["critical_order_elliptic"] = minimal_moment(family.sigma_at(s_sharp), 2.0 * s_sharp) > 0.0
    if not valid["gamma_below_one"]:
        logger.warning(f"Mass ratio gamma = {gamma:.3f} >= 1: the superposed form is not guaranteed positive")
    if not valid["no_negative_mass_above_s_star"]:
        logger.warning(f"Negative part has mass {negative_above:.3e} above s_star = {s_star}")
    return AssumptionReport(s_star=s_star, gamma=gamma, s_sharp=float(s_sharp), two_star=two_star, dimension=dimension, valid=valid)


def reference_derivative_norms(order: int, scale: float = REFERENCE_SCALE, route: Literal["recurrence", "spectral"] = "recurrence") -> np.ndarray:
    if route == "spectral":
        return bump_derivative_norms_spectral(scale, order)
    return bump_derivative_norms(scale, order)


def pathological_partial_sums(
    kind: PathologicalKind,
    truncation: int,
    route: Literal["recurrence", "spectral"] = "recurrence",
    scale: float = REFERENCE_SCALE,
) -> pd.DataFrame:
    """Sumas parciales de las series detrás de los ejemplos con espacio de energía degenerado.

    Columnas: k, term, partial_sum, increment_ratio (term_{k}/term_{k-1}) y, para el
    perfil dilatado, dilation_ratio (el mismo cociente sin los pesos 1/k^2).

    - "strano": sum ||D^k phi||^2 / k^2
    - "special_phi": sum ||D^k phi|| / (c_k k^2) with c_k = ||D^k phi||
    - "special_psi": sum ||D^k psi|| / (c_k k^2) with psi(x) = phi(2x)
    """
    if not 1 <= truncation <= MAX_TRUNCATION:
        raise ContractViolation(f"Truncation must be in [1, {MAX_TRUNCATION}], got {truncation}")
    k = np.arange(1, truncation + 1)
    norms_phi = reference_derivative_norms(truncation, scale, route)[1:]
    if kind == "strano":
        terms = norms_phi**2 / k**2
    elif kind == "special_phi":
        terms = norms_phi / (norms_phi * k**2)
    elif kind == "special_psi":
        norms_psi = reference_derivative_norms(truncation, 2.0 * scale, route)[1:]
        terms = norms_psi / (norms_phi * k**2)
    else:
        raise ContractViolation(f"Unknown series kind '{kind}'")

    frame = pd.DataFrame({"k": k, "term": terms, "partial_sum": np.cumsum(terms)})
    frame["increment_ratio"] = frame["term"] / frame["term"].shift(1)
    if kind == "special_psi":
        frame["dilation_ratio"] = frame["increment_ratio"] * (k**2) / np.maximum(k - 1, 1) ** 2
    logger.info(f"Series '{kind}' up to K={truncation}: partial sum {frame['partial_sum'].iloc[-1]:.6g}")
    return frame
