# laboratorio_operadores_no_locales/services/spherical_measure.py
"""Momentos angulares, direcciones maximizantes y constantes de elipticidad."""

import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy.special import gamma

from ..exceptions import ContractViolation, IntegratedMeasureUndefined
from ..models.measures import MeasureFamily, MeasurePart, OrderMeasure, SphericalMeasure
from ..models.reports import EllipticityReport
from .order_measure import mass

logger = logging.getLogger("laboratorio_operadores")

# --- Constants ---
UNIFORM_NODES = 4096
ANGLE_GRID = 720
GOLDEN_ITERATIONS = 40
TIE_TOLERANCE = 1e-13
EASS_TOLERANCE = 1e-10
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def discretize(sigma: SphericalMeasure, uniform_nodes: int = UNIFORM_NODES) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Direcciones (n, N) y pesos (n,) que representan sigma exacta (átomos) o por la regla del trapecio."""
    if sigma.variant == "uniform":
        if sigma.dimension == 1:
            return np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
        angles = 2.0 * np.pi * np.arange(uniform_nodes) / uniform_nodes
        return np.column_stack([np.cos(angles), np.sin(angles)]), np.full(uniform_nodes, 1.0 / uniform_nodes)
    if sigma.variant == "atomic":
        return np.array([atom.direction for atom in sigma.atoms], dtype=float), np.array([atom.weight for atom in sigma.atoms])
    directions, weights = [], []
    for component in sigma.components:
        d, w = discretize(component.measure, uniform_nodes)
        directions.append(d)
        weights.append(component.coefficient * w)
    return np.vstack(directions), np.concatenate(weights)


def _require_unit(e: NDArray[np.float64], dimension: int) -> NDArray[np.float64]:
    e = np.asarray(e, dtype=float).reshape(-1)
    if e.size != dimension:
        raise ContractViolation(f"Direction {e} does not live in dimension {dimension}")
    if abs(np.linalg.norm(e) - 1.0) > 1e-12:
        raise ContractViolation(f"Direction {e} is not a unit vector")
    return e


def angular_moments(sigma: SphericalMeasure, directions: NDArray[np.float64], alpha: float) -> NDArray[np.float64]:
    """M(e) = int |e . theta|^alpha sigma(dtheta) para muchas direcciones unitarias de forma (n, N)."""
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if sigma.variant == "uniform":
        # invariante por rotaciones: basta un punto de evaluación
        nodes, weights = discretize(sigma)
        value = float(np.sum(weights * np.abs(nodes[:, 0]) ** alpha))
        return np.full(directions.shape[0], value)
    if sigma.variant == "atomic":
        nodes, weights = discretize(sigma)
        return (np.abs(directions @ nodes.T) ** alpha) @ weights
    total = np.zeros(directions.shape[0])
    for component in sigma.components:
        total += component.coefficient * angular_moments(component.measure, directions, alpha)
    return total


def angular_moment(sigma: SphericalMeasure, e: Sequence[float], alpha: float) -> float:
    if alpha < 0:
        raise ContractViolation(f"Moment exponent must be nonnegative, got {alpha}")
    e = _require_unit(np.asarray(e), sigma.dimension)
    return float(angular_moments(sigma, e[None, :], alpha)[0])


def uniform_moment_closed_form(dimension: int, alpha: float) -> float:
    """Media de |cos|^alpha sobre S^{N-1} para N = 1, 2."""
    if dimension == 1:
        return 1.0
    return float(gamma(0.5 * (alpha + 1.0)) / (math.sqrt(math.pi) * gamma(0.5 * alpha + 1.0)))


def _atom_angles(sigma: SphericalMeasure) -> List[float]:
    if sigma.variant == "atomic":
        return [math.atan2(a.direction[1], a.direction[0]) for a in sigma.atoms]
    if sigma.variant == "mixture":
        return [angle for c in sigma.components for angle in _atom_angles(c.measure)]
    return []


def _unit(angle: float) -> NDArray[np.float64]:
    return np.array([math.cos(angle), math.sin(angle)])


def _candidate_angles(sigma: SphericalMeasure, grid_size: int) -> NDArray[np.float64]:
    grid = np.pi * np.arange(grid_size) / grid_size
    extra = []
    for angle in _atom_angles(sigma):
        extra.extend([angle % np.pi, (angle + 0.5 * np.pi) % np.pi])
    return np.unique(np.concatenate([grid, np.asarray(extra, dtype=float)]))


def maximizing_direction(sigma: SphericalMeasure, s: float) -> Tuple[NDArray[np.float64], float]:
    """Maximizador global e_s de e -> M(e) con exponente 2s, y el valor máximo.

    Malla angular densa en [0, pi) (M es par), direcciones de los átomos como candidatos extra,
    y después sección áurea en la mejor celda. Los empates van al menor ángulo.
    """
    alpha = 2.0 * s
    if sigma.dimension == 1:
        e = np.array([1.0])
        return e, float(angular_moments(sigma, e[None, :], alpha)[0])

    angles = _candidate_angles(sigma, ANGLE_GRID)
    values = angular_moments(sigma, np.column_stack([np.cos(angles), np.sin(angles)]), alpha)
    best_value = values.max()
    best = int(np.flatnonzero(values >= best_value - TIE_TOLERANCE)[0])
    best_angle, best_value = float(angles[best]), float(values[best])

    def moment_at(angle: float) -> float:
        return float(angular_moments(sigma, _unit(angle)[None, :], alpha)[0])

    half_cell = np.pi / ANGLE_GRID
    lo, hi = best_angle - half_cell, best_angle + half_cell
    c, d = hi - _GOLDEN * (hi - lo), lo + _GOLDEN * (hi - lo)
    fc, fd = moment_at(c), moment_at(d)
    for _ in range(GOLDEN_ITERATIONS):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = moment_at(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = moment_at(d)
    refined = 0.5 * (lo + hi)
    refined_value = moment_at(refined)
    if refined_value > best_value + TIE_TOLERANCE:
        best_angle, best_value = refined % np.pi, refined_value
    return _unit(best_angle), best_value


def direction_grid(sigma: SphericalMeasure, grid_size: int = ANGLE_GRID) -> NDArray[np.float64]:
    if sigma.dimension == 1:
        return np.array([[1.0], [-1.0]])
    angles = _candidate_angles(sigma, grid_size)
    return np.column_stack([np.cos(angles), np.sin(angles)])


def minimal_moment(sigma: SphericalMeasure, alpha: float) -> float:
    """inf_e M(e), muestreado en la malla angular más las direcciones ortogonales a los átomos."""
    return float(angular_moments(sigma, direction_grid(sigma), alpha).min())


def integrated_measure(family: MeasureFamily, mu_plus: Union[OrderMeasure, MeasurePart], s_star: float, t: float) -> SphericalMeasure:
    """Promedio de probabilidad de sigma_s respecto de mu+ restringida a [s_star, t].

    Los átomos entran con su peso; los trozos de densidad se integran exacto porque la
    familia es constante en subintervalos. Las medidas iguales se fusionan.
    """
    part = mu_plus.positive if isinstance(mu_plus, OrderMeasure) else mu_plus
    parts: List[Tuple[float, SphericalMeasure]] = []
    for s, w in part.atoms:
        if s_star <= s <= t:
            parts.append((w, family.sigma_at(s)))
    for a, b, v in part.density:
        lo, hi = max(a, s_star), min(b, t)
        if hi > lo and v > 0:
            for x0, x1, sigma in family.constant_intervals(lo, hi):
                parts.append((v * (x1 - x0), sigma))

    total = mass(part, s_star, t, closed=True)
    if total <= 0.0 or not parts:
        raise IntegratedMeasureUndefined(f"integrated measure undefined: mu+([{s_star}, {t}]) = 0")

    merged: List[Tuple[float, SphericalMeasure]] = []
    for weight, sigma in parts:
        for i, (w0, s0) in enumerate(merged):
            if s0 == sigma:
                merged[i] = (w0 + weight, s0)
                break
        else:
            merged.append((weight, sigma))
    if len(merged) == 1:
        return merged[0][1]
    norm = math.fsum(w for w, _ in merged)
    coefficients = [w / norm for w, _ in merged]
    # absorbe el redondeo para que la mezcla pase la validación exacta
    coefficients[-1] = 1.0 - math.fsum(coefficients[:-1])
    return SphericalMeasure.mixture(list(zip(coefficients, [m for _, m in merged])))


def ellipticity_report(
    family: MeasureFamily,
    s_grid: Sequence[float],
    s_star: Optional[float] = None,
    t: Optional[float] = None,
    mu_plus: Optional[Union[OrderMeasure, MeasurePart]] = None,
) -> EllipticityReport:
    if not s_grid:
        raise ContractViolation("ellipticity_report needs a nonempty s_grid")
    maximizers = []
    lam, lam0 = 1.0, 1.0
    for s in s_grid:
        sigma = family.sigma_at(s)
        e_s, value = maximizing_direction(sigma, s)
        maximizers.append((float(s), tuple(e_s.tolist()), value))
        lam = min(lam, value)
        lam0 = min(lam0, minimal_moment(sigma, 2.0 * s))

    lambda_tilde, eass = None, None
    if mu_plus is not None and s_star is not None and t is not None:
        sigma_tilde = integrated_measure(family, mu_plus, s_star, t)
        lambda_tilde = minimal_moment(sigma_tilde, 2.0 * s_star)
        eass = lambda_tilde > EASS_TOLERANCE
        if not eass:
            logger.warning(f"Integrated measure on [{s_star}, {t}] degenerates: lambda_tilde = {lambda_tilde:.3e}")

    return EllipticityReport(
        lambda_=min(lam, 1.0),
        lambda0=max(min(lam0, lam), 0.0),
        lambda_tilde=lambda_tilde,
        eass_satisfied=eass,
        maximizers=maximizers,
    )


def anisotropic_counterexample_family(blocks: int) -> MeasureFamily:
    """sigma_s = delta_{e1} en los bloques impares [k-1, k), uniforme en los pares, en N = 2.

    La elipticidad simple vale en todos los bloques y la fuerte falla en los impares.
    """
    breakpoints = [float(k) for k in range(blocks + 1)]
    pieces = [SphericalMeasure.dirac((1.0, 0.0)) if k % 2 == 1 else SphericalMeasure.uniform(2) for k in range(1, blocks + 1)]
    return MeasureFamily(breakpoints=breakpoints, pieces=pieces, tail=SphericalMeasure.uniform(2))
