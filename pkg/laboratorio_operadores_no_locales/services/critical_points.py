# laboratorio_operadores_no_locales/services/critical_points.py
"""Puntos críticos de funcionales semilineales sobre la forma de Dirichlet discreta.

- Paso de montaña subcrítico: descenso precondicionado de E(v)/||v||_q^2 con proyección
  a la variedad de Nehari, pulido final con Newton-MINRES.
- Problemas con salto (a, b) y crecimiento crítico: Newton amortiguado desde combinaciones
  de autofunciones, comparando el nivel con la cota c_*.

Todos los vectores son valores en los nodos interiores; el producto L^2 es h^N por el euclídeo.
"""

import dataclasses
import logging
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.sparse.linalg import LinearOperator, minres

from .. import lab_config
from ..exceptions import ContractViolation, DescentStagnationError, FucikWindowError
from ..models.grids import GridFunction
from ..util.bump import bump
from .dirichlet_variational import DirichletProblem, SolveResult, eigenpairs, ensure_positive_form

logger = logging.getLogger("laboratorio_operadores")

# --- Constants ---
DESCENT_MAXITER = 400
DESCENT_SWITCH = 1e-3  # relative gradient at which Newton takes over
ARMIJO_C = 1e-4
BACKTRACK_STEPS = 30
NEWTON_MAXITER = 60
MINRES_RTOL = 1e-10
FAR_POINT_DOUBLINGS = 60
NONTRIVIAL_FLOOR = 1e-6


def _l2(problem: DirichletProblem, v: NDArray[np.float64]) -> float:
    return math.sqrt(problem.weight * float(v @ v))


def _power_integral(problem: DirichletProblem, v: NDArray[np.float64], q: float) -> float:
    return problem.weight * float(np.sum(np.abs(v) ** q))


def default_seed(problem: DirichletProblem) -> GridFunction:
    """Bump positivo centrado en Omega, nulo a distancia diameter/2 del centro."""
    mask = problem.mask
    points = mask.grid.coordinates()
    centre = points[mask.inside].mean(axis=0)
    radius = np.linalg.norm(points - centre, axis=-1) / (0.5 * mask.diameter)
    values = np.where(mask.inside, bump(radius, a=1.0), 0.0)
    return GridFunction(mask.grid, values)


def nehari_projection(problem: DirichletProblem, v: NDArray[np.float64], q: float) -> NDArray[np.float64]:
    """t* v con t* = (E(v)/||v||_q^q)^(1/(q-2)), de modo que E(u) = ||u||_q^q."""
    power = _power_integral(problem, v, q)
    if power == 0.0:
        raise ContractViolation("Nehari projection is undefined at the zero function")
    return (problem.energy(v) / power) ** (1.0 / (q - 2.0)) * v


# --- Paso de montaña ---
def _mountain_pass_parts(problem: DirichletProblem, q: float) -> Tuple[Callable, Callable, Callable]:
    def functional(u):
        return 0.5 * problem.energy(u) - _power_integral(problem, u, q) / q

    def gradient(u):
        return problem.apply(u) - np.abs(u) ** (q - 2.0) * u

    def hessian(u):
        diagonal = (q - 1.0) * np.abs(u) ** (q - 2.0)
        n = u.size
        return LinearOperator((n, n), matvec=lambda d: problem.apply(d) - diagonal * np.ravel(d), dtype=float)

    return functional, gradient, hessian


def _newton(
    problem: DirichletProblem,
    u: NDArray[np.float64],
    gradient: Callable,
    hessian: Callable,
    tol: float,
    trace: List[Dict[str, float]],
    stage: str,
) -> NDArray[np.float64]:
    residual = _l2(problem, gradient(u))
    for it in range(NEWTON_MAXITER):
        if residual <= tol:
            return u
        g = gradient(u)
        step, _ = minres(hessian(u), -g, rtol=MINRES_RTOL, maxiter=10 * u.size)
        alpha = 1.0
        for _ in range(BACKTRACK_STEPS):
            candidate = u + alpha * step
            new_residual = _l2(problem, gradient(candidate))
            if new_residual < (1.0 - ARMIJO_C * alpha) * residual:
                break
            alpha *= 0.5
        else:
            raise DescentStagnationError(f"{stage}: Newton step made no progress at residual {residual:.3e}", trace)
        u, residual = candidate, new_residual
        trace.append({"stage": stage, "iteration": it + 1, "residual": residual, "step": alpha})
    if residual > tol:
        raise DescentStagnationError(f"{stage}: Newton stopped at residual {residual:.3e} > {tol:.1e}", trace)
    return u


def mountain_pass_certificates(problem: DirichletProblem, u: NDArray[np.float64], q: float) -> Dict[str, float]:
    """Geometría en el punto calculado.

    S^2 = ||u||_q^2 / E(u) es la constante de inmersión que realiza el minimizador, así
    J >= beta = rho/4 en la esfera E = rho con rho = (q / (4 S^q))^(2/(q-2)); el punto
    lejano T u tiene E > rho y J < beta.
    """
    functional, _, _ = _mountain_pass_parts(problem, q)
    energy = problem.energy(u)
    embedding = math.sqrt(_power_integral(problem, u, q) ** (2.0 / q) / energy)
    kappa = 2.0 * embedding**q / q
    rho = (2.0 * kappa) ** (-2.0 / (q - 2.0))
    beta = 0.25 * rho
    scale = 2.0
    for _ in range(FAR_POINT_DOUBLINGS):
        if scale**2 * energy > rho and functional(scale * u) < beta:
            break
        scale *= 2.0
    level = functional(u)
    return {
        "level": level,
        "embedding_constant": embedding,
        "rho": rho,
        "beta": beta,
        "far_scale": scale,
        "far_value": functional(scale * u),
        "nehari_defect": abs(energy - _power_integral(problem, u, q)) / energy,
        "level_above_beta": level >= beta,
    }


def solve_mountain_pass(
    problem: DirichletProblem,
    q: float,
    tol: float = lab_config.TOLERANCE,
    seed: Optional[GridFunction] = None,
    maxiter: int = DESCENT_MAXITER,
) -> SolveResult:
    """Solución débil no trivial de L u = |u|^(q-2) u en Omega, u = 0 fuera, para 2 < q < 2*."""
    ensure_positive_form(problem.mult, problem.report)
    if not 2.0 < q < problem.report.two_star:
        raise ContractViolation(f"Exponent q = {q} must satisfy 2 < q < 2* = {problem.report.two_star:.4g}")
    seed = seed or default_seed(problem)
    v = problem.mask.restrict(seed)
    if not np.any(v):
        raise ContractViolation("Mountain pass seed is the zero function")
    functional, gradient, hessian = _mountain_pass_parts(problem, q)
    precondition = problem.preconditioner()
    trace: List[Dict[str, float]] = []

    def quotient(w):
        return problem.energy(w) / _power_integral(problem, w, q) ** (2.0 / q)

    v = v / _power_integral(problem, v, q) ** (1.0 / q)
    value = quotient(v)
    for it in range(maxiter):
        u = nehari_projection(problem, v, q)
        residual = _l2(problem, gradient(u))
        trace.append({"stage": "descent", "iteration": it + 1, "residual": residual, "quotient": value})
        if residual <= max(tol, DESCENT_SWITCH * _l2(problem, problem.apply(u))):
            break
        # gradiente del cociente sobre la esfera ||v||_q = 1
        direction = -precondition.matvec(problem.apply(v) - value * np.abs(v) ** (q - 2.0) * v)
        slope = 2.0 * problem.weight * float((problem.apply(v) - value * np.abs(v) ** (q - 2.0) * v) @ direction)
        alpha = 1.0
        for _ in range(BACKTRACK_STEPS):
            candidate = v + alpha * direction
            candidate_value = quotient(candidate)
            if candidate_value <= value + ARMIJO_C * alpha * slope:
                break
            alpha *= 0.5
        else:
            raise DescentStagnationError(f"descent stagnated at quotient {value:.6g}", trace)
        v = candidate / _power_integral(problem, candidate, q) ** (1.0 / q)
        value = quotient(v)
    else:
        logger.warning(f"Descent used all {maxiter} iterations, handing over to Newton")

    u = _newton(problem, nehari_projection(problem, v, q), gradient, hessian, tol, trace, "newton")
    if _l2(problem, u) < NONTRIVIAL_FLOOR:
        raise DescentStagnationError("iteration collapsed to the trivial solution", trace)
    residual = _l2(problem, gradient(u))
    extras = mountain_pass_certificates(problem, u, q)
    logger.info(f"Mountain pass: level {extras['level']:.6g}, beta {extras['beta']:.3e}, residual {residual:.2e}")
    return SolveResult(problem.mask.extend(u), residual, problem.energy(u), trace, True, extras)


# --- Problemas con salto ---
def _jumping_parts(problem: DirichletProblem, a: float, b: float, p: float) -> Tuple[Callable, Callable, Callable]:
    w = problem.weight

    def functional(u):
        plus, minus = np.maximum(u, 0.0), np.maximum(-u, 0.0)
        quadratic = w * float(a * minus @ minus + b * plus @ plus)
        return 0.5 * problem.energy(u) - 0.5 * quadratic - _power_integral(problem, u, p) / p

    def gradient(u):
        return problem.apply(u) - (b * np.maximum(u, 0.0) - a * np.maximum(-u, 0.0)) - np.abs(u) ** (p - 2.0) * u

    def hessian(u):
        diagonal = np.where(u > 0, b, a) + (p - 1.0) * np.abs(u) ** (p - 2.0)
        n = u.size
        return LinearOperator((n, n), matvec=lambda d: problem.apply(d) - diagonal * np.ravel(d), dtype=float)

    return functional, gradient, hessian


def jumping_functional(problem: DirichletProblem, a: float, b: float, two_star: float, u: GridFunction) -> Tuple[float, GridFunction]:
    """Valor y gradiente L^2 de 1/2 E(u,u) - 1/2 int (a (u-)^2 + b (u+)^2) - 1/2* int |u|^2*."""
    problem.mask.require_supported(u)
    functional, gradient, _ = _jumping_parts(problem, a, b, two_star)
    inner = problem.mask.restrict(u)
    return functional(inner), problem.mask.extend(gradient(inner))


def brezis_nirenberg_functional(problem: DirichletProblem, lam: float, two_star: float, u: GridFunction) -> Tuple[float, GridFunction]:
    return jumping_functional(problem, lam, lam, two_star, u)


def critical_level_bound(problem: DirichletProblem, eigenvalue: float, a: float, b: float, p: float) -> float:
    """c_* = (1/2 - 1/2*) |Omega| (lambda_l - min(a, b))^(2*/(2*-2)); un salto no positivo da 0."""
    gap = eigenvalue - min(a, b)
    if gap <= 0:
        return 0.0
    return (0.5 - 1.0 / p) * problem.mask.measure * gap ** (p / (p - 2.0))


def jumping_solve(
    problem: DirichletProblem,
    a: float,
    b: float,
    l: int,
    tol: float = lab_config.TOLERANCE,
) -> SolveResult:
    """Solución no trivial de L u = b u+ - a u- + |u|^(2*-2) u con (a, b) en (lambda_{l-1}, lambda_{l+1})^2.

    Las semillas son phi_l y phi_l +- phi_{l-1}, escaladas al máximo del funcional en su
    rayo; cada una corre un Newton amortiguado y se queda el menor nivel no trivial.
    """
    ensure_positive_form(problem.mult, problem.report)
    if l < 1:
        raise ContractViolation(f"Eigenvalue index l must be >= 1, got {l}")
    p = problem.report.two_star
    spectrum = eigenpairs(problem.mult, problem.mask, l + 1, report=problem.report)
    lam = np.concatenate([[0.0], spectrum.eigenvalues])
    lower, upper = lam[l - 1], lam[l + 1]
    for name, value in (("a", a), ("b", b)):
        if not lower < value < upper:
            raise FucikWindowError(f"{name} = {value:.6g} outside the window ({lower:.6g}, {upper:.6g}) around lambda_{l} = {lam[l]:.6g}")

    functional, gradient, hessian = _jumping_parts(problem, a, b, p)
    phi = [problem.mask.restrict(v) for v in spectrum.vectors]
    seeds = {"phi_l": phi[l - 1]}
    if l >= 2:
        seeds["phi_l+phi_(l-1)"] = phi[l - 1] + phi[l - 2]
        seeds["phi_l-phi_(l-1)"] = phi[l - 1] - phi[l - 2]

    trace: List[Dict[str, float]] = []
    found: List[Tuple[float, NDArray[np.float64], str]] = []
    w = problem.weight
    for name, v in seeds.items():
        plus, minus = np.maximum(v, 0.0), np.maximum(-v, 0.0)
        gap = problem.energy(v) - w * float(a * minus @ minus + b * plus @ plus)
        if gap <= 0:
            logger.info(f"Seed {name}: functional decreases along the ray, skipped")
            continue
        start = (gap / _power_integral(problem, v, p)) ** (1.0 / (p - 2.0)) * v
        try:
            u = _newton(problem, start, gradient, hessian, tol, trace, name)
        except DescentStagnationError as exc:
            logger.warning(f"Seed {name}: {exc}")
            continue
        if _l2(problem, u) > NONTRIVIAL_FLOOR:
            found.append((functional(u), u, name))
    if not found:
        raise DescentStagnationError("no seed converged to a nontrivial critical point", trace)

    level, u, name = min(found, key=lambda item: item[0])
    c_star = critical_level_bound(problem, float(lam[l]), a, b, p)
    residual = _l2(problem, gradient(u))
    logger.info(f"Jumping problem: level {level:.6g} from seed {name}, c_* = {c_star:.6g}")
    extras = {
        "level": level,
        "critical_level": c_star,
        "below_critical_level": 0.0 < level < c_star,
        "lambda_l": float(lam[l]),
        "window_lower": float(lower),
        "window_upper": float(upper),
    }
    return SolveResult(problem.mask.extend(u), residual, problem.energy(u), trace, True, extras)
