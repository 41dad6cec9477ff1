# laboratorio_operadores_no_locales/services/spectral_forms.py
"""Realización espectral en la caja periódica: símbolos, aplicación de L y formas de energía.

Normalización: con h el paso y n^N el número de nodos, ||u||^2 = h^N sum |u|^2 =
(h^N / n^N) sum |u_hat|^2, de modo que E(u, v) = (h^N / n^N) sum m(xi) u_hat conj(v_hat).
"""

import dataclasses
import logging
import math
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from scipy import fft, integrate

from ..exceptions import ContractViolation, DomainError, SupportTouchesBoundaryError
from ..models.grids import GridFunction, GridSpec, MultiplierGrid
from ..models.measures import MeasureFamily, OrderMeasure, SphericalMeasure
from ..models.reports import QuadratureSpec
from ..util.difference_operator import stencil
from ..util.quadrature import even_fit_integral, gauss_legendre
from .kernel_constants import normalization_constant, poincare_constant
from .spherical_measure import angular_moments, direction_grid, maximizing_direction, minimal_moment

logger = logging.getLogger("laboratorio_operadores")

# --- Constants ---
IMAGINARY_RTOL = 1e-12
ORACLE_NEAR_CELLS = 24  # near field of the oracle spans at least this many grid cells


def multiplier(sigma: SphericalMeasure, s: float, xi: NDArray[np.float64]) -> NDArray[np.float64]:
    """|xi|^(2s) M_{s,sigma}(xi/|xi|) / M_{s,sigma}(e_s); 1 si s = 0 y 0 en xi = 0 en otro caso.

    ``xi`` tiene forma (..., N); el resultado, forma (...).
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != sigma.dimension:
        raise ContractViolation(f"Frequencies of shape {xi.shape} do not match sphere dimension {sigma.dimension}")
    if s < 0:
        raise DomainError(f"Multiplier needs s >= 0, got {s}")
    if s == 0.0:
        return np.ones(xi.shape[:-1])
    norms = np.linalg.norm(xi, axis=-1)
    out = np.zeros(xi.shape[:-1])
    nonzero = norms > 0
    if np.any(nonzero):
        directions = xi[nonzero] / norms[nonzero][:, None]
        _, top = maximizing_direction(sigma, s)
        out[nonzero] = norms[nonzero] ** (2.0 * s) * angular_moments(sigma, directions, 2.0 * s) / top
    return out


def superposition_multiplier(mu: OrderMeasure, family: MeasureFamily, xi: NDArray[np.float64], order_nodes: int = 32) -> NDArray[np.float64]:
    """int multiplier(sigma_s, s, xi) mu(ds); los valores negativos se permiten pero se registran."""
    xi = np.asarray(xi, dtype=float)
    total = np.zeros(xi.shape[:-1])
    for sign, atoms, density in ((1.0, mu.pos_atoms, mu.pos_density), (-1.0, mu.neg_atoms, mu.neg_density)):
        for s, w in atoms:
            total += sign * w * multiplier(family.sigma_at(s), s, xi)
        for a, b, level in density:
            for lo, hi, sigma in family.constant_intervals(a, b):
                nodes, weights = gauss_legendre(lo, hi, order_nodes)
                for s, w in zip(nodes, weights):
                    total += sign * level * w * multiplier(sigma, float(s), xi)
    if total.size and total.min() < 0:
        logger.warning(f"Superposition multiplier is negative somewhere (min {total.min():.3e}): the negative part dominates")
    return total


def multiplier_grid(sigma: SphericalMeasure, s: float, grid: GridSpec) -> MultiplierGrid:
    return MultiplierGrid(grid, multiplier(sigma, s, grid.frequencies()))


def superposition_multiplier_grid(mu: OrderMeasure, family: MeasureFamily, grid: GridSpec, order_nodes: int = 32) -> MultiplierGrid:
    return MultiplierGrid(grid, superposition_multiplier(mu, family, grid.frequencies(), order_nodes))


def apply_spectral(mult: MultiplierGrid, u: GridFunction) -> GridFunction:
    """Transformada inversa de m(xi) u_hat(xi); el residuo imaginario se controla y se descarta."""
    mult.grid.require_same(u.grid)
    transformed = fft.ifftn(mult.values * fft.fftn(u.values))
    real_norm = np.linalg.norm(transformed.real)
    if real_norm > 0 and np.linalg.norm(transformed.imag) > IMAGINARY_RTOL * real_norm:
        logger.warning(f"Spectral output has imaginary part {np.linalg.norm(transformed.imag):.3e} against {real_norm:.3e}")
    return u.with_values(transformed.real)


def energy(u: GridFunction, v: GridFunction, mult: MultiplierGrid) -> float:
    mult.grid.require_same(u.grid)
    mult.grid.require_same(v.grid)
    grid = u.grid
    weight = grid.cell_volume / grid.nodes**grid.dimension
    return float(weight * np.real(np.sum(mult.values * fft.fftn(u.values) * np.conj(fft.fftn(v.values)))))


def _support_indices(u: GridFunction) -> NDArray[np.int64]:
    nonzero = np.flatnonzero(u.values != 0.0)
    if nonzero.size == 0:
        return nonzero
    margin = u.grid.nodes // 4
    if nonzero.min() < margin or nonzero.max() >= u.grid.nodes - margin:
        raise SupportTouchesBoundaryError(f"Support reaches within L/4 of the box boundary (nodes {nonzero.min()}..{nonzero.max()} of {u.grid.nodes})")
    return nonzero


def energy_bruteforce_1d(u: GridFunction, m: int, s: float, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """(c_{2m,s}/2) int int (delta_m u(x, r))^2 r^(-1-2s) dr dx por suma directa, N = 1, sigma uniforme.

    Los radios son múltiplos del paso de malla y cada traslación es un corrimiento exacto de
    índices sobre una copia con ceros. Campo cercano: ajuste polinómico en r^2 integrado exacto;
    campo medio: Simpson en los radios de la malla; más allá del diámetro del soporte solo
    sobreviven los términos diagonales, que aportan C(4m, 2m) ||u||^2 / (2s R^(2s)).
    """
    if u.grid.dimension != 1:
        raise ContractViolation("The brute-force energy oracle is one-dimensional")
    if not 0.0 < s < 2 * m:
        raise DomainError(f"E_(2m,s) needs 0 < s < 2m, got m={m}, s={s}")
    support = _support_indices(u)
    if support.size == 0:
        return 0.0
    h = u.grid.spacing
    offsets, weights = stencil(m).as_arrays()
    reach = int(support.max() - support.min()) + 1
    padded = np.pad(u.values, m * reach + 1)

    def radial_profile(j: NDArray[np.int64]) -> NDArray[np.float64]:
        # F(jh) = h sum_x (delta_m u(x, jh))^2
        out = np.empty(len(j))
        for i, shift in enumerate(j):
            diff = sum(w * np.roll(padded, -int(k) * int(shift)) for k, w in zip(offsets, weights))
            out[i] = h * np.sum(diff**2)
        return out

    near_cells = max(ORACLE_NEAR_CELLS, int(math.ceil(spec.near_split / h)))
    near_cells = min(near_cells, reach)
    eta = near_cells * h
    first = max(1, int(math.ceil(near_cells / 4)))
    j_near = np.arange(first, near_cells + 1)
    radii = j_near * h
    near, _ = even_fit_integral((radii / eta) ** 2, radial_profile(j_near) / radii ** (4 * m), eta, 4.0 * m - 2.0 * s, degree=min(8, len(j_near) - 1))

    j_mid = np.arange(near_cells, reach + 1)
    radii = j_mid * h
    mid_values = radial_profile(j_mid) * radii ** (-1.0 - 2.0 * s)
    mid = integrate.simpson(mid_values, x=radii) if len(radii) > 2 else integrate.trapezoid(mid_values, x=radii)

    far = math.comb(4 * m, 2 * m) * u.l2_norm_squared() / (2.0 * s * (reach * h) ** (2.0 * s))
    constant = normalization_constant(2 * m, s, SphericalMeasure.uniform(1)).c_ms
    return 0.5 * constant * (near + mid + far)


@dataclasses.dataclass
class XNormReport:
    norm: float
    e_plus: float
    e_minus: float
    blocks: pd.DataFrame


def x_norm(u: GridFunction, mu: OrderMeasure, family: MeasureFamily, order_nodes: int = 32) -> XNormReport:
    """||u||_X^2 = ||u||^2 + E_+(u, u), E_- aparte, y E_+ repartida en bloques de orden [k-1, k)."""
    freqs = u.grid.frequencies()
    u_hat = fft.fftn(u.values)
    power = u.grid.cell_volume / u.grid.nodes**u.grid.dimension * np.abs(u_hat) ** 2

    def part_energy(part: OrderMeasure) -> float:
        return float(np.sum(superposition_multiplier(part, family, freqs, order_nodes) * power))

    positive = OrderMeasure(pos_atoms=mu.pos_atoms, pos_density=mu.pos_density)
    negative = OrderMeasure(pos_atoms=mu.neg_atoms, pos_density=mu.neg_density)
    e_plus = part_energy(positive)
    e_minus = part_energy(negative)

    top = max([s for s, _ in mu.pos_atoms] + [b for _, b, _ in mu.pos_density] + [0.0])
    rows = []
    for k in range(1, math.floor(top) + 2):
        block = OrderMeasure(
            pos_atoms=[(s, w) for s, w in mu.pos_atoms if k - 1 <= s < k],
            pos_density=[(max(a, k - 1), min(b, k), v) for a, b, v in mu.pos_density if a < k and b > k - 1],
        )
        rows.append({"block": k, "lower": k - 1, "upper": k, "energy": part_energy(block)})
    blocks = pd.DataFrame(rows)
    blocks["partial_sum"] = blocks["energy"].cumsum()
    return XNormReport(norm=math.sqrt(u.l2_norm_squared() + e_plus), e_plus=e_plus, e_minus=e_minus, blocks=blocks)


def _moment_ratio_bound(sigma_t: SphericalMeasure, t: float, sigma_s: SphericalMeasure, s: float) -> float:
    """Menor Lambda con M_{t,sigma_t} <= Lambda M_{s,sigma_s} en la malla de direcciones."""
    directions = np.vstack([direction_grid(sigma_t), direction_grid(sigma_s)])
    m_t = angular_moments(sigma_t, directions, 2.0 * t)
    m_s = angular_moments(sigma_s, directions, 2.0 * s)
    if np.any((m_s <= 0.0) & (m_t > 0.0)):
        return math.inf
    positive = m_s > 0.0
    return float(np.max(m_t[positive] / m_s[positive]))


def comparison_suite(
    u: GridFunction,
    sigma_s: SphericalMeasure,
    s: float,
    sigma_t: Optional[SphericalMeasure] = None,
    t: Optional[float] = None,
    diameter: Optional[float] = None,
    gammas: Sequence[float] = (0.0, 0.1, 0.5, 0.9),
) -> pd.DataFrame:
    """Desigualdades de energía entre la forma anisótropa, la forma pura |xi|^(2s) y órdenes menores.

    Filas: upper_by_pure (E_{2n,s} <= E_s / M(e_s)), pure_by_anisotropic (E_s <= M(e_s)/lambda0 E_{2n,s},
    solo con sentido si lambda0 > 0), lower_order (E_t <= Lambda/lambda (||u||^2 + E_s)),
    lower_order_bounded (E_t <= Lambda (1 + C)/lambda E_s con la constante de Poincaré de Omega)
    y filas negative_ratio con E_-/E_+ para mu = delta_s - gamma delta_t.
    """
    grid = u.grid
    xi = grid.frequencies()
    sigma_t = sigma_t or sigma_s
    t = 0.5 * s if t is None else t
    if not 0.0 < t <= s:
        raise ContractViolation(f"Need 0 < t <= s, got t={t}, s={s}")

    pure = energy(u, u, MultiplierGrid(grid, np.linalg.norm(xi, axis=-1) ** (2.0 * s)))
    aniso_s = energy(u, u, MultiplierGrid(grid, multiplier(sigma_s, s, xi)))
    aniso_t = energy(u, u, MultiplierGrid(grid, multiplier(sigma_t, t, xi)))
    _, top_s = maximizing_direction(sigma_s, s)
    _, top_t = maximizing_direction(sigma_t, t)
    lambda0 = minimal_moment(sigma_s, 2.0 * s)
    lam = min(top_s, top_t)
    big_lambda = max(lam, _moment_ratio_bound(sigma_t, t, sigma_s, s))
    l2 = u.l2_norm_squared()
    slack = 1e-10 * max(1.0, pure)

    rows = [
        {"check": "upper_by_pure", "lhs": aniso_s, "rhs": pure / top_s, "applicable": True},
        {
            "check": "pure_by_anisotropic",
            "lhs": pure,
            "rhs": top_s / lambda0 * aniso_s if lambda0 > 0 else math.inf,
            "applicable": lambda0 > 0,
        },
        {"check": "lower_order", "lhs": aniso_t, "rhs": big_lambda / lam * (l2 + aniso_s), "applicable": math.isfinite(big_lambda)},
    ]
    if diameter is not None:
        bound = big_lambda * (1.0 + poincare_constant(s, diameter)) / lam * aniso_s
        rows.append({"check": "lower_order_bounded", "lhs": aniso_t, "rhs": bound, "applicable": math.isfinite(big_lambda)})
    for gamma_value in gammas:
        ratio = gamma_value * aniso_t / aniso_s if aniso_s > 0 else math.nan
        rows.append({"check": f"negative_ratio(gamma={gamma_value:g})", "lhs": ratio, "rhs": math.nan, "applicable": False})

    frame = pd.DataFrame(rows)
    frame["passed"] = ~frame["applicable"] | (frame["lhs"] <= frame["rhs"] + slack)
    frame.attrs.update({"lambda0": lambda0, "lambda": lam, "Lambda": big_lambda, "M_at_es": top_s})
    return frame
