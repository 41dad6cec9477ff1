# laboratorio_operadores_no_locales/models/fields.py
"""Campos suaves evaluables en R^N con su certificado de suavidad."""

import dataclasses
import math
from functools import lru_cache
from typing import Callable, Dict

import numpy as np
from numpy.typing import NDArray

from ..exceptions import ContractViolation
from ..util.bump import bump, bump_derivatives

Evaluator = Callable[[NDArray[np.float64]], NDArray[np.float64]]

# --- Constants ---
BUMP_SCALE = 2.0
SUP_SAMPLES = 20001


@lru_cache(maxsize=64)
def _bump_derivative_sups(a: float, order: int) -> tuple:
    """Normas del supremo muestreadas de D^k bump_a, k = 0..order."""
    x = np.linspace(-1.0 / a, 1.0 / a, SUP_SAMPLES)
    return tuple(np.abs(bump_derivatives(x, a, order)).max(axis=0).tolist())


@dataclasses.dataclass(frozen=True)
class SmoothField:
    """u: R^N -> R evaluada sobre arrays de puntos de forma (..., N).

    ``support_radius`` = 0 indica soporte no acotado. ``derivative_bound(k)`` acota toda
    derivada direccional de orden k, que es lo que certifica la cuadratura del campo cercano.
    """

    name: str
    dimension: int
    evaluate: Evaluator
    support_radius: float
    sup_norm: float
    derivative_bound: Callable[[int], float]

    def __call__(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.dimension:
            raise ContractViolation(f"Field '{self.name}' lives in dimension {self.dimension}, got points of shape {points.shape}")
        return self.evaluate(points)

    @property
    def compact(self) -> bool:
        return self.support_radius > 0.0

    def translated(self, shift) -> "SmoothField":
        """x -> u(x + shift)."""
        shift = np.asarray(shift, dtype=float).reshape(self.dimension)
        radius = self.support_radius + float(np.linalg.norm(shift)) if self.compact else 0.0
        return dataclasses.replace(self, name=f"{self.name}(.+{shift.tolist()})", evaluate=lambda p: self.evaluate(p + shift), support_radius=radius)

    def dilated(self, rho: float) -> "SmoothField":
        """x -> u(x / rho)."""
        if rho <= 0:
            raise ContractViolation(f"Dilation factor must be positive, got {rho}")
        return dataclasses.replace(
            self,
            name=f"{self.name}(./{rho:g})",
            evaluate=lambda p: self.evaluate(p / rho),
            support_radius=self.support_radius * rho,
            derivative_bound=lambda k: self.derivative_bound(k) * rho ** (-k),
        )

    def combine(self, alpha: float, other: "SmoothField", beta: float) -> "SmoothField":
        """alpha u + beta v."""
        if other.dimension != self.dimension:
            raise ContractViolation("Cannot combine fields of different dimension")
        radius = max(self.support_radius, other.support_radius) if self.compact and other.compact else 0.0
        return SmoothField(
            name=f"{alpha:g}*{self.name}+{beta:g}*{other.name}",
            dimension=self.dimension,
            evaluate=lambda p: alpha * self.evaluate(p) + beta * other.evaluate(p),
            support_radius=radius,
            sup_norm=abs(alpha) * self.sup_norm + abs(beta) * other.sup_norm,
            derivative_bound=lambda k: abs(alpha) * self.derivative_bound(k) + abs(beta) * other.derivative_bound(k),
        )


def bump_field(dimension: int = 1, a: float = BUMP_SCALE) -> SmoothField:
    """exp(1 - 1/(1 - a^2 x^2)) en (-1/a, 1/a), producto tensorial en N = 2."""

    def bound(k: int) -> float:
        sups = _bump_derivative_sups(a, k)
        if dimension == 1:
            return sups[k]
        # derivada direccional de un producto tensorial
        return float(sum(math.comb(k, j) * sups[j] * sups[k - j] for j in range(k + 1)))

    def evaluate(points: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.prod(bump(points, a), axis=-1)

    return SmoothField(
        name=f"bump(a={a:g})",
        dimension=dimension,
        evaluate=evaluate,
        support_radius=math.sqrt(dimension) / a,
        sup_norm=1.0,
        derivative_bound=bound,
    )


def cosine_field(dimension: int = 1, frequency: float = 1.0) -> SmoothField:
    """cos(frequency * x_1)."""
    return SmoothField(
        name=f"cos({frequency:g} x1)",
        dimension=dimension,
        evaluate=lambda p: np.cos(frequency * p[..., 0]),
        support_radius=0.0,
        sup_norm=1.0,
        derivative_bound=lambda k: abs(frequency) ** k,
    )


def constant_field(dimension: int = 1, value: float = 1.0) -> SmoothField:
    return SmoothField(
        name=f"const({value:g})",
        dimension=dimension,
        evaluate=lambda p: np.full(p.shape[:-1], value),
        support_radius=0.0,
        sup_norm=abs(value),
        derivative_bound=lambda k: abs(value) if k == 0 else 0.0,
    )


BUILTIN_FIELDS: Dict[str, Callable[..., SmoothField]] = {
    "bump": lambda dimension, parameter: bump_field(dimension, parameter or BUMP_SCALE),
    "dilated_bump": lambda dimension, parameter: bump_field(dimension, 2.0 * (parameter or BUMP_SCALE)),
    "cosine": lambda dimension, parameter: cosine_field(dimension, parameter or 1.0),
    "constant": lambda dimension, parameter: constant_field(dimension, 1.0 if parameter is None else parameter),
}


def field_from_spec(spec: str, dimension: int = 1) -> SmoothField:
    """Interpreta ``builtin:name`` o ``builtin:name:parameter``."""
    parts = spec.split(":")
    if len(parts) < 2 or parts[0] != "builtin" or parts[1] not in BUILTIN_FIELDS:
        raise ContractViolation(f"Unknown field '{spec}'. Available: {', '.join('builtin:' + n for n in BUILTIN_FIELDS)}")
    parameter = float(parts[2]) if len(parts) > 2 else None
    return BUILTIN_FIELDS[parts[1]](dimension, parameter)
