# laboratorio_operadores_no_locales/util/difference_operator.py
"""Diferencia simétrica de orden 2m y las identidades combinatorias que la acompañan."""

import dataclasses
from functools import lru_cache
from math import comb
from typing import Callable, Tuple

import numpy as np
from numpy.typing import NDArray

from ..exceptions import DomainError

MAX_EXACT_ORDER = 8


@dataclasses.dataclass(frozen=True)
class DifferenceStencil:
    """Desplazamientos k en [-m, m] con pesos (-1)^k C(2m, m-k) como enteros exactos."""

    m: int
    offsets: Tuple[int, ...]
    weights: Tuple[int, ...]

    @property
    def central_weight(self) -> int:
        return self.weights[self.m]

    @property
    def absolute_sum(self) -> int:
        return sum(abs(w) for w in self.weights)

    def as_arrays(self) -> Tuple[NDArray[np.int64], NDArray[np.float64]]:
        return np.asarray(self.offsets), np.asarray(self.weights, dtype=float)


@lru_cache(maxsize=None)
def stencil(m: int) -> DifferenceStencil:
    if m < 1:
        raise DomainError(f"Difference order m must be >= 1, got {m}")
    offsets = tuple(range(-m, m + 1))
    weights = tuple((-1) ** abs(k) * comb(2 * m, m - k) for k in offsets)
    return DifferenceStencil(m, offsets, weights)


def delta_m(u: Callable[[np.ndarray], np.ndarray], x, y, m: int):
    """sum_{k=-m}^{m} (-1)^k C(2m, m-k) u(x + k y).

    ``x`` e ``y`` se difunden entre sí; ``u`` debe aceptar los arrays resultantes.
    """
    st = stencil(m)
    x = np.asarray(x)
    y = np.asarray(y)
    total = 0.0
    for k, w in zip(st.offsets, st.weights):
        total = total + w * u(x + k * y)
    return total


def cosine_power_identity_deviation(m: int, t: NDArray[np.float64]) -> float:
    """max_t |delta_m e^{i.}(0, t) - 2^m (1 - cos t)^m|."""
    lhs = delta_m(lambda z: np.exp(1j * z), 0.0, np.asarray(t, dtype=float), m)
    rhs = 2.0**m * (1.0 - np.cos(t)) ** m
    return float(np.max(np.abs(lhs - rhs)))


def chu_vandermonde_check(m: int) -> bool:
    """Comprobación exacta de que el producto de dos plantillas de orden m da la de orden 2m.

    Para todo h en [-2m, 2m], sum_k C(2m, m-k) C(2m, m-k+h) = C(4m, 2m-h), con
    C(a, b) = 0 fuera de 0 <= b <= a; de ahí sale la identidad sumada.
    """
    if not 1 <= m <= MAX_EXACT_ORDER:
        raise DomainError(f"Exact stencil identities are checked for 1 <= m <= {MAX_EXACT_ORDER}, got {m}")

    def c(a: int, b: int) -> int:
        return comb(a, b) if 0 <= b <= a else 0

    lhs_total = 0
    for h in range(-2 * m, 2 * m + 1):
        row = sum(c(2 * m, m - k) * c(2 * m, m - k + h) for k in range(-m, m + 1))
        if row != c(4 * m, 2 * m - h):
            return False
        lhs_total += row
    folded = sum(c(2 * m, m - k) * c(2 * m, m - k + h) for k in range(-m, m + 1) for h in range(k - m, k + m + 1))
    return folded == lhs_total == sum(c(4 * m, 2 * m - h) for h in range(-2 * m, 2 * m + 1))
