# laboratorio_operadores_no_locales/services/dirichlet_variational.py
"""Problemas de Dirichlet discretos en Omega acotado: forma cuadrática, espectro y solución lineal.

La condición exterior u = 0 fuera de Omega se impone restringiendo el operador espectral
de la caja periódica (rellenada 4 veces) a los nodos interiores. En coordenadas interiores
el operador es simétrico para el producto euclídeo, y el producto L^2 solo añade h^N.
"""

import dataclasses
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from scipy import fft, linalg
from scipy.sparse.linalg import LinearOperator, cg, lobpcg

from .. import lab_config
from ..exceptions import AssumptionViolation, ContractViolation, EigenSolverError, IndefiniteFormError
from ..models.grids import DomainMask, GridFunction, GridSpec, MultiplierGrid
from ..models.measures import MeasureFamily, OrderMeasure
from ..models.reports import AssumptionReport, SpectrumSummary
from .kernel_constants import generalized_poincare_constant, poincare_constant
from .order_measure import mass, validate
from .spectral_forms import apply_spectral, superposition_multiplier_grid

logger = logging.getLogger("laboratorio_operadores")

# --- Constants ---
DEFAULT_PADDING = 4
EIGEN_MAXITER = 5000
EIGEN_RESIDUAL_RTOL = 1e-8
CG_MAXITER = 10000


# --- Dominios ---
def interval_mask(a: float, b: float, nodes: int, padding: int = DEFAULT_PADDING) -> DomainMask:
    """Omega = (a, b) dentro de una caja periódica de longitud padding * (b - a) centrada en Omega."""
    if b <= a:
        raise ContractViolation(f"Empty interval ({a}, {b})")
    grid = GridSpec.centered(1, nodes, padding * (b - a), center=0.5 * (a + b))
    x = grid.coordinates()[..., 0]
    return DomainMask(grid, (x > a) & (x < b), diameter=b - a)


def disk_mask(center: Sequence[float], radius: float, nodes: int, padding: int = DEFAULT_PADDING) -> DomainMask:
    if radius <= 0:
        raise ContractViolation(f"Disk radius must be positive, got {radius}")
    cx, cy = center
    length = padding * 2.0 * radius
    grid = GridSpec(2, nodes, length, (cx - 0.5 * length, cy - 0.5 * length))
    points = grid.coordinates()
    inside = (points[..., 0] - cx) ** 2 + (points[..., 1] - cy) ** 2 < radius**2
    return DomainMask(grid, inside, diameter=2.0 * radius)


def mask_from_spec(spec: str, nodes: int, padding: int = DEFAULT_PADDING) -> DomainMask:
    """``interval:a,b`` o ``disk:cx,cy,r``."""
    kind, _, raw = spec.partition(":")
    values = [float(v) for v in raw.split(",") if v]
    if kind == "interval" and len(values) == 2:
        return interval_mask(values[0], values[1], nodes, padding)
    if kind == "disk" and len(values) == 3:
        return disk_mask(values[:2], values[2], nodes, padding)
    raise ContractViolation(f"Unknown domain '{spec}', expected 'interval:a,b' or 'disk:cx,cy,r'")


def default_s_star(mu: OrderMeasure) -> float:
    """Menor orden positivo de mu+ por encima de todo orden que carga mu-."""
    negative_top = max([s for s, _ in mu.neg_atoms] + [b for _, b, _ in mu.neg_density] + [0.0])
    candidates = [s for s, _ in mu.pos_atoms if s > 0 and s >= negative_top]
    candidates += [max(a, negative_top) for a, b, _ in mu.pos_density if b > negative_top and b > 0]
    candidates = [c for c in candidates if c > 0]
    if not candidates:
        raise AssumptionViolation("positive part carries no mass above the orders charged by the negative part")
    return min(candidates)


@dataclasses.dataclass
class DirichletProblem:
    """mu, la familia de medidas esféricas, Omega y el símbolo de la superposición en la caja."""

    mu: OrderMeasure
    family: MeasureFamily
    mask: DomainMask
    mult: MultiplierGrid
    report: AssumptionReport

    @classmethod
    def build(
        cls,
        mu: OrderMeasure,
        family: MeasureFamily,
        mask: DomainMask,
        s_star: Optional[float] = None,
        p_fallback: float = lab_config.P_FALLBACK,
    ) -> "DirichletProblem":
        s_star = default_s_star(mu) if s_star is None else s_star
        report = validate(mu, s_star, mask.grid.dimension, p_fallback, family=family)
        mult = superposition_multiplier_grid(mu, family, mask.grid)
        return cls(mu, family, mask, mult, report)

    @property
    def weight(self) -> float:
        return self.mask.grid.cell_volume

    def apply(self, inner: NDArray[np.float64]) -> NDArray[np.float64]:
        """Acción de la forma enmascarada sobre los nodos interiores."""
        return _masked_apply(self.mult, self.mask, inner)

    def operator(self) -> LinearOperator:
        n = self.mask.size
        return LinearOperator((n, n), matvec=self.apply, dtype=float)

    def preconditioner(self) -> LinearOperator:
        return _fourier_preconditioner(self.mult, self.mask)

    def energy(self, inner: NDArray[np.float64]) -> float:
        return float(self.weight * inner @ self.apply(inner))


def _masked_apply(mult: MultiplierGrid, mask: DomainMask, inner: NDArray[np.float64]) -> NDArray[np.float64]:
    values = np.zeros(mask.grid.shape)
    values[mask.inside] = np.ravel(inner)
    return np.real(fft.ifftn(mult.values * fft.fftn(values)))[mask.inside]


def _fourier_preconditioner(mult: MultiplierGrid, mask: DomainMask) -> LinearOperator:
    inverse = 1.0 / (np.maximum(mult.values, 0.0) + 1.0)
    n = mask.size
    return LinearOperator((n, n), matvec=lambda v: _masked_apply(MultiplierGrid(mult.grid, inverse), mask, v), dtype=float)


def ensure_positive_form(mult: MultiplierGrid, report: Optional[AssumptionReport] = None) -> None:
    """Rechaza superposiciones indefinidas: E_- <= C gamma E_+ solo sirve con gamma pequeño."""
    if report is not None and not report.valid.get("gamma_below_one", True):
        raise IndefiniteFormError(f"refusing to solve: gamma = {report.gamma:.3f} >= 1, the negative part is not controlled by E_+")
    if mult.minimum < 0.0:
        raise IndefiniteFormError(f"refusing to solve: superposition multiplier reaches {mult.minimum:.3e} < 0, the form is indefinite")


def form_apply(mult: MultiplierGrid, mask: DomainMask, u: GridFunction) -> GridFunction:
    """mask o apply_spectral(mult, u) para u nula fuera de Omega."""
    mask.require_supported(u)
    out = apply_spectral(mult, u)
    return mask.extend(out.values[mask.inside])


# --- Espectro ---
@dataclasses.dataclass
class SpectrumResult:
    eigenvalues: NDArray[np.float64]
    residuals: NDArray[np.float64]
    vectors: List[GridFunction]
    method: str

    def summary(self) -> SpectrumSummary:
        return SpectrumSummary(eigenvalues=self.eigenvalues.tolist(), residuals=self.residuals.tolist(), method=self.method)


def dense_form_matrix(mult: MultiplierGrid, mask: DomainMask) -> NDArray[np.float64]:
    """Bloque interior del operador circulante, armado fila a fila desde su núcleo."""
    kernel = np.real(fft.ifftn(mult.values))
    index = np.argwhere(mask.inside)
    nodes = mask.grid.nodes
    matrix = np.empty((len(index), len(index)))
    for i, row in enumerate(index):
        offsets = (row[None, :] - index) % nodes
        matrix[i] = kernel[tuple(offsets.T)]
    return 0.5 * (matrix + matrix.T)


def _residuals(mult: MultiplierGrid, mask: DomainMask, values: NDArray[np.float64], vectors: NDArray[np.float64]) -> NDArray[np.float64]:
    out = []
    for lam, v in zip(values, vectors.T):
        r = _masked_apply(mult, mask, v) - lam * v
        out.append(np.linalg.norm(r) / np.linalg.norm(v))
    return np.asarray(out)


def eigenpairs(
    mult: MultiplierGrid,
    mask: DomainMask,
    k: int,
    seed: int = lab_config.SEED,
    maxiter: int = EIGEN_MAXITER,
    report: Optional[AssumptionReport] = None,
) -> SpectrumResult:
    """Los k menores autopares de la forma enmascarada.

    lobpcg con bloque 2k, precondicionador de Fourier y arranque con semilla; si los
    residuos no bajan de 1e-8 * lambda se resuelve el problema denso cuando es pequeño.
    """
    ensure_positive_form(mult, report)
    n = mask.size
    if not 1 <= k < n:
        raise ContractViolation(f"Need 1 <= k < {n} interior nodes, got k={k}")
    rng = np.random.default_rng(seed)
    block = min(2 * k, n - 1)
    start = rng.standard_normal((n, block))
    operator = LinearOperator((n, n), matvec=lambda v: _masked_apply(mult, mask, v), matmat=lambda V: np.column_stack([_masked_apply(mult, mask, c) for c in V.T]), dtype=float)
    method = "lobpcg"
    values, vectors = None, None
    if 5 * block < n:
        try:
            values, vectors = lobpcg(operator, start, M=_fourier_preconditioner(mult, mask), tol=EIGEN_RESIDUAL_RTOL, maxiter=maxiter, largest=False)
            order = np.argsort(values)[:k]
            values, vectors = values[order], vectors[:, order]
        except (np.linalg.LinAlgError, ValueError) as exc:
            logger.warning(f"lobpcg failed on {n} interior nodes: {exc}")
            values = None
    residuals = _residuals(mult, mask, values, vectors) if values is not None else np.full(k, np.inf)
    if values is None or np.any(residuals > EIGEN_RESIDUAL_RTOL * np.maximum(np.abs(values), 1.0)):
        if lab_config.DENSE_EIGEN_FALLBACK and n <= lab_config.DENSE_EIGEN_LIMIT:
            logger.warning(f"Iterative residuals {residuals.max():.2e} above target, solving the dense {n}x{n} problem")
            values, vectors = linalg.eigh(dense_form_matrix(mult, mask), subset_by_index=[0, k - 1])
            residuals = _residuals(mult, mask, values, vectors)
            method = "dense"
        else:
            raise EigenSolverError(f"eigensolver did not reach the residual target after {maxiter} iterations", residuals)
    if np.any(values <= 0):
        raise IndefiniteFormError(f"Nonpositive eigenvalue {values.min():.3e}: the masked form is not positive definite")

    h_scale = math.sqrt(mask.grid.cell_volume)
    grid_vectors = []
    for v in vectors.T:
        v = v / (np.linalg.norm(v) * h_scale)  # unit L^2 norm
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        grid_vectors.append(mask.extend(v))
    logger.info(f"Eigenvalues ({method}): {np.round(values, 6).tolist()}")
    return SpectrumResult(np.asarray(values), residuals, grid_vectors, method)


def poincare_check(spectrum: SpectrumResult, s: float, diameter: float) -> Dict[str, float]:
    """lambda_1 >= 1/C con la constante de Poincaré explícita de un único orden s."""
    constant = poincare_constant(s, diameter)
    lam1 = float(spectrum.eigenvalues[0])
    return {"lambda1": lam1, "constant": constant, "bound": 1.0 / constant, "passed": lam1 >= 1.0 / constant}


def generalized_poincare_check(problem: DirichletProblem, vectors: Sequence[GridFunction], t: float) -> pd.DataFrame:
    """||u||^2 <= E_+(u, u) / (C_t mu+([s_star, t])) sobre los campos dados."""
    s_star = problem.report.s_star
    positive_mass = mass(problem.mu.positive, s_star, t, closed=True)
    if positive_mass <= 0:
        raise AssumptionViolation(f"mu+([{s_star}, {t}]) = 0")
    positive = OrderMeasure(pos_atoms=problem.mu.pos_atoms, pos_density=problem.mu.pos_density)
    mult_plus = superposition_multiplier_grid(positive, problem.family, problem.mask.grid)
    constant = generalized_poincare_constant(t, problem.mask.diameter)
    rows = []
    for i, u in enumerate(vectors):
        inner = problem.mask.restrict(u)
        e_plus = float(problem.weight * inner @ _masked_apply(mult_plus, problem.mask, inner))
        l2 = u.l2_norm_squared()
        bound = e_plus / (constant * positive_mass)
        rows.append({"field": i, "l2_squared": l2, "bound": bound, "passed": l2 <= bound})
    return pd.DataFrame(rows)


# --- Problema lineal ---
@dataclasses.dataclass
class SolveResult:
    solution: GridFunction
    residual: float
    energy: float
    trace: List[Dict[str, float]]
    converged: bool = True
    extras: Dict[str, float] = dataclasses.field(default_factory=dict)


def linear_solve(
    mult: MultiplierGrid,
    mask: DomainMask,
    f: GridFunction,
    tol: float = lab_config.TOLERANCE,
    report: Optional[AssumptionReport] = None,
) -> SolveResult:
    """Gradiente conjugado para form_apply(u) = f en los nodos interiores."""
    ensure_positive_form(mult, report)
    rhs = mask.restrict(f)
    weight = mask.grid.cell_volume
    if not np.any(rhs):
        zero = mask.extend(np.zeros(mask.size))
        return SolveResult(zero, 0.0, 0.0, [])
    operator = LinearOperator((mask.size, mask.size), matvec=lambda v: _masked_apply(mult, mask, v), dtype=float)
    trace: List[Dict[str, float]] = []

    def record(xk):
        trace.append({"iteration": len(trace) + 1, "residual": float(np.linalg.norm(operator.matvec(xk) - rhs) / np.linalg.norm(rhs))})

    solution, info = cg(operator, rhs, rtol=tol, maxiter=CG_MAXITER, M=_fourier_preconditioner(mult, mask), callback=record)
    residual = float(np.linalg.norm(operator.matvec(solution) - rhs) / np.linalg.norm(rhs))
    if info != 0:
        logger.warning(f"CG stopped with info={info}, relative residual {residual:.2e}")
    return SolveResult(
        solution=mask.extend(solution),
        residual=residual,
        energy=float(weight * solution @ operator.matvec(solution)),
        trace=trace,
        converged=info == 0,
    )
