# laboratorio_operadores_no_locales/services/verification.py
"""Registro de verificaciones: cada id ejecuta una batería de comprobaciones numéricas.

Cada comprobación devuelve una lista de CheckResult con el valor medido, el objetivo y la
tolerancia; la CLI la vuelca a CSV/JSON y sale con código 0 solo si todas pasan.
"""

import dataclasses
import logging
import math
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from .. import lab_config
from ..exceptions import DescentStagnationError, IndefiniteFormError, UnknownCheckError
from ..models.fields import bump_field
from ..models.grids import GridFunction, GridSpec
from ..models.measures import MeasureFamily, OrderMeasure, SphericalMeasure
from ..models.reports import CheckResult
from ..util.difference_operator import chu_vandermonde_check, cosine_power_identity_deviation
from .critical_points import brezis_nirenberg_functional, jumping_functional, jumping_solve, solve_mountain_pass
from .dirichlet_variational import DirichletProblem, eigenpairs, generalized_poincare_check, interval_mask, linear_solve, poincare_check
from .kernel_constants import closed_form_cosine_integral, constant_bounds_table, cosine_integral, cross_order_deviation, rigorous_lower_bound
from .order_measure import pathological_partial_sums
from .pointwise_operator import apply_Lms, limit_checks, m_independence_check
from .spectral_forms import apply_spectral, energy, energy_bruteforce_1d, multiplier_grid
from .spherical_measure import anisotropic_counterexample_family, ellipticity_report

logger = logging.getLogger("laboratorio_operadores")

Params = Dict[str, Any]


@dataclasses.dataclass(frozen=True)
class Check:
    description: str
    run: Callable[[Params], List[CheckResult]]


def _result(name: str, measured: float, target: float | None, tolerance: float | None, passed: bool, detail: str = "") -> CheckResult:
    return CheckResult(name=name, measured=float(measured), target=target, tolerance=tolerance, passed=bool(passed), detail=detail)


def _progress(items, params: Params, label: str):
    return tqdm(list(items), desc=label, disable=not params.get("progress", False), leave=False)


def _interval(params: Params, default: Tuple[float, float]) -> Tuple[float, float]:
    omega = params.get("omega")
    if omega is None:
        return default
    a, b = (float(v) for v in str(omega).split(","))
    return a, b


# --- Identidades combinatorias ---
def _cosine_identity(params: Params) -> List[CheckResult]:
    t = np.linspace(-2.0 * math.pi, 2.0 * math.pi, 1001)
    orders = [int(params["m"])] if "m" in params else range(1, 6)
    return [_result(f"cosine_power_identity(m={m})", dev, 0.0, 1e-12, dev < 1e-12) for m in orders for dev in [cosine_power_identity_deviation(m, t)]]


def _chu_vandermonde(params: Params) -> List[CheckResult]:
    orders = [int(params["m"])] if "m" in params else range(1, 9)
    return [_result(f"chu_vandermonde(m={m})", 0.0 if ok else 1.0, 0.0, 0.0, ok) for m in orders for ok in [chu_vandermonde_check(m)]]


# --- Constantes ---
def _constant_closed_form(params: Params) -> List[CheckResult]:
    out = []
    for s in _progress([0.1, 0.25, 0.4, 0.75, 0.9], params, "closed form"):
        quad = cosine_integral(1, s)
        exact = math.cos(math.pi * s) * math.gamma(2.0 - 2.0 * s) / (2.0 * s * (1.0 - 2.0 * s))
        general = closed_form_cosine_integral(1, s)
        rel = max(abs(quad - exact), abs(general - exact)) / abs(exact)
        out.append(_result(f"I(1,{s})", rel, 0.0, 1e-8, rel < 1e-8))
    return out


def _cross_order(params: Params) -> List[CheckResult]:
    sigma = SphericalMeasure.uniform(int(params.get("dimension", 1)))
    lattice = [(m, n, s) for s in (0.3, 0.7, 1.3) for m in range(1, 5) for n in range(m + 1, 5) if m > s]
    out = []
    for m, n, s in _progress(lattice, params, "cross order"):
        dev = cross_order_deviation(m, n, s, sigma)
        out.append(_result(f"c_(n,s)P_n=c_(m,s)P_m(m={m},n={n},s={s})", dev, 0.0, 1e-8, dev < 1e-8))
    return out


def _constant_bounds(params: Params) -> List[CheckResult]:
    out = []
    for m in (1, 2, 3):
        s_grid = [m * f for f in (0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)]
        frame = constant_bounds_table(m, s_grid, SphericalMeasure.uniform(1))
        worst = frame.loc[(frame["scaled"] / frame["lower_bound"]).idxmin()]
        out.append(_result(f"lower_bound(m={m})", worst["scaled"], rigorous_lower_bound(m, worst["s"]), None, bool(frame["passed"].all())))
    return out


# --- Operador puntual ---
def _m_independence(params: Params) -> List[CheckResult]:
    u = bump_field(1)
    sigma = SphericalMeasure.uniform(1)
    out = []
    for s in (0.3, 0.6):
        for x in _progress(np.linspace(-0.4, 0.4, 5), params, f"m-independence s={s}"):
            frame = m_independence_check(u, s, sigma, [x], [1, 2])
            dev, err = frame.attrs["max_deviation"], frame.attrs["error_estimate_sum"]
            out.append(_result(f"L_2-L_1(s={s},x={x:.2f})", dev, 0.0, err, dev <= max(err, 1e-10)))
    return out


def _limits(params: Params) -> List[CheckResult]:
    u = bump_field(1)
    family = MeasureFamily.constant(SphericalMeasure.uniform(1))
    zero = limit_checks(u, family, "zero", [0.0], s_sequence=[0.2, 0.1, 0.05, 0.01])
    monotone = bool(np.all(np.diff(zero["deviation"]) < 0))
    last = float(zero["deviation"].iloc[-1])
    order = limit_checks(u, family, "order", [0.0], m=1, s_sequence=[0.999])
    rel = float(order["deviation"].iloc[-1] / abs(order["target"].iloc[-1]))
    return [
        _result("s->0 monotone", float(monotone), 1.0, None, monotone),
        _result("s->0 deviation at s=0.01", last, 1.0, 5e-3, last < 5e-3),
        _result("s->1 vs -u''(0)", rel, float(order["target"].iloc[-1]), 1e-2, rel < 1e-2),
    ]


# --- Formas espectrales ---
def _spectral_agreement(params: Params) -> List[CheckResult]:
    s = float(params.get("s", 0.5))
    sigma = SphericalMeasure.uniform(1)
    u = bump_field(1)
    length = float(params.get("length", 64.0))
    out = []
    previous = None
    for nodes in (2**14, 2**15):
        grid = GridSpec.centered(1, nodes, length)
        spectral = apply_spectral(multiplier_grid(sigma, s, grid), GridFunction.sample(grid, u))
        x = grid.axes()[0]
        index = [int(np.argmin(np.abs(x - p))) for p in np.linspace(-0.4, 0.4, 10)]
        values = spectral.values[index]
        if previous is None:
            reference = np.array([apply_Lms(u, 1, s, sigma, [x[i]])[0] for i in _progress(index, params, "quadrature")])
            rel = float(np.max(np.abs(values - reference)) / np.max(np.abs(reference)))
            out.append(_result(f"spectral vs quadrature (n={nodes})", rel, 0.0, 1e-4, rel < 1e-4))
        else:
            rel = float(np.max(np.abs(values - previous)) / np.max(np.abs(previous)))
            out.append(_result(f"grid doubling (n={nodes})", rel, 0.0, 1e-4, rel < 1e-4))
        previous = values
    return out


def _energy_oracle(params: Params) -> List[CheckResult]:
    grid = GridSpec.centered(1, int(params.get("nodes", 1024)), float(params.get("length", 4.0)))
    u = GridFunction.sample(grid, bump_field(1))
    out = []
    for s in _progress((0.25, 0.5, 0.75), params, "energy oracle"):
        plancherel = energy(u, u, multiplier_grid(SphericalMeasure.uniform(1), s, grid))
        brute = energy_bruteforce_1d(u, 1, s)
        rel = abs(brute - plancherel) / plancherel
        out.append(_result(f"oracle vs Plancherel(s={s})", rel, 0.0, 1e-3, rel < 1e-3))
    return out


def _scaling(params: Params) -> List[CheckResult]:
    rho = float(params.get("rho", 2.0))
    grid = GridSpec.centered(1, int(params.get("nodes", 4096)), 16.0)
    field = bump_field(1)
    u = GridFunction.sample(grid, field)
    u_rho = GridFunction.sample(grid, field.dilated(rho))
    out = []
    for s in (0.25, 0.75):
        mult = multiplier_grid(SphericalMeasure.uniform(1), s, grid)
        ratio = energy(u, u, mult) / energy(u_rho, u_rho, mult)
        target = rho ** (2.0 * s - 1.0)
        rel = abs(ratio - target) / target
        out.append(_result(f"E(u)/E(u_rho)(s={s})", ratio, target, 1e-3, rel < 1e-3))
    return out


# --- Problemas de Dirichlet ---
def _poincare(params: Params) -> List[CheckResult]:
    a, b = _interval(params, (0.0, 1.0))
    nodes = int(params.get("nodes", 1024))
    orders = [float(params["s"])] if "s" in params else [0.25, 0.5, 0.75, 1.5]
    family = MeasureFamily.constant(SphericalMeasure.uniform(1))
    mask = interval_mask(a, b, nodes)
    out = []
    for s in _progress(orders, params, "poincare"):
        problem = DirichletProblem.build(OrderMeasure.dirac(s), family, mask)
        spectrum = eigenpairs(problem.mult, mask, 1, seed=int(params.get("seed", lab_config.SEED)))
        check = poincare_check(spectrum, s, b - a)
        out.append(_result(f"lambda_1 >= 1/C(s={s})", check["lambda1"], check["bound"], None, check["passed"]))
    if "s" not in params:
        problem = DirichletProblem.build(OrderMeasure(pos_atoms=[(1.0, 1.0), (0.5, 1.0)]), family, mask)
        spectrum = eigenpairs(problem.mult, mask, 4)
        frame = generalized_poincare_check(problem, spectrum.vectors, 1.0)
        worst = float((frame["l2_squared"] / frame["bound"]).max())
        out.append(_result("generalized Poincare (4 eigenvectors)", worst, 1.0, None, bool(frame["passed"].all())))
    return out


def _mountain_pass(params: Params) -> List[CheckResult]:
    a, b = _interval(params, (-1.0, 1.0))
    mask = interval_mask(a, b, int(params.get("nodes", 512)))
    mu = OrderMeasure(pos_atoms=[(0.5, 1.0)], neg_atoms=[(0.25, 0.05)])
    problem = DirichletProblem.build(mu, MeasureFamily.constant(SphericalMeasure.uniform(1)), mask)
    q = float(params.get("q", 4.0))
    result = solve_mountain_pass(problem, q, tol=1e-10)
    u = mask.restrict(result.solution)
    rng = np.random.default_rng(int(params.get("seed", lab_config.SEED)))
    weak = 0.0
    for _ in range(20):
        phi = rng.standard_normal(mask.size)
        lhs = problem.weight * float(phi @ problem.apply(u))
        rhs = problem.weight * float(phi @ (np.abs(u) ** (q - 2.0) * u))
        weak = max(weak, abs(lhs - rhs) / math.sqrt(problem.weight * float(phi @ phi)))
    extras = result.extras
    return [
        _result("gradient norm", result.residual, 0.0, 1e-6, result.residual <= 1e-6),
        _result("J(u) > 0", extras["level"], 0.0, None, extras["level"] > 0),
        _result("Nehari identity", extras["nehari_defect"], 0.0, 1e-8, extras["nehari_defect"] <= 1e-8),
        _result("weak equation (20 fields)", weak, 0.0, 1e-5, weak <= 1e-5),
        _result("J(u) >= beta", extras["level"], extras["beta"], None, bool(extras["level_above_beta"])),
        _result("far point below beta", extras["far_value"], extras["beta"], None, extras["far_value"] < extras["beta"]),
    ]


def _jumping_problem() -> DirichletProblem:
    mask = interval_mask(-1.0, 1.0, 512)
    return DirichletProblem.build(OrderMeasure.dirac(0.5), MeasureFamily.constant(SphericalMeasure.uniform(1)), mask)


def _jumping_gradient(params: Params) -> List[CheckResult]:
    problem = _jumping_problem()
    mask = problem.mask
    p = problem.report.two_star
    a, b = 1.3, 2.1
    rng = np.random.default_rng(int(params.get("seed", lab_config.SEED)))
    out = []
    step = 1e-6
    for i in range(5):
        u = mask.extend(0.5 * rng.standard_normal(mask.size))
        d = rng.standard_normal(mask.size)
        _, grad = jumping_functional(problem, a, b, p, u)
        exact = problem.weight * float(mask.restrict(grad) @ d)
        plus, _ = jumping_functional(problem, a, b, p, mask.extend(mask.restrict(u) + step * d))
        minus, _ = jumping_functional(problem, a, b, p, mask.extend(mask.restrict(u) - step * d))
        fd = (plus - minus) / (2.0 * step)
        rel = abs(fd - exact) / max(abs(exact), 1e-12)
        out.append(_result(f"gradient vs finite differences ({i})", rel, 0.0, 1e-6, rel < 1e-6))
    u = mask.extend(rng.standard_normal(mask.size))
    jv, jg = jumping_functional(problem, 1.7, 1.7, p, u)
    bv, bg = brezis_nirenberg_functional(problem, 1.7, p, u)
    same = jv == bv and np.array_equal(jg.values, bg.values)
    out.append(_result("a = b reduction", abs(jv - bv), 0.0, 0.0, same))
    return out


def _jumping_solve(params: Params) -> List[CheckResult]:
    problem = _jumping_problem()
    spectrum = eigenpairs(problem.mult, problem.mask, 2)
    lam1, lam2 = spectrum.eigenvalues
    value = lam1 + 0.25 * (lam2 - lam1)
    tol = float(params.get("tol", 1e-8))
    try:
        result = jumping_solve(problem, value, value, 2, tol=tol)
    except DescentStagnationError as exc:
        logger.warning(f"Jumping solver returned no candidate: {exc}")
        return [_result("jumping candidate", math.nan, None, tol, True, detail="no candidate returned")]
    extras = result.extras
    return [
        _result("jumping residual", result.residual, 0.0, tol, result.residual <= tol),
        _result("level below c_*", extras["level"], extras["critical_level"], None, bool(extras["below_critical_level"])),
    ]


def _refusal(params: Params) -> List[CheckResult]:
    mask = interval_mask(0.0, 1.0, int(params.get("nodes", 256)))
    mu = OrderMeasure(pos_atoms=[(0.5, 1.0)], neg_atoms=[(0.0, 0.9)])
    problem = DirichletProblem.build(mu, MeasureFamily.constant(SphericalMeasure.uniform(1)), mask)
    f = mask.extend(np.ones(mask.size))
    attempts = {
        "linear_solve": lambda: linear_solve(problem.mult, mask, f, report=problem.report),
        "mountain_pass": lambda: solve_mountain_pass(problem, 4.0),
        "jumping_solve": lambda: jumping_solve(problem, 1.0, 1.0, 1),
    }
    out = []
    for name, attempt in attempts.items():
        try:
            attempt()
            out.append(_result(f"{name} refuses", 0.0, 1.0, None, False, detail="solver ran on an indefinite form"))
        except IndefiniteFormError as exc:
            out.append(_result(f"{name} refuses", 1.0, 1.0, None, True, detail=str(exc)))
    return out


# --- Medidas ---
def _pathological(params: Params) -> List[CheckResult]:
    truncation = int(params.get("K", 20))
    phi = pathological_partial_sums("special_phi", truncation)
    psi = pathological_partial_sums("special_psi", max(truncation, 20))
    bounded = float(phi["partial_sum"].iloc[-1])
    ratio = float(psi.loc[psi["k"] == 20, "dilation_ratio"].iloc[0])
    return [
        _result("special_phi bounded", bounded, math.pi**2 / 6.0, 1e-9, bounded <= math.pi**2 / 6.0 + 1e-9),
        _result("special_psi ratio at k=20", ratio, 2.0, 0.05, abs(ratio - 2.0) <= 0.05),
    ]


def _ellipticity(params: Params) -> List[CheckResult]:
    family = anisotropic_counterexample_family(int(params.get("blocks", 4)))
    report = ellipticity_report(family, [0.5, 1.5, 2.5, 3.5])
    return [
        _result("lambda > 0", report.lambda_, 0.0, None, report.lambda_ > 0),
        _result("lambda0 = 0 on the atomic blocks", report.lambda0, 0.0, 1e-12, report.lambda0 <= 1e-12),
    ]


CHECKS: Dict[str, Check] = {
    "cosine-identity": Check("delta_m e^{i.}(0, t) = 2^m (1 - cos t)^m on [-2pi, 2pi], m <= 5", _cosine_identity),
    "chu-vandermonde": Check("sum_k C(2m, m-k) C(2m, m-k+h) = C(4m, 2m-h) for |h| <= 2m exactly, m <= 8", _chu_vandermonde),
    "constant-closed-form": Check("cosine integral quadrature against the Gamma closed form", _constant_closed_form),
    "cross-order": Check("c_{n,s} P_n(s) = c_{m,s} P_m(s) on a lattice", _cross_order),
    "constant-bounds": Check("c (1/s + 1/(m-s)) M above its rigorous lower bound", _constant_bounds),
    "m-independence": Check("L_{2,s} u = L_{1,s} u within quadrature error", _m_independence),
    "limits": Check("s -> 0 gives u(x), s -> 1 gives -u''(x)", _limits),
    "spectral-agreement": Check("FFT multiplier against pointwise quadrature", _spectral_agreement),
    "energy-oracle": Check("double-sum energy against Plancherel", _energy_oracle),
    "scaling": Check("E(u)/E(u_rho) = rho^(2s-1)", _scaling),
    "poincare": Check("lambda_1 >= 1/C and the generalized Poincare bound", _poincare),
    "pathological": Check("bounded and divergent partial sums of the degenerate examples", _pathological),
    "ellipticity": Check("alternating family: simple ellipticity without the strong form", _ellipticity),
    "mountain-pass": Check("subcritical mountain-pass solution with certificates", _mountain_pass),
    "jumping-gradient": Check("jumping functional gradient and the a = b reduction", _jumping_gradient),
    "jumping-solve": Check("best-effort critical jumping solve with level report", _jumping_solve),
    "refusal": Check("solvers refuse an indefinite superposition", _refusal),
}


# Etiquetas de lema: alias de las verificaciones registradas.
LEMMA_ALIASES: Dict[str, str] = {
    "agaapa0": "cosine-identity",
    "lem:constant": "cross-order",
    "lem:constant-estimate": "constant-closed-form",
    "cor:bounds-on-cms": "constant-bounds",
    "lem:independence-of-m": "m-independence",
    "lem:limms": "limits",
    "limit-s-to-0": "limits",
    "fourier-rep": "spectral-agreement",
    "prop:bilinear": "energy-oracle",
    "special-construction": "pathological",
    "lem:strano09876": "pathological",
    "lemma:aism": "limits",
    "limit-s-to-integers": "limits",
    "mp-step1": "mountain-pass",
    "critical-case": "jumping-solve",
}


def resolve_check(check_id: str) -> str:
    """Devuelve el id registrado para ``check_id``, que puede ser un id o una etiqueta de lema."""
    key = LEMMA_ALIASES.get(check_id, check_id)
    if key not in CHECKS:
        raise UnknownCheckError(check_id, [*CHECKS, *LEMMA_ALIASES])
    return key


def run_verify(check_id: str, params: Params | None = None) -> Tuple[pd.DataFrame, bool]:
    """Ejecuta una batería registrada; devuelve la tabla de resultados y el veredicto global."""
    results = verification_results(check_id, params)
    frame = pd.DataFrame([r.model_dump() for r in results])
    passed = bool(frame["passed"].all()) if not frame.empty else False
    logger.info(f"verify {check_id}: {int(frame['passed'].sum())}/{len(frame)} checks passed")
    return frame, passed


def verification_results(check_id: str, params: Params | None = None) -> List[CheckResult]:
    key = resolve_check(check_id)
    if key != check_id:
        logger.debug(f"verify {check_id} -> {key}")
    return CHECKS[key].run(params or {})
