# laboratorio_operadores_no_locales/cli.py
"""Línea de comandos del laboratorio: medidas, constantes, operador, espectros, soluciones y verificaciones."""

import functools
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import click
import numpy as np
import pandas as pd
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from . import lab_config
from .exceptions import LabError
from .models.fields import field_from_spec
from .models.grids import GridFunction, GridSpec
from .models.reports import CheckResult, ExperimentConfig, QuadratureSpec
from .services import critical_points, dirichlet_variational, kernel_constants, order_measure, pointwise_operator, spectral_forms, spherical_measure
from .services.verification import CHECKS, LEMMA_ALIASES, verification_results
from .util.measure_io import load_family, load_order_measure, load_spherical_measure
from .util.reports import build_report, write_frame, write_grid_function, write_report

console = Console()
logger = logging.getLogger("laboratorio_operadores")


def _lab_errors(command):
    """Convierte LabError en ClickException con el nombre del módulo que falla."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except LabError as exc:
            raise click.ClickException(f"[{type(exc).__name__}] {exc}") from exc

    return wrapper


def _config(ctx: click.Context, command: str, inputs: Dict[str, Any], parameters: Dict[str, Any]) -> ExperimentConfig:
    obj = ctx.obj
    return ExperimentConfig(
        command=command,
        inputs={k: str(v) for k, v in inputs.items() if v is not None},
        parameters=parameters,
        tolerance=obj["tol"],
        seed=obj["seed"],
        output_dir=str(obj["out"]),
    )


def _grid_info(grid: GridSpec) -> Dict[str, Any]:
    return {"dimension": grid.dimension, "nodes": grid.nodes, "length": grid.length, "origin": list(grid.origin)}


def _print_frame(frame: pd.DataFrame, title: str) -> None:
    table = Table(title=title)
    for i, column in enumerate(frame.columns):
        table.add_column(str(column), no_wrap=i == 0)
    for _, row in frame.iterrows():
        table.add_row(*[f"{v:.6g}" if isinstance(v, float) else str(v) for v in row])
    console.print(table)


@click.group()
@click.option("--seed", type=int, default=lab_config.SEED, show_default=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=lab_config.OUTPUT_DIR, show_default=True)
@click.option("--tol", type=float, default=lab_config.TOLERANCE, show_default=True)
@click.option("--overwrite/--no-overwrite", default=lab_config.OVERWRITE, show_default=True)
@click.option("--log-level", default=lab_config.LOG_LEVEL, show_default=True)
@click.pass_context
def lab(ctx: click.Context, seed: int, out: Path, tol: float, overwrite: bool, log_level: str):
    """Laboratorio numérico de superposiciones de operadores no locales anisótropos."""
    lab_config.configure_logging(log_level.upper(), RichHandler(console=console, show_path=False))
    ctx.obj = {"seed": seed, "out": out, "tol": tol, "overwrite": overwrite}


# --- Medidas ---
@lab.command()
@click.option("--mu", required=True, help="JSON file or shorthand such as 'delta:1 + 0.5*delta:0.5'.")
@click.option("--family", default=None, help="Family JSON file; uniform by default.")
@click.option("--dimension", type=click.IntRange(1, 2), default=1, show_default=True)
@click.option("--s-star", type=float, default=None)
@click.option("--s-sharp", type=float, default=None)
@click.option("--p-fallback", type=float, default=lab_config.P_FALLBACK, show_default=True)
@click.pass_context
@_lab_errors
def measure(ctx, mu, family, dimension, s_star, s_sharp, p_fallback):
    """Valida mu e informa s_star, gamma, s_sharp, 2* y elipticidad."""
    order = load_order_measure(mu)
    fam = load_family(family, dimension)
    s_star = dirichlet_variational.default_s_star(order) if s_star is None else s_star
    report = order_measure.validate(order, s_star, fam.dimension, p_fallback, s_sharp=s_sharp, family=fam)
    s_grid = sorted({s for s, _ in order.pos_atoms + order.neg_atoms if s > 0} | {s_star})
    ellipticity = spherical_measure.ellipticity_report(fam, s_grid, s_star=s_star, t=report.s_sharp, mu_plus=order)
    config = _config(ctx, "measure", {"mu": mu, "family": family}, {"s_star": s_star, "p_fallback": p_fallback, "dimension": dimension})
    results = {"assumptions": report.model_dump(), "ellipticity": ellipticity.model_dump(by_alias=True)}
    write_report(build_report(config, results=results), ctx.obj["out"], "measure.json", ctx.obj["overwrite"])
    _print_frame(pd.DataFrame([{"s_star": report.s_star, "gamma": report.gamma, "s_sharp": report.s_sharp, "2*": report.two_star, "solvable": report.solvable}]), "Order measure")


# --- Constantes ---
@lab.command()
@click.option("--m", "m", type=int, required=True)
@click.option("--s", "s", type=float, required=True)
@click.option("--sigma", default="uniform", show_default=True, help="'uniform', 'dirac:<angle>' or a JSON file.")
@click.option("--dimension", type=click.IntRange(1, 2), default=1, show_default=True)
@click.option("--route", type=click.Choice(["closed_form", "quadrature", "recursion", "all"]), default="closed_form", show_default=True)
@click.pass_context
@_lab_errors
def constant(ctx, m, s, sigma, dimension, route):
    """Constante de normalización c_{m,s} del operador anisótropo."""
    measure_ = load_spherical_measure(sigma, dimension)
    if route == "all":
        frame = kernel_constants.constant_routes(m, s, measure_)
        results = {"routes": frame.to_dict(orient="records")}
    else:
        bundle = kernel_constants.normalization_constant(m, s, measure_, route)
        frame = pd.DataFrame([bundle.model_dump()])
        results = {"bundle": bundle.model_dump()}
    config = _config(ctx, "constant", {"sigma": sigma}, {"m": m, "s": s, "route": route})
    write_report(build_report(config, results=results), ctx.obj["out"], "constant.json", ctx.obj["overwrite"])
    _print_frame(frame, f"c_(m={m}, s={s})")


@lab.command()
@click.option("--kind", type=click.Choice(["limits-zero", "limits-order", "bounds", "pathological"]), required=True)
@click.option("--m", "m", type=int, default=1, show_default=True)
@click.option("--n", "n", type=int, default=None, help="Second order for limits-order; defaults to m + 1.")
@click.option("--series", type=click.Choice(["strano", "special_phi", "special_psi"]), default="special_psi", show_default=True)
@click.option("--K", "truncation", type=int, default=20, show_default=True)
@click.pass_context
@_lab_errors
def table(ctx, kind, m, n, series, truncation):
    """Tablas CSV listas para graficar: límites y cotas de las constantes, sumas parciales patológicas."""
    family = load_family(None)
    if kind == "limits-zero":
        frame = kernel_constants.constant_limits(m, n or m, family, [0.1, 0.05, 0.01, 0.005, 0.001], "zero")
    elif kind == "limits-order":
        frame = kernel_constants.constant_limits(m, n or m + 1, family, [m - d for d in (0.1, 0.05, 0.01, 0.005, 0.001)], "order")
    elif kind == "bounds":
        frame = kernel_constants.constant_bounds_table(m, [m * f for f in np.linspace(0.01, 0.99, 50)], family.tail)
    else:
        frame = order_measure.pathological_partial_sums(series, truncation)
    write_frame(frame, ctx.obj["out"], f"table_{kind}.csv", ctx.obj["overwrite"])
    _print_frame(frame.head(10), f"{kind} (first rows)")


# --- Operador ---
def _points(points_file: Optional[Path], xs: Sequence[float], dimension: int) -> np.ndarray:
    if points_file is not None:
        frame = pd.read_csv(points_file)
        columns = [c for c in frame.columns if str(c).startswith("x")]
        return frame[columns].to_numpy(dtype=float).reshape(-1, dimension)
    if xs:
        return np.asarray(xs, dtype=float).reshape(-1, dimension)
    return np.zeros((1, dimension))


@lab.command()
@click.option("--mu", required=True)
@click.option("--family", default=None)
@click.option("--dimension", type=click.IntRange(1, 2), default=1, show_default=True)
@click.option("--field", "field_spec", default="builtin:bump", show_default=True)
@click.option("--points", "points_file", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--x", "xs", type=float, multiple=True, help="Evaluation coordinates (flattened) when no points file is given.")
@click.pass_context
@_lab_errors
def apply(ctx, mu, family, dimension, field_spec, points_file, xs):
    """Valor puntual de la superposición L u(x) con estimaciones de error."""
    order = load_order_measure(mu)
    fam = load_family(family, dimension)
    u = field_from_spec(field_spec, fam.dimension)
    points = _points(points_file, xs, fam.dimension)
    spec = QuadratureSpec(tolerance=ctx.obj["tol"])
    rows = []
    for x in points:
        value, error = pointwise_operator.apply_superposition(u, order, fam, x, spec)
        rows.append({**{f"x{i}": c for i, c in enumerate(x)}, "value": value, "error_estimate": error})
    frame = pd.DataFrame(rows)
    write_frame(frame, ctx.obj["out"], "apply.csv", ctx.obj["overwrite"])
    _print_frame(frame, f"L u for {field_spec}")


@lab.command()
@click.option("--field", "field_spec", default="builtin:bump", show_default=True)
@click.option("--s", "s", type=float, required=True)
@click.option("--m", "m", type=int, default=1, show_default=True, help="Order of the difference in the direct oracle (1D).")
@click.option("--sigma", default="uniform", show_default=True)
@click.option("--dimension", type=click.IntRange(1, 2), default=1, show_default=True)
@click.option("--nodes", type=int, default=1024, show_default=True)
@click.option("--length", type=float, default=4.0, show_default=True)
@click.option("--mu", default=None, help="Also report the X-norm block split for this order measure.")
@click.pass_context
@_lab_errors
def energy(ctx, field_spec, s, m, sigma, dimension, nodes, length, mu):
    """Energía de Plancherel de un campo, contrastada con la suma doble directa en 1D."""
    grid = GridSpec.centered(dimension, nodes, length)
    sphere = load_spherical_measure(sigma, dimension)
    u = GridFunction.sample(grid, field_from_spec(field_spec, dimension))
    results: Dict[str, Any] = {"plancherel": spectral_forms.energy(u, u, spectral_forms.multiplier_grid(sphere, s, grid))}
    if dimension == 1 and sphere.variant == "uniform":
        results["oracle"] = spectral_forms.energy_bruteforce_1d(u, m, s)
        results["relative_deviation"] = abs(results["oracle"] - results["plancherel"]) / results["plancherel"]
    if mu is not None:
        report = spectral_forms.x_norm(u, load_order_measure(mu), load_family(None, dimension))
        results.update({"x_norm": report.norm, "e_plus": report.e_plus, "e_minus": report.e_minus, "blocks": report.blocks.to_dict(orient="records")})
    config = _config(ctx, "energy", {"field": field_spec, "sigma": sigma, "mu": mu}, {"s": s, "m": m, "nodes": nodes, "length": length})
    write_report(build_report(config, results=results, grid=_grid_info(grid)), ctx.obj["out"], "energy.json", ctx.obj["overwrite"])
    _print_frame(pd.DataFrame([{k: v for k, v in results.items() if not isinstance(v, list)}]), "Energy")


# --- Problemas de Dirichlet ---
def _problem(mu: str, family: Optional[str], omega: str, nodes: int, p_fallback: float) -> dirichlet_variational.DirichletProblem:
    mask = dirichlet_variational.mask_from_spec(omega, nodes)
    return dirichlet_variational.DirichletProblem.build(load_order_measure(mu), load_family(family, mask.grid.dimension), mask, p_fallback=p_fallback)


@lab.command()
@click.option("--mu", required=True)
@click.option("--family", default=None)
@click.option("--omega", default="interval:0,1", show_default=True, help="'interval:a,b' or 'disk:cx,cy,r'.")
@click.option("--nodes", type=int, default=1024, show_default=True)
@click.option("--k", "k", type=int, default=6, show_default=True)
@click.option("--p-fallback", type=float, default=lab_config.P_FALLBACK, show_default=True)
@click.pass_context
@_lab_errors
def spectrum(ctx, mu, family, omega, nodes, k, p_fallback):
    """Menores autovalores de Dirichlet de la superposición en Omega."""
    problem = _problem(mu, family, omega, nodes, p_fallback)
    result = dirichlet_variational.eigenpairs(problem.mult, problem.mask, k, seed=ctx.obj["seed"], report=problem.report)
    config = _config(ctx, "spectrum", {"mu": mu, "family": family, "omega": omega}, {"nodes": nodes, "k": k})
    out, overwrite = ctx.obj["out"], ctx.obj["overwrite"]
    write_report(build_report(config, results=result.summary().model_dump(), grid=_grid_info(problem.mask.grid)), out, "spectrum.json", overwrite)
    for i, vector in enumerate(result.vectors, start=1):
        write_grid_function(vector, out, f"eigenvector_{i}.bin", overwrite)
    _print_frame(pd.DataFrame({"k": range(1, k + 1), "eigenvalue": result.eigenvalues, "residual": result.residuals}), f"Spectrum ({result.method})")


@lab.command()
@click.option("--kind", type=click.Choice(["linear", "mp", "jump"]), required=True)
@click.option("--mu", required=True)
@click.option("--family", default=None)
@click.option("--omega", default="interval:-1,1", show_default=True)
@click.option("--nodes", type=int, default=512, show_default=True)
@click.option("--q", "q", type=float, default=4.0, show_default=True)
@click.option("--a", "a", type=float, default=None, help="Jumping coefficient on u-; defaults inside the window.")
@click.option("--b", "b", type=float, default=None, help="Jumping coefficient on u+; defaults to a.")
@click.option("--l", "l", type=int, default=2, show_default=True)
@click.option("--rhs", default="builtin:constant", show_default=True, help="Right-hand side field for --kind linear.")
@click.option("--p-fallback", type=float, default=lab_config.P_FALLBACK, show_default=True)
@click.pass_context
@_lab_errors
def solve(ctx, kind, mu, family, omega, nodes, q, a, b, l, rhs, p_fallback):
    """Problema de Dirichlet lineal, paso de montaña subcrítico o problema crítico con salto."""
    problem = _problem(mu, family, omega, nodes, p_fallback)
    mask, tol = problem.mask, ctx.obj["tol"]
    parameters: Dict[str, Any] = {"kind": kind, "nodes": nodes}
    if kind == "linear":
        f = mask.extend(mask.restrict(GridFunction.sample(mask.grid, field_from_spec(rhs, mask.grid.dimension))))
        result = dirichlet_variational.linear_solve(problem.mult, mask, f, tol, report=problem.report)
    elif kind == "mp":
        parameters["q"] = q
        result = critical_points.solve_mountain_pass(problem, q, tol)
    else:
        if a is None:
            lam = dirichlet_variational.eigenpairs(problem.mult, mask, l, seed=ctx.obj["seed"], report=problem.report).eigenvalues
            a = lam[l - 2] + 0.25 * (lam[l - 1] - lam[l - 2]) if l >= 2 else 0.5 * lam[0]
        b = a if b is None else b
        parameters.update({"a": float(a), "b": float(b), "l": l})
        result = critical_points.jumping_solve(problem, a, b, l, tol)

    checks = [CheckResult(name="residual", measured=result.residual, target=0.0, tolerance=tol, passed=result.residual <= tol)]
    results = {"residual": result.residual, "energy": result.energy, "converged": result.converged, **result.extras, "trace": result.trace}
    config = _config(ctx, "solve", {"mu": mu, "family": family, "omega": omega}, parameters)
    out, overwrite = ctx.obj["out"], ctx.obj["overwrite"]
    write_report(build_report(config, checks, results, _grid_info(mask.grid)), out, f"solve_{kind}.json", overwrite)
    write_grid_function(result.solution, out, f"solution_{kind}.bin", overwrite)
    _print_frame(pd.DataFrame([{k: v for k, v in results.items() if k != "trace"}]), f"Solve ({kind})")


# --- Verificaciones ---
@lab.command()
@click.argument("check_id", required=False)
@click.option("--m", "m", type=int, default=None)
@click.option("--s", "s", type=float, default=None)
@click.option("--omega", default=None, help="Interval endpoints 'a,b'.")
@click.option("--K", "truncation", type=int, default=None)
@click.option("--nodes", type=int, default=None)
@click.option("--list", "list_checks", is_flag=True, help="List the registered checks.")
@click.pass_context
@_lab_errors
def verify(ctx, check_id, m, s, omega, truncation, nodes, list_checks):
    """Ejecuta una batería registrada; código de salida 0 solo si pasan todas las comprobaciones."""
    if list_checks or check_id is None:
        rows = [{"id": key, "alias_of": "", "description": check.description} for key, check in CHECKS.items()]
        rows += [{"id": alias, "alias_of": key, "description": CHECKS[key].description} for alias, key in LEMMA_ALIASES.items()]
        _print_frame(pd.DataFrame(rows), "Checks")
        return
    params = {key: value for key, value in {"m": m, "s": s, "omega": omega, "K": truncation, "nodes": nodes}.items() if value is not None}
    params.update({"seed": ctx.obj["seed"], "tol": ctx.obj["tol"], "progress": True})
    results = verification_results(check_id, params)
    frame = pd.DataFrame([r.model_dump() for r in results])
    config = _config(ctx, f"verify {check_id}", {}, {k: v for k, v in params.items() if k != "progress"})
    report = build_report(config, checks=results)
    out, overwrite = ctx.obj["out"], ctx.obj["overwrite"]
    stem = check_id.replace(":", "-")
    write_frame(frame, out, f"verify_{stem}.csv", overwrite)
    write_report(report, out, f"verify_{stem}.json", overwrite)
    _print_frame(frame[["name", "measured", "target", "tolerance", "passed"]], f"verify {check_id}")
    if not report.passed:
        ctx.exit(1)


def main() -> None:
    lab(prog_name="lab")
