# laboratorio_operadores_no_locales/models/reports.py
"""Modelos de resultados y de configuración numérica."""

from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

Route = Literal["closed_form", "recursion", "quadrature"]


class EllipticityReport(BaseModel):
    """Constantes de elipticidad medidas sobre una familia de medidas esféricas."""

    lambda_: float = Field(alias="lambda")
    lambda0: float
    lambda_tilde: Optional[float] = None
    eass_satisfied: Optional[bool] = None
    maximizers: List[Tuple[float, Tuple[float, ...], float]] = []

    model_config = ConfigDict(populate_by_name=True)

    @model_validator(mode="after")
    def _ordered(self) -> "EllipticityReport":
        if not (-1e-12 <= self.lambda0 <= self.lambda_ + 1e-12 and self.lambda_ <= 1.0 + 1e-12):
            raise ValueError(f"Expected 0 <= lambda0 <= lambda <= 1, got lambda0={self.lambda0}, lambda={self.lambda_}")
        return self


class AssumptionReport(BaseModel):
    s_star: float
    gamma: float
    s_sharp: float
    two_star: float
    dimension: int
    valid: Dict[str, bool]

    @property
    def solvable(self) -> bool:
        return all(self.valid.values())


class ConstantBundle(BaseModel):
    """c_{m,s} junto con los ingredientes con que se calculó."""

    m: int = Field(ge=1)
    s: float
    M_at_es: float
    cosine_integral: float
    c_ms: float = Field(gt=0.0)
    route: Route


class QuadratureSpec(BaseModel):
    """Parámetros de la cuadratura radial para integrales hipersingulares."""

    model_config = ConfigDict(frozen=True)

    near_split: float = Field(default=0.05, gt=0.0, le=1.0)
    far_cutoff: Optional[float] = None
    panel_width: float = Field(default=0.02, gt=0.0)
    near_nodes: int = Field(default=48, ge=8)
    panel_nodes: int = Field(default=16, ge=4)
    angular_nodes: int = Field(default=256, ge=8)
    order_nodes: int = Field(default=32, ge=2)
    tolerance: float = Field(default=1e-8, gt=0.0)
    unbounded_cutoff: float = Field(default=400.0, gt=1.0)

    @model_validator(mode="after")
    def _split_below_cutoff(self) -> "QuadratureSpec":
        if self.far_cutoff is not None and self.far_cutoff <= self.near_split:
            raise ValueError(f"near_split {self.near_split} must be below far_cutoff {self.far_cutoff}")
        return self


class SpectrumSummary(BaseModel):
    eigenvalues: List[float]
    residuals: List[float]
    method: str


class CheckResult(BaseModel):
    name: str
    measured: float
    target: Optional[float] = None
    tolerance: Optional[float] = None
    passed: bool
    detail: str = ""


class ExperimentConfig(BaseModel):
    """Configuración de un experimento de línea de comandos; el hash excluye la marca de tiempo."""

    command: str
    inputs: Dict[str, str] = {}
    parameters: Dict[str, float | int | str | bool | None] = {}
    tolerance: float = 1e-8
    seed: int = 42
    output_dir: str = "./lab_outputs"
