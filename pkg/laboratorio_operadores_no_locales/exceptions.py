# laboratorio_operadores_no_locales/exceptions.py
"""Errores tipados del laboratorio."""

from typing import Dict, List, Optional, Sequence


class LabError(Exception):
    """Clase base de todo fallo que el laboratorio informa a propósito."""


class MeasureValidationError(LabError, ValueError):
    """Una medida esférica o de orden viola sus invariantes estructurales."""


class DomainError(LabError, ValueError):
    """Un orden s (o m) cae fuera del rango donde la magnitud es finita."""


class ContractViolation(LabError, ValueError):
    """Quien llama rompió una precondición (dirección no unitaria, campo fuera del dominio, ...)."""


class AssumptionViolation(LabError, ValueError):
    """La medida de orden no tiene masa positiva por encima del orden umbral."""


class IntegratedMeasureUndefined(LabError, ValueError):
    """La parte positiva tiene masa nula en [s_star, t]."""


class RecursionDegenerateError(LabError, ArithmeticError):
    """P_n(s) se anula y la recursión entre órdenes no puede dar c_{n,s}."""


class SpectralResolutionError(LabError, RuntimeError):
    """Las derivadas espectrales dejaron de ser insensibles a la malla."""

    def __init__(self, message: str, trusted_order: int):
        super().__init__(message)
        self.trusted_order = trusted_order


class SuperpositionNotCertified(LabError, RuntimeError):
    """La superposición no puede evaluarse con error certificado en el punto."""


class GridMismatchError(LabError, ValueError):
    """Dos objetos de malla no comparten dimensión, número de nodos, longitud y origen."""


class SupportTouchesBoundaryError(LabError, ValueError):
    """Un campo está demasiado cerca del borde periódico para un oráculo no periódico."""


class IndefiniteFormError(LabError, RuntimeError):
    """La forma cuadrática superpuesta no es positiva; los solvers se niegan a correr."""


class EigenSolverError(LabError, RuntimeError):
    """El solver de autovalores llegó a su tope de iteraciones."""

    def __init__(self, message: str, residuals: Sequence[float]):
        super().__init__(message)
        self.residuals = list(residuals)


class DescentStagnationError(LabError, RuntimeError):
    """Una iteración de descenso o de Newton dejó de avanzar."""

    def __init__(self, message: str, trace: Optional[List[Dict[str, float]]] = None):
        super().__init__(message)
        self.trace = trace or []


class FucikWindowError(LabError, ValueError):
    """Los parámetros de salto (a, b) están fuera de la ventana admisible de autovalores."""


class UnknownCheckError(LabError, KeyError):
    """Un id de verificación no tiene comprobación registrada."""

    def __init__(self, check_id: str, available: Sequence[str]):
        super().__init__(check_id)
        self.check_id = check_id
        self.available = sorted(available)

    def __str__(self) -> str:
        return f"Unknown check '{self.check_id}'. Available: {', '.join(self.available)}"
