# laboratorio_operadores_no_locales/util/measure_io.py
"""Lectura y escritura de documentos JSON de medidas, y la notación corta de la CLI.

Documento de medida esférica:
  {"variant": "uniform", "dimension": 2}
  {"variant": "atomic", "dimension": 1, "signs": [1, -1], "weights": [0.5, 0.5]}
  {"variant": "atomic", "dimension": 2, "angles": [0.0, 1.5708], "weights": [0.5, 0.5]}
  {"variant": "mixture", "dimension": 2, "components": [{"coefficient": 0.5, "measure": {...}}, ...]}
Familia: {"breakpoints": [...], "pieces": [doc, ...], "tail": doc}
Medida de orden: {"pos_atoms": [[s, w], ...], "neg_atoms": [...], "pos_density": [[a, b, v], ...], "neg_density": [...]}
"""

import json
import math
import re
from pathlib import Path
from typing import Any, Dict, Union

from pydantic import ValidationError

from ..exceptions import ContractViolation, MeasureValidationError
from ..models.measures import MeasureFamily, OrderMeasure, SphericalMeasure

_NUMBER = r"\d*\.?\d+(?:[eE][+-]?\d+)?"
_TERM = re.compile(rf"\s*([+-])?\s*(?:({_NUMBER})\s*\*\s*)?delta:({_NUMBER})\s*")


def _validated(model, document: Dict[str, Any], label: str):
    try:
        return model.model_validate(document)
    except ValidationError as exc:
        raise MeasureValidationError(f"Invalid {label} document: {exc.errors()[0]['msg']}") from exc


def measure_from_document(document: Dict[str, Any]) -> SphericalMeasure:
    variant = document.get("variant")
    dimension = int(document.get("dimension", 1))
    if variant == "atomic" and "atoms" not in document:
        weights = [float(w) for w in document.get("weights", [])]
        if dimension == 1:
            directions = [(float(sign),) for sign in document.get("signs", [])]
        else:
            directions = [(math.cos(a), math.sin(a)) for a in document.get("angles", [])]
        if len(directions) != len(weights):
            raise MeasureValidationError(f"{len(directions)} directions but {len(weights)} weights")
        atoms = [{"direction": d, "weight": w} for d, w in zip(directions, weights)]
        return _validated(SphericalMeasure, {"variant": "atomic", "dimension": dimension, "atoms": atoms}, "spherical measure")
    if variant == "mixture":
        components = [{"coefficient": c["coefficient"], "measure": measure_from_document(c["measure"])} for c in document.get("components", [])]
        return _validated(SphericalMeasure, {"variant": "mixture", "dimension": dimension, "components": components}, "spherical measure")
    return _validated(SphericalMeasure, document, "spherical measure")


def measure_to_document(sigma: SphericalMeasure) -> Dict[str, Any]:
    if sigma.variant == "uniform":
        return {"variant": "uniform", "dimension": sigma.dimension}
    if sigma.variant == "mixture":
        components = [{"coefficient": c.coefficient, "measure": measure_to_document(c.measure)} for c in sigma.components]
        return {"variant": "mixture", "dimension": sigma.dimension, "components": components}
    weights = [atom.weight for atom in sigma.atoms]
    if sigma.dimension == 1:
        return {"variant": "atomic", "dimension": 1, "signs": [atom.direction[0] for atom in sigma.atoms], "weights": weights}
    angles = [math.atan2(atom.direction[1], atom.direction[0]) for atom in sigma.atoms]
    return {"variant": "atomic", "dimension": 2, "angles": angles, "weights": weights}


def family_from_document(document: Dict[str, Any]) -> MeasureFamily:
    dimension = int(document.get("dimension", 1))
    tail = measure_from_document(document["tail"]) if "tail" in document else SphericalMeasure.uniform(dimension)
    pieces = [measure_from_document(piece) for piece in document.get("pieces", [])]
    return _validated(MeasureFamily, {"breakpoints": document.get("breakpoints", []), "pieces": pieces, "tail": tail}, "measure family")


def family_to_document(family: MeasureFamily) -> Dict[str, Any]:
    return {
        "breakpoints": list(family.breakpoints),
        "pieces": [measure_to_document(p) for p in family.pieces],
        "tail": measure_to_document(family.tail),
    }


def order_measure_from_document(document: Dict[str, Any]) -> OrderMeasure:
    return _validated(OrderMeasure, document, "order measure")


def parse_order_shorthand(text: str) -> OrderMeasure:
    """``"delta:0.5"``, ``"delta:1 + 0.5*delta:0.5"``, ``"delta:0.5 - 0.05*delta:0.25"``."""
    position, pos_atoms, neg_atoms = 0, [], []
    while position < len(text):
        match = _TERM.match(text, position)
        if match is None or match.end() == position:
            raise ContractViolation(f"Cannot parse order measure '{text}' at position {position}")
        sign, weight, order = match.groups()
        if position > 0 and sign is None:
            raise ContractViolation(f"Missing '+' or '-' between terms in '{text}'")
        (neg_atoms if sign == "-" else pos_atoms).append((float(order), float(weight) if weight else 1.0))
        position = match.end()
    if not pos_atoms and not neg_atoms:
        raise ContractViolation("Empty order measure")
    return _validated(OrderMeasure, {"pos_atoms": pos_atoms, "neg_atoms": neg_atoms}, "order measure")


def _read_json(path: Path) -> Dict[str, Any]:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ContractViolation(f"{path} is not valid JSON: {exc}") from exc


def load_order_measure(source: Union[str, Path]) -> OrderMeasure:
    """Ruta a un JSON o la notación corta ``delta:s``."""
    path = Path(source)
    if path.suffix == ".json":
        if not path.exists():
            raise ContractViolation(f"Order measure file {path} not found")
        return order_measure_from_document(_read_json(path))
    return parse_order_shorthand(str(source))


def load_spherical_measure(source: Union[str, Path, None], dimension: int = 1) -> SphericalMeasure:
    """Ruta a un JSON, ``uniform`` (por defecto) o ``dirac:<angle>`` / ``dirac:+1``."""
    if source is None or source == "uniform":
        return SphericalMeasure.uniform(dimension)
    text = str(source)
    if text.startswith("dirac:"):
        value = float(text.split(":", 1)[1])
        return SphericalMeasure.dirac((math.copysign(1.0, value),)) if dimension == 1 else SphericalMeasure.from_angles([(value, 1.0)])
    path = Path(text)
    if not path.exists():
        raise ContractViolation(f"Spherical measure file {path} not found")
    return measure_from_document(_read_json(path))


def load_family(source: Union[str, Path, None], dimension: int = 1) -> MeasureFamily:
    if source is None or source == "uniform":
        return MeasureFamily.constant(SphericalMeasure.uniform(dimension))
    path = Path(source)
    if not path.exists():
        raise ContractViolation(f"Measure family file {path} not found")
    document = _read_json(path)
    document.setdefault("dimension", dimension)
    return family_from_document(document)
