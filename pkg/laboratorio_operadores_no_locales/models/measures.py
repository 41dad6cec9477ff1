# laboratorio_operadores_no_locales/models/measures.py
"""Modelos de medidas: medidas esféricas, familias en el orden s y medidas de orden con signo."""

import math
from typing import List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

MASS_TOLERANCE = 1e-12
SUPPORTED_DIMENSIONS = (1, 2)


class Atom(BaseModel):
    """Punto de masa sobre la esfera unidad."""

    model_config = ConfigDict(frozen=True)

    direction: Tuple[float, ...]
    weight: float = Field(ge=0.0)

    @model_validator(mode="after")
    def _unit_direction(self) -> "Atom":
        norm = math.sqrt(sum(c * c for c in self.direction))
        if abs(norm - 1.0) > MASS_TOLERANCE:
            raise ValueError(f"Atom direction {self.direction} has norm {norm}, expected 1")
        return self


class MixtureComponent(BaseModel):
    model_config = ConfigDict(frozen=True)

    coefficient: float = Field(ge=0.0)
    measure: "SphericalMeasure"


class SphericalMeasure(BaseModel):
    """Medida de probabilidad sobre S^{N-1} (N = 1 o 2): uniforme, atómica o mezcla."""

    model_config = ConfigDict(frozen=True)

    variant: Literal["uniform", "atomic", "mixture"]
    dimension: int
    atoms: List[Atom] = []
    components: List[MixtureComponent] = []

    @model_validator(mode="after")
    def _probability_measure(self) -> "SphericalMeasure":
        if self.dimension not in SUPPORTED_DIMENSIONS:
            raise ValueError(f"Spherical measures are supported for N in {SUPPORTED_DIMENSIONS}, got N={self.dimension}")
        if self.variant == "atomic":
            if not self.atoms:
                raise ValueError("Atomic measure needs at least one atom")
            for atom in self.atoms:
                if len(atom.direction) != self.dimension:
                    raise ValueError(f"Atom direction {atom.direction} does not live in dimension {self.dimension}")
            total = math.fsum(atom.weight for atom in self.atoms)
            if abs(total - 1.0) > MASS_TOLERANCE:
                raise ValueError(f"Atomic weights sum to {total}, expected 1")
        elif self.variant == "mixture":
            if not self.components:
                raise ValueError("Mixture needs at least one component")
            for component in self.components:
                if component.measure.dimension != self.dimension:
                    raise ValueError("Mixture components must share the dimension of the mixture")
            total = math.fsum(component.coefficient for component in self.components)
            if abs(total - 1.0) > MASS_TOLERANCE:
                raise ValueError(f"Mixture coefficients sum to {total}, expected 1")
        return self

    # --- Constructores ---
    @classmethod
    def uniform(cls, dimension: int) -> "SphericalMeasure":
        return cls(variant="uniform", dimension=dimension)

    @classmethod
    def atomic(cls, atoms: Sequence[Tuple[Sequence[float], float]]) -> "SphericalMeasure":
        built = [Atom(direction=tuple(float(c) for c in direction), weight=float(weight)) for direction, weight in atoms]
        return cls(variant="atomic", dimension=len(built[0].direction), atoms=built)

    @classmethod
    def dirac(cls, direction: Sequence[float]) -> "SphericalMeasure":
        return cls.atomic([(direction, 1.0)])

    @classmethod
    def from_angles(cls, angles_and_weights: Sequence[Tuple[float, float]]) -> "SphericalMeasure":
        """Medida atómica en la circunferencia a partir de pares (ángulo, peso)."""
        return cls.atomic([((math.cos(angle), math.sin(angle)), weight) for angle, weight in angles_and_weights])

    @classmethod
    def mixture(cls, parts: Sequence[Tuple[float, "SphericalMeasure"]]) -> "SphericalMeasure":
        components = [MixtureComponent(coefficient=float(c), measure=m) for c, m in parts]
        return cls(variant="mixture", dimension=components[0].measure.dimension, components=components)


class MeasureFamily(BaseModel):
    """Familia s -> sigma_s constante a trozos.

    ``pieces[i]`` rige en ``[breakpoints[i], breakpoints[i+1])``; ``tail`` rige fuera de
    todos los trozos. En s = 0 la familia siempre devuelve la medida uniforme.
    """

    model_config = ConfigDict(frozen=True)

    breakpoints: List[float] = []
    pieces: List[SphericalMeasure] = []
    tail: SphericalMeasure

    @model_validator(mode="after")
    def _piecewise_constant(self) -> "MeasureFamily":
        if self.breakpoints and len(self.pieces) != len(self.breakpoints) - 1:
            raise ValueError(f"{len(self.breakpoints)} breakpoints need {len(self.breakpoints) - 1} pieces, got {len(self.pieces)}")
        if not self.breakpoints and self.pieces:
            raise ValueError("Pieces given without breakpoints")
        if any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError(f"Breakpoints must be strictly increasing: {self.breakpoints}")
        if any(b < 0 for b in self.breakpoints):
            raise ValueError("Breakpoints must be nonnegative orders")
        for piece in self.pieces:
            if piece.dimension != self.tail.dimension:
                raise ValueError("All pieces must share the dimension of the tail measure")
        return self

    @property
    def dimension(self) -> int:
        return self.tail.dimension

    @classmethod
    def constant(cls, measure: SphericalMeasure) -> "MeasureFamily":
        return cls(tail=measure)

    def sigma_at(self, s: float) -> SphericalMeasure:
        if s == 0.0:
            return SphericalMeasure.uniform(self.dimension)
        for i, piece in enumerate(self.pieces):
            if self.breakpoints[i] <= s < self.breakpoints[i + 1]:
                return piece
        return self.tail

    def constant_intervals(self, lo: float, hi: float) -> List[Tuple[float, float, SphericalMeasure]]:
        """Parte [lo, hi) en subintervalos donde sigma_s no cambia."""
        cuts = sorted({lo, hi, *[b for b in self.breakpoints if lo < b < hi]})
        return [(a, b, self.sigma_at(0.5 * (a + b))) for a, b in zip(cuts, cuts[1:]) if b > a]


class MeasurePart(BaseModel):
    """Parte no negativa de una medida de orden: átomos y densidades constantes a trozos."""

    model_config = ConfigDict(frozen=True)

    atoms: List[Tuple[float, float]] = []
    density: List[Tuple[float, float, float]] = []

    @property
    def is_empty(self) -> bool:
        return not self.atoms and not self.density

    @property
    def total_mass(self) -> float:
        return math.fsum(w for _, w in self.atoms) + math.fsum((b - a) * v for a, b, v in self.density)

    @property
    def support_supremum(self) -> Optional[float]:
        candidates = [s for s, w in self.atoms if w > 0] + [b for a, b, v in self.density if v > 0 and b > a]
        return max(candidates) if candidates else None


class OrderMeasure(BaseModel):
    """Medida finita con signo mu = mu+ - mu- sobre [0, inf)."""

    model_config = ConfigDict(frozen=True)

    pos_atoms: List[Tuple[float, float]] = []
    neg_atoms: List[Tuple[float, float]] = []
    pos_density: List[Tuple[float, float, float]] = []
    neg_density: List[Tuple[float, float, float]] = []

    @model_validator(mode="after")
    def _finite_nonnegative(self) -> "OrderMeasure":
        for label, atoms in (("pos_atoms", self.pos_atoms), ("neg_atoms", self.neg_atoms)):
            for s, w in atoms:
                if s < 0 or not math.isfinite(s):
                    raise ValueError(f"{label}: order {s} must be a finite nonnegative number")
                if w <= 0 or not math.isfinite(w):
                    raise ValueError(f"{label}: weight {w} must be finite and positive")
        for label, pieces in (("pos_density", self.pos_density), ("neg_density", self.neg_density)):
            for a, b, v in pieces:
                if not (0 <= a < b) or not math.isfinite(b):
                    raise ValueError(f"{label}: interval [{a}, {b}) must be bounded inside [0, inf)")
                if v < 0 or not math.isfinite(v):
                    raise ValueError(f"{label}: density value {v} must be finite and nonnegative")
        return self

    @property
    def positive(self) -> MeasurePart:
        return MeasurePart(atoms=self.pos_atoms, density=self.pos_density)

    @property
    def negative(self) -> MeasurePart:
        return MeasurePart(atoms=self.neg_atoms, density=self.neg_density)

    @property
    def total_variation(self) -> float:
        return self.positive.total_mass + self.negative.total_mass

    @classmethod
    def dirac(cls, s: float, weight: float = 1.0) -> "OrderMeasure":
        return cls(pos_atoms=[(float(s), float(weight))])


MixtureComponent.model_rebuild()
