# laboratorio_operadores_no_locales/models/grids.py
"""Portadores de datos sobre la caja periódica: funciones de malla, multiplicadores y máscaras."""

import dataclasses
import struct
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from ..exceptions import ContractViolation, GridMismatchError

_HEADER = struct.Struct("<iid")


@dataclasses.dataclass(frozen=True)
class GridSpec:
    """Caja periódica [origin, origin + length)^N con ``nodes`` puntos por eje."""

    dimension: int
    nodes: int
    length: float
    origin: Tuple[float, ...]

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ContractViolation(f"Grids support N in (1, 2), got {self.dimension}")
        if self.nodes < 2 or self.nodes & (self.nodes - 1):
            raise ContractViolation(f"Node count must be a power of two, got {self.nodes}")
        if len(self.origin) != self.dimension:
            raise ContractViolation(f"Origin {self.origin} does not match dimension {self.dimension}")

    @classmethod
    def centered(cls, dimension: int, nodes: int, length: float, center: float = 0.0) -> "GridSpec":
        return cls(dimension, nodes, float(length), tuple([center - 0.5 * length] * dimension))

    @property
    def spacing(self) -> float:
        return self.length / self.nodes

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dimension

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.nodes,) * self.dimension

    def axes(self) -> Tuple[NDArray[np.float64], ...]:
        return tuple(o + self.spacing * np.arange(self.nodes) for o in self.origin)

    def coordinates(self) -> NDArray[np.float64]:
        """Coordenadas de los nodos con forma ``shape + (N,)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def frequencies(self) -> NDArray[np.float64]:
        """Frecuencias discretas 2*pi*k/L en orden FFT, forma ``shape + (N,)``."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.nodes, d=self.spacing)
        mesh = np.meshgrid(*([k] * self.dimension), indexing="ij")
        return np.stack(mesh, axis=-1)

    def require_same(self, other: "GridSpec") -> None:
        if self != other:
            raise GridMismatchError(f"Grid mismatch: {self} vs {other}")


@dataclasses.dataclass(frozen=True)
class GridFunction:
    grid: GridSpec
    values: NDArray[np.float64]

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ContractViolation(f"Samples of shape {self.values.shape} do not fit grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ContractViolation("Grid function samples must be finite")

    @classmethod
    def sample(cls, grid: GridSpec, field) -> "GridFunction":
        """Muestrea una función que recibe puntos de forma (..., N)."""
        points = grid.coordinates()
        values = field(points)
        return cls(grid, np.asarray(values, dtype=float))

    def with_values(self, values: NDArray[np.float64]) -> "GridFunction":
        return GridFunction(self.grid, np.asarray(values, dtype=float))

    def l2_norm_squared(self) -> float:
        return float(self.grid.cell_volume * np.sum(self.values**2))

    # --- Formato binario y CSV ---
    def to_bytes(self) -> bytes:
        header = _HEADER.pack(self.grid.dimension, self.grid.nodes, self.grid.length)
        origin = np.asarray(self.grid.origin, dtype="<f8").tobytes()
        return header + origin + self.values.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, payload: bytes) -> "GridFunction":
        dimension, nodes, length = _HEADER.unpack_from(payload)
        offset = _HEADER.size
        origin = tuple(np.frombuffer(payload, dtype="<f8", count=dimension, offset=offset).tolist())
        offset += 8 * dimension
        grid = GridSpec(dimension, nodes, length, origin)
        values = np.frombuffer(payload, dtype="<f8", offset=offset).reshape(grid.shape).astype(float)
        return cls(grid, values)

    def write(self, path: Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def read(cls, path: Path) -> "GridFunction":
        return cls.from_bytes(Path(path).read_bytes())

    def to_frame(self) -> pd.DataFrame:
        points = self.grid.coordinates().reshape(-1, self.grid.dimension)
        columns = {f"x{i}": points[:, i] for i in range(self.grid.dimension)}
        columns["value"] = self.values.reshape(-1)
        return pd.DataFrame(columns)

    @classmethod
    def from_frame(cls, grid: GridSpec, frame: pd.DataFrame) -> "GridFunction":
        return cls(grid, frame["value"].to_numpy(dtype=float).reshape(grid.shape))


@dataclasses.dataclass(frozen=True)
class MultiplierGrid:
    """Valores del símbolo m(xi) en las frecuencias discretas de la malla."""

    grid: GridSpec
    values: NDArray[np.float64]

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ContractViolation(f"Multiplier of shape {self.values.shape} does not fit grid shape {self.grid.shape}")

    @property
    def minimum(self) -> float:
        return float(np.min(self.values))


@dataclasses.dataclass(frozen=True)
class DomainMask:
    """Nodos de Omega dentro de la caja; fuera de Omega las funciones valen cero."""

    grid: GridSpec
    inside: NDArray[np.bool_]
    diameter: float

    def __post_init__(self):
        if self.inside.shape != self.grid.shape:
            raise ContractViolation("Mask shape does not match the grid")
        if not np.any(self.inside):
            raise ContractViolation("Domain mask is empty")
        coords = self.grid.coordinates()[self.inside]
        margin = 0.25 * self.grid.length
        for axis, origin in enumerate(self.grid.origin):
            lo, hi = origin + margin, origin + self.grid.length - margin
            if coords[:, axis].min() < lo - 1e-12 or coords[:, axis].max() > hi + 1e-12:
                raise ContractViolation("Domain must stay at distance >= L/4 from the periodic boundary")

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.inside))

    @property
    def measure(self) -> float:
        """|Omega| aproximado por el número de nodos por el volumen de celda."""
        return self.size * self.grid.cell_volume

    def restrict(self, u: GridFunction) -> NDArray[np.float64]:
        self.grid.require_same(u.grid)
        return u.values[self.inside]

    def extend(self, inner: NDArray[np.float64]) -> GridFunction:
        values = np.zeros(self.grid.shape)
        values[self.inside] = inner
        return GridFunction(self.grid, values)

    def require_supported(self, u: GridFunction, atol: float = 0.0) -> None:
        self.grid.require_same(u.grid)
        outside = np.abs(u.values[~self.inside])
        if outside.size and outside.max() > atol:
            raise ContractViolation(f"Field is nonzero outside the domain (max {outside.max():.3e})")
