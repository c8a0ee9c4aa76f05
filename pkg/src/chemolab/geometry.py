"""Discretizations of R^n: a periodic 3-D box and a radial shell mesh.

Checkpoint layout (little endian)::

    b"CHLB"            magic, 4 bytes
    uint32             format version (1)
    uint32             dimension n
    uint32             geometry kind (0 = box, 1 = radial)
    float64            extent (box half-width) or r_max
    uint32             points_per_axis or cells
    float64[...]       values, row-major
    optional trailer:  b"META", uint32 byte length, UTF-8 text
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from chemolab.errors import DimensionTooLow, UnsupportedGrid


def unit_ball_volume(n: int) -> float:
    """Volume of the n-dimensional unit ball, pi^(n/2) / Gamma(n/2 + 1)."""
    if n < 3:
        raise DimensionTooLow(f"n must be >= 3, got {n}")
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class BoxGrid:
    """Periodic box [-extent, extent)^3 with cell-centred nodes."""

    extent: float
    points_per_axis: int
    n: int = 3

    def __post_init__(self):
        N = self.points_per_axis
        if self.n != 3:
            raise UnsupportedGrid("the box grid supports n = 3 only")
        if N < 8 or N & (N - 1):
            raise UnsupportedGrid(f"points_per_axis must be a power of two >= 8, got {N}")
        if not self.extent > 0:
            raise UnsupportedGrid("extent must be positive")

    @property
    def spacing(self) -> float:
        return 2 * self.extent / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.n

    @property
    def volume(self) -> float:
        return (2 * self.extent) ** self.n

    @cached_property
    def axis(self) -> np.ndarray:
        h = self.spacing
        return -self.extent + (np.arange(self.points_per_axis) + 0.5) * h

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.n), indexing="ij"))

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(x**2 for x in self.mesh()))

    def weights(self) -> np.ndarray:
        return np.full(self.shape, self.cell_volume)


@dataclass(frozen=True)
class RadialMesh:
    """Shells [r_{i-1/2}, r_{i+1/2}] of equal width covering the ball of radius r_max.

    Cell weights are exact shell volumes, so they sum to the ball volume
    up to rounding.
    """

    n: int
    r_max: float
    cells: int

    def __post_init__(self):
        if self.n < 3:
            raise DimensionTooLow(f"n must be >= 3, got {self.n}")
        if self.cells < 16:
            raise UnsupportedGrid(f"cells must be >= 16, got {self.cells}")
        if not self.r_max > 0:
            raise UnsupportedGrid("r_max must be positive")

    @property
    def spacing(self) -> float:
        return self.r_max / self.cells

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells,)

    @cached_property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max, self.cells + 1)

    @cached_property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @cached_property
    def face_areas(self) -> np.ndarray:
        return self.n * unit_ball_volume(self.n) * self.edges ** (self.n - 1)

    @cached_property
    def cell_volumes(self) -> np.ndarray:
        e = self.edges**self.n
        return unit_ball_volume(self.n) * (e[1:] - e[:-1])

    @property
    def volume(self) -> float:
        return unit_ball_volume(self.n) * self.r_max**self.n

    def radius(self) -> np.ndarray:
        return self.centers

    def weights(self) -> np.ndarray:
        return self.cell_volumes


Geometry = BoxGrid | RadialMesh


@dataclass
class Field:
    geometry: Geometry
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.geometry.shape:
            raise ValueError(f"values shape {self.values.shape} != grid {self.geometry.shape}")
        if np.any(self.values < 0):
            raise ValueError("a density field must be nonnegative")

    def copy(self) -> "Field":
        return Field(self.geometry, self.values.copy())

    def integral(self, power: float = 1.0) -> float:
        w = self.geometry.weights()
        v = self.values if power == 1.0 else self.values**power
        return float(np.sum(w * v))

    @property
    def mass(self) -> float:
        return self.integral()

    @property
    def linf(self) -> float:
        return float(np.max(self.values)) if self.values.size else 0.0


_MAGIC = b"CHLB"
_META = b"META"
_HEADER = struct.Struct("<4sIIIdI")


def field_to_bytes(field: Field, metadata: str | None = None) -> bytes:
    g = field.geometry
    if isinstance(g, BoxGrid):
        head = _HEADER.pack(_MAGIC, 1, g.n, 0, g.extent, g.points_per_axis)
    else:
        head = _HEADER.pack(_MAGIC, 1, g.n, 1, g.r_max, g.cells)
    out = head + np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    if metadata is not None:
        text = metadata.encode()
        out += _META + struct.pack("<I", len(text)) + text
    return out


def _unpack(data: bytes) -> tuple[Field, str | None]:
    magic, version, n, kind, size, count = _HEADER.unpack_from(data)
    if magic != _MAGIC or version != 1:
        raise ValueError("not a chemolab field checkpoint")
    geom: Geometry = BoxGrid(size, count, n) if kind == 0 else RadialMesh(n, size, count)
    k = math.prod(geom.shape)
    vals = np.frombuffer(data, dtype="<f8", count=k, offset=_HEADER.size).reshape(geom.shape)
    pos = _HEADER.size + 8 * k
    meta = None
    if len(data) > pos:
        if data[pos : pos + 4] != _META:
            raise ValueError("unrecognised checkpoint trailer")
        (length,) = struct.unpack_from("<I", data, pos + 4)
        meta = data[pos + 8 : pos + 8 + length].decode()
    return Field(geom, vals.copy()), meta


def field_from_bytes(data: bytes) -> Field:
    return _unpack(data)[0]


def save_field(field: Field, path: str | Path, metadata: str | None = None) -> None:
    Path(path).write_bytes(field_to_bytes(field, metadata))


def load_field(path: str | Path) -> Field:
    return field_from_bytes(Path(path).read_bytes())


def load_field_metadata(path: str | Path) -> str | None:
    """Text stored in the checkpoint trailer, or None."""
    return _unpack(Path(path).read_bytes())[1]
