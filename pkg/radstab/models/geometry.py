"""Models for the spatial mesh, the discrete velocity set and the boundary partition."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from ..exceptions import ValidationError


@dataclass
class MeshSpec:
    """Input model for build_mesh().

    Args:
        origin: Lower-left corner of the rectangle.
        extents: Side lengths along each axis. Must be positive.
        cells_per_axis: Number of cells along each axis. Must be positive.

    """

    origin: Tuple[float, float] = (0.0, 0.0)
    extents: Tuple[float, float] = (1.0, 1.0)
    cells_per_axis: Tuple[int, int] = (16, 16)


@dataclass(frozen=True)
class BoundaryFace:
    """A cell face lying on the boundary of the rectangle."""

    face_id: int
    cell: int  # Flat index of the adjacent interior cell
    normal: Tuple[float, float]  # Outward unit normal
    area: float  # Face length in 2-D
    center: Tuple[float, float]
    side: str  # left, right, bottom or top

    def to_dict(self) -> Dict[str, Any]:
        """Convert face to dictionary."""
        return {
            "face_id": self.face_id,
            "cell": self.cell,
            "normal": list(self.normal),
            "area": self.area,
            "center": list(self.center),
            "side": self.side,
        }


@dataclass(frozen=True, eq=False)
class SpatialMesh:
    """Rectangular cell grid with boundary faces.

    Cells are indexed ``c = ix * ny + iy`` so that ``values.reshape(nx, ny, ...)``
    recovers the grid layout.
    """

    origin: np.ndarray
    extents: np.ndarray
    cells_per_axis: Tuple[int, int]
    cell_size: np.ndarray
    boundary_faces: List[BoundaryFace]
    n: int = 2

    @property
    def shape(self) -> Tuple[int, int]:
        """Grid shape (nx, ny)."""
        return self.cells_per_axis

    @property
    def n_cells(self) -> int:
        """Total number of cells."""
        return int(self.cells_per_axis[0] * self.cells_per_axis[1])

    @property
    def cell_volume(self) -> float:
        """Area of one cell."""
        return float(np.prod(self.cell_size))

    @property
    def volume(self) -> float:
        """Area of the rectangle."""
        return float(np.prod(self.extents))

    @property
    def perimeter(self) -> float:
        """Perimeter of the rectangle."""
        return float(2.0 * np.sum(self.extents))

    @property
    def cell_centers(self) -> np.ndarray:
        """Cell centers, shape (n_cells, 2)."""
        nx, ny = self.cells_per_axis
        xs = self.origin[0] + (np.arange(nx) + 0.5) * self.cell_size[0]
        ys = self.origin[1] + (np.arange(ny) + 0.5) * self.cell_size[1]
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])

    @property
    def corners(self) -> np.ndarray:
        """The four corners of the closed rectangle, shape (4, 2)."""
        x0, y0 = self.origin
        x1, y1 = self.origin + self.extents
        return np.array([[x0, y0], [x1, y0], [x0, y1], [x1, y1]])

    @property
    def face_cells(self) -> np.ndarray:
        """Adjacent cell of every boundary face."""
        return np.array([f.cell for f in self.boundary_faces], dtype=int)

    @property
    def face_normals(self) -> np.ndarray:
        """Outward normals of every boundary face, shape (n_faces, 2)."""
        return np.array([f.normal for f in self.boundary_faces], dtype=float)

    @property
    def face_areas(self) -> np.ndarray:
        """Area (length) of every boundary face."""
        return np.array([f.area for f in self.boundary_faces], dtype=float)

    @property
    def face_centers(self) -> np.ndarray:
        """Midpoint of every boundary face, shape (n_faces, 2)."""
        return np.array([f.center for f in self.boundary_faces], dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        """Convert mesh description to dictionary."""
        return {
            "n": self.n,
            "origin": self.origin.tolist(),
            "extents": self.extents.tolist(),
            "cells_per_axis": list(self.cells_per_axis),
            "cell_size": self.cell_size.tolist(),
            "n_boundary_faces": len(self.boundary_faces),
        }


@dataclass(frozen=True, eq=False)
class VelocitySet:
    """Discrete ordinates with positive quadrature weights on the speed annulus."""

    ordinates: np.ndarray  # (J, 2)
    weights: np.ndarray  # (J,)
    v_min_speed: float
    v_max_speed: float
    n_angles: int
    n_speeds: int

    @property
    def n_ordinates(self) -> int:
        """Number of ordinates J."""
        return int(self.ordinates.shape[0])

    @property
    def speeds(self) -> np.ndarray:
        """Euclidean length of every ordinate."""
        return np.linalg.norm(self.ordinates, axis=1)

    @property
    def measure(self) -> float:
        """Quadrature measure |V| (sum of weights)."""
        return float(np.sum(self.weights))

    @property
    def min_speed_squared(self) -> float:
        """Smallest squared ordinate speed."""
        return float(np.min(self.speeds) ** 2)

    def to_dict(self) -> Dict[str, Any]:
        """Convert velocity set description to dictionary."""
        return {
            "v0": self.v_min_speed,
            "v1": self.v_max_speed,
            "n_angles": self.n_angles,
            "n_speeds": self.n_speeds,
            "measure": self.measure,
        }


@dataclass(frozen=True, eq=False)
class BoundarySet:
    """(face, ordinate) pairs on one side of the boundary with their ν·v values."""

    faces: np.ndarray
    ordinates: np.ndarray
    nu_dot_v: np.ndarray

    def __len__(self) -> int:
        """Number of (face, ordinate) entries."""
        return int(self.faces.shape[0])


@dataclass(frozen=True, eq=False)
class BoundaryPartition:
    """Split of boundary (face, ordinate) pairs into outflow, inflow and tangential."""

    gamma_plus: BoundarySet
    gamma_minus: BoundarySet
    tol: float
    n_tangential: int = 0

    def side(self, name: str) -> BoundarySet:
        """Return the entries of one side ('plus' or 'minus')."""
        if name == "plus":
            return self.gamma_plus
        if name == "minus":
            return self.gamma_minus
        raise ValidationError(f"Unknown boundary side: {name}")


@dataclass(frozen=True, eq=False)
class PhaseSpace:
    """A mesh, a velocity set and their boundary partition, shared by all analyzers."""

    mesh: SpatialMesh
    vset: VelocitySet
    partition: BoundaryPartition = field(repr=False)

    @property
    def shape(self) -> Tuple[int, int]:
        """Shape (n_cells, n_ordinates) of a phase-space slice."""
        return (self.mesh.n_cells, self.vset.n_ordinates)
